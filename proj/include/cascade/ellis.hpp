#pragma once

// Symbolic elements of the enveloping semigroup E(X, f, Z).
//
// An element is either a principal power f^m or a limit element f^p (side
// Forward) or (f^-1)^p (side Backward) for a non-principal ultrafilter p. A
// limit element is stored through its action on periodic points: residue r_q
// means the element acts as f^{r_q} on every point of period q. So a Forward
// element with residues r comes from any p in the classes qN + r_q, and a
// Backward element with residues r from any p in the classes qN - r_q.
//
// On shift2 the Forward elements send every point except -inf to +inf and
// the Backward ones every point except +inf to -inf; on ishift both sides are
// the constant map to inf.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cascade/dynamics.hpp"
#include "cascade/residue.hpp"

namespace cascade {

enum class Side { Forward, Backward };

inline Side flip(Side s) { return s == Side::Forward ? Side::Backward : Side::Forward; }

class EllisElement {
 public:
  static EllisElement principal(i64 m) {
    EllisElement e;
    e.exponent_ = m;
    return e;
  }
  static EllisElement limit(Side side, ResidueSystem residues) {
    EllisElement e;
    e.limit_ = true;
    e.side_ = side;
    e.residues_ = std::move(residues);
    return e;
  }

  /// "id", "f", "f^k", "f^-k", "f^+" / "f+", "f^-" / "f-", "inf",
  /// "fwd(<residues>)", "bwd(<residues>)".
  static EllisElement parse(std::string_view text);

  bool is_principal() const { return !limit_; }
  i64 exponent() const { return exponent_; }
  Side side() const { return side_; }
  const ResidueSystem& residues() const { return residues_; }

  /// Residues of the action on periodic points; f^m acts as m everywhere.
  ResidueSystem action() const { return limit_ ? residues_ : ResidueSystem::constant(exponent_); }

  std::string to_string() const {
    if (!limit_) {
      if (exponent_ == 0) return "id";
      if (exponent_ == 1) return "f";
      return "f^" + std::to_string(exponent_);
    }
    return std::string(side_ == Side::Forward ? "fwd(" : "bwd(") + residues_.to_string() + ")";
  }

  bool operator==(const EllisElement&) const = default;

 private:
  bool limit_ = false;
  i64 exponent_ = 0;
  Side side_ = Side::Forward;
  ResidueSystem residues_;
};

inline EllisElement EllisElement::parse(std::string_view raw) {
  const std::string text = detail::strip_spaces(raw);
  auto fail = [&]() -> EllisElement {
    throw ParseError("bad element '" + text +
                         "'; expected id, f, f^k, f^+, f^-, inf, fwd(...) or bwd(...)",
                     1, 1);
  };
  if (text == "id") return principal(0);
  if (text == "f") return principal(1);
  if (text == "f^+" || text == "f+" || text == "inf") return limit(Side::Forward, ResidueSystem::constant(0));
  if (text == "f^-" || text == "f-") return limit(Side::Backward, ResidueSystem::constant(0));
  if (text.starts_with("f^")) {
    std::string_view rest = std::string_view(text).substr(2);
    bool neg = false;
    if (rest.starts_with('-')) {
      neg = true;
      rest.remove_prefix(1);
    }
    auto v = detail::parse_i64(rest);
    if (!v) return fail();
    return principal(neg ? -*v : *v);
  }
  for (auto [prefix, side] : {std::pair{"fwd(", Side::Forward}, std::pair{"bwd(", Side::Backward}}) {
    if (text.starts_with(prefix) && text.ends_with(')'))
      return limit(side, ResidueSystem::parse(std::string_view(text).substr(4, text.size() - 5)));
  }
  return fail();
}

/// Throws InvalidElement unless the element's residues are realizable.
inline void check_element(const EllisElement& e) {
  if (e.is_principal()) return;
  auto r = realizable(e.residues());
  if (!r.realizable)
    throw InvalidElement("residues " + e.residues().to_string() + " are not realizable: " +
                         std::to_string(r.conflict->first) + " and " +
                         std::to_string(r.conflict->second) + " disagree modulo their gcd");
}

/// Moduli at which element data is compared: P_f with tails listed up to `cap`.
inline std::vector<i64> comparison_moduli(const CascadeExpr& expr, i64 cap = 1 << 16) {
  return period_set(expr).enumerate(cap);
}

inline PointId evaluate(const EllisElement& e, const PointId& x, const CascadeExpr& expr) {
  validate_point(expr, x);
  if (e.is_principal()) return apply_power(expr, x, e.exponent());
  const PeriodResult p = period(expr, x);
  if (p.is_finite()) {
    auto r = e.residues().determine(*p.value);
    if (!r)
      throw UnderdeterminedResidue("element " + e.to_string() + " has no residue modulo " +
                                   std::to_string(*p.value));
    return apply_power(expr, x, *r);
  }
  // Aperiodic: send the catalog coordinate to its limit, then rotate copies.
  auto [mult, kind] = detail::path_multiplier(detail::view(expr), x, 0);
  PointId y = x;
  PathStep& last = y.steps.back();
  if (kind == CatalogSite::Kind::Shift2)
    last = {e.side() == Side::Forward ? PathStep::Kind::PlusInf : PathStep::Kind::MinusInf};
  else
    last = {PathStep::Kind::Inf};
  auto r = e.residues().determine(mult);
  if (!r)
    throw UnderdeterminedResidue("element " + e.to_string() + " has no residue modulo " +
                                 std::to_string(mult));
  return apply_power(expr, y, *r);
}

/// g o h, i.e. x -> g(h(x)).
inline EllisElement compose(const EllisElement& g, const EllisElement& h, const CascadeExpr& expr) {
  check_element(g);
  check_element(h);
  EllisElement out;
  if (g.is_principal() && h.is_principal()) {
    out = EllisElement::principal(checked_add(g.exponent(), h.exponent()));
  } else if (g.is_principal()) {
    out = EllisElement::limit(h.side(), h.residues().shifted(g.exponent()));
  } else if (h.is_principal()) {
    out = EllisElement::limit(g.side(), g.residues().shifted(h.exponent()));
  } else {
    out = EllisElement::limit(h.side(), g.residues().plus(h.residues(), comparison_moduli(expr)));
  }

  // The composite must act as the composition of the actions.
  for (const auto& x : enumerate_points(expr, 3)) {
    try {
      if (evaluate(out, x, expr) != evaluate(g, evaluate(h, x, expr), expr))
        throw std::logic_error("composition disagrees with pointwise composition at " +
                               to_string(x));
    } catch (const UnderdeterminedResidue&) {
    }
  }
  return out;
}

/// Inverse in E(X, f, Z). Limit elements are invertible only on all-periodic
/// presentations, where the inverse of f^p is (f^-1)^p.
inline EllisElement inverse(const EllisElement& e, const CascadeExpr& expr) {
  check_element(e);
  if (e.is_principal()) return EllisElement::principal(checked_neg(e.exponent()));
  if (!is_all_periodic(expr))
    throw NoInverse("limit element " + e.to_string() +
                    " is not injective on a presentation with aperiodic points");
  return EllisElement::limit(flip(e.side()), e.residues().negated());
}

namespace detail {

inline bool same_action(const ResidueSystem& a, const ResidueSystem& b, const PeriodSetSpec& ps,
                        i64 depth) {
  for (i64 q : ps.explicit_periods)
    if (a.determine(q) != b.determine(q)) return false;
  auto uniform_offset = [](const ResidueSystem& rs, const Family& fam) -> std::optional<i64> {
    for (const auto& r : rs.rules())
      if (!r.family || *r.family == fam) return r.offset;
    return std::nullopt;
  };
  for (const auto& t : ps.tails) {
    auto oa = uniform_offset(a, t.family);
    auto ob = uniform_offset(b, t.family);
    if (oa && ob) {
      if (*oa != *ob) return false;
      continue;
    }
    for (i64 n = t.start; n <= std::max(t.start, depth); ++n) {
      const i64 q = t.family.at(n);
      if (a.determine(q) != b.determine(q)) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Extensional equality: do g and h agree at every point? Residue data is
/// compared exactly on explicit periods and on tails sharing a uniform rule;
/// other tail periods are compared up to index `depth`.
inline bool equivalent(const EllisElement& g, const EllisElement& h, const CascadeExpr& expr,
                       i64 depth = 8) {
  const PeriodSetSpec ps = period_set(expr);
  if (!is_all_periodic(expr)) {
    if (g.is_principal() != h.is_principal()) return false;
    if (g.is_principal()) return g.exponent() == h.exponent();
    if (contains_shift2(expr) && g.side() != h.side()) return false;
  }
  return detail::same_action(g.action(), h.action(), ps, depth);
}

// ---------------------------------------------------------------------------
// E(N) = E(Z)

struct EnEzResult {
  bool equal = false;
  std::optional<EllisElement> witness;  // acts as f^-1
  std::optional<PointId> aperiodic;
};

inline EnEzResult en_equals_ez(const CascadeExpr& expr) {
  EnEzResult out;
  if (!is_all_periodic(expr)) {
    out.aperiodic = aperiodic_point(expr);
    return out;
  }
  const PeriodSetSpec ps = period_set(expr);
  ResidueSystem rs;
  for (i64 q : ps.explicit_periods) rs.set(q, q - 1);
  for (const auto& t : ps.tails) rs.add_rule({t.family, -1});
  out.equal = true;
  out.witness = EllisElement::limit(Side::Forward, rs);
  check_element(*out.witness);
  for (const auto& x : enumerate_points(expr, 6))
    if (evaluate(*out.witness, x, expr) != apply_inverse(expr, x))
      throw std::logic_error("residues n-1 do not act as the inverse at " + to_string(x));
  return out;
}

// ---------------------------------------------------------------------------
// Continuity at truncation

/// A pair (x, y) showing e is not continuous at x: x is a limit point, y is
/// within 2^-depth of x among points enumerated at `depth`, yet e(y) is
/// farther than 2^-(depth/2) from e(x).
inline std::optional<std::pair<PointId, PointId>> continuity_failure(const EllisElement& e,
                                                                     const CascadeExpr& expr,
                                                                     i64 depth = 8) {
  const auto pts = enumerate_points(expr, depth);
  const Dyadic near = Dyadic::inv_pow2(depth);
  const Dyadic tol = Dyadic::inv_pow2(depth / 2);
  for (const auto& x : pts) {
    if (cb_rank_point(expr, x) == 0) continue;
    const PointId ex = evaluate(e, x, expr);
    for (const auto& y : pts) {
      if (y == x || detail::distance_unchecked(expr, x, y) > near) continue;
      if (distance(expr, evaluate(e, y, expr), ex) > tol) return std::pair{x, y};
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Truncated semigroup tables

struct SemigroupTable {
  std::vector<std::string> labels;
  std::vector<EllisElement> elements;
  // table[i][j] = index of elements[i] o elements[j]; empty when the product
  // is a power outside the truncation.
  std::vector<std::vector<std::optional<std::size_t>>> table;
  std::vector<bool> continuous;
  bool commutative = true;
  bool distal = true;
  i64 bound = 0;        // principal exponents range over [-bound, bound] (non-distal)
  i64 period_lcm = 1;   // lcm of the periods at the truncation

  std::optional<std::size_t> index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return i;
    return std::nullopt;
  }

  /// (a b) c = a (b c) wherever both sides are defined.
  bool associative() const {
    const std::size_t n = labels.size();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        auto ab = table[a][b];
        if (!ab) continue;
        for (std::size_t c = 0; c < n; ++c) {
          auto bc = table[b][c];
          if (!bc) continue;
          auto l = table[*ab][c];
          auto r = table[a][*bc];
          if (l && r && *l != *r) return false;
        }
      }
    return true;
  }

  std::string to_string() const {
    std::size_t w = 1;
    for (const auto& l : labels) w = std::max(w, l.size());
    auto pad = [&](const std::string& s) { return s + std::string(w + 1 - s.size(), ' '); };
    std::string out = pad("o");
    for (const auto& l : labels) out += pad(l);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
      out += pad(labels[i]);
      for (std::size_t j = 0; j < labels.size(); ++j)
        out += pad(table[i][j] ? labels[*table[i][j]] : "?");
      while (!out.empty() && out.back() == ' ') out.pop_back();
      out += '\n';
    }
    return out;
  }
};

namespace detail {

inline i64 truncated_period_lcm(const CascadeExpr& expr, i64 depth) {
  std::set<i64> periods;
  for (const auto& x : enumerate_points(expr, depth)) {
    auto p = period(expr, x);
    if (p.is_finite()) periods.insert(*p.value);
  }
  i64 l = 1;
  for (i64 q : periods) {
    l = checked_lcm(l, q);
    if (l > 4096) throw Overflow("truncated semigroup too large: period lcm exceeds 4096");
  }
  return l;
}

inline std::string power_label(i64 k) {
  if (k == 0) return "id";
  if (k == 1) return "f";
  return "f^" + std::to_string(k);
}

}  // namespace detail

/// Finite picture of E(X, f, Z). Distal presentations give the cyclic group
/// of order lcm(periods at `depth`). Otherwise the table holds f^k for
/// |k| <= depth and the limit elements, one per side and residue class
/// modulo that lcm.
inline SemigroupTable truncated_semigroup(const CascadeExpr& expr, i64 depth) {
  SemigroupTable t;
  t.distal = is_all_periodic(expr);
  t.period_lcm = detail::truncated_period_lcm(expr, depth);
  const i64 L = t.period_lcm;
  if (t.distal) {
    for (i64 k = 0; k < L; ++k) {
      t.labels.push_back(detail::power_label(k));
      t.elements.push_back(EllisElement::principal(k));
      t.continuous.push_back(true);
    }
    t.table.assign(L, std::vector<std::optional<std::size_t>>(L));
    for (i64 i = 0; i < L; ++i)
      for (i64 j = 0; j < L; ++j) t.table[i][j] = static_cast<std::size_t>((i + j) % L);
    return t;
  }

  t.bound = depth;
  const bool sided = contains_shift2(expr);
  struct Key {
    bool limit;
    i64 value;  // exponent, or residue class mod L
    Side side;
  };
  std::vector<Key> keys;
  for (i64 k = -depth; k <= depth; ++k) {
    keys.push_back({false, k, Side::Forward});
    t.labels.push_back(detail::power_label(k));
    t.elements.push_back(EllisElement::principal(k));
  }
  std::vector<Side> sides = {Side::Forward};
  if (sided) sides.push_back(Side::Backward);
  for (Side s : sides) {
    for (i64 k = 0; k < L; ++k) {
      keys.push_back({true, k, s});
      std::string label = sided ? (s == Side::Forward ? "f^+" : "f^-") : "inf";
      if (L > 1) label += "[" + std::to_string(k) + "]";
      t.labels.push_back(label);
      t.elements.push_back(EllisElement::limit(s, ResidueSystem::constant(k)));
    }
  }
  auto find = [&](const Key& k) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < keys.size(); ++i)
      if (keys[i].limit == k.limit && keys[i].value == k.value && keys[i].side == k.side) return i;
    return std::nullopt;
  };
  const std::size_t n = keys.size();
  t.table.assign(n, std::vector<std::optional<std::size_t>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Key& a = keys[i];
      const Key& b = keys[j];
      if (!a.limit && !b.limit) {
        t.table[i][j] = find({false, a.value + b.value, Side::Forward});
      } else {
        // A limit factor absorbs powers into its residue; the inner side wins.
        const Side s = b.limit ? b.side : a.side;
        t.table[i][j] = find({true, floor_mod(a.value + b.value, L), s});
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    // Powers of a homeomorphism are continuous.
    t.continuous.push_back(!keys[i].limit ||
                           !continuity_failure(t.elements[i], expr, std::max<i64>(8, depth)));
  }
  for (std::size_t i = 0; i < n && t.commutative; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (t.table[i][j] && t.table[j][i] && *t.table[i][j] != *t.table[j][i]) {
        t.commutative = false;
        break;
      }
  return t;
}

// ---------------------------------------------------------------------------
// WAP and commutativity

struct WapResult {
  bool wap = true;
  // Set when not WAP: a discontinuous element, a sequence converging to
  // `limit`, the images of the sequence, and the image of the limit.
  std::optional<EllisElement> element;
  std::vector<PointId> sequence;
  PointId limit;
  std::vector<PointId> images;
  PointId limit_image;
  Dyadic mismatch;  // distance between the images' limit and limit_image
  i64 checked_depth = 0;
};

inline WapResult is_wap(const CascadeExpr& expr, i64 depth = 8) {
  WapResult out;
  out.checked_depth = depth;
  if (contains_shift2(expr)) {
    CatalogSite site;
    for (const auto& s : catalog_sites(expr))
      if (s.kind == CatalogSite::Kind::Shift2) {
        site = s;
        break;
      }
    out.wap = false;
    out.element = EllisElement::limit(Side::Forward, ResidueSystem::constant(0));
    out.limit = site.at({PathStep::Kind::MinusInf});
    out.limit_image = evaluate(*out.element, out.limit, expr);
    for (i64 k = 1; k <= depth; ++k) {
      out.sequence.push_back(site.at({PathStep::Kind::Int, -k}));
      out.images.push_back(evaluate(*out.element, out.sequence.back(), expr));
    }
    out.mismatch = distance(expr, out.images.back(), out.limit_image);
    if (out.mismatch.is_zero()) throw std::logic_error("non-WAP witness does not separate");
    return out;
  }
  // No shift2: the limit elements are continuous; confirm on representatives.
  for (Side s : {Side::Forward, Side::Backward})
    for (i64 c : {0, 1, -1}) {
      const auto e = EllisElement::limit(s, ResidueSystem::constant(c));
      if (continuity_failure(e, expr, depth))
        throw std::logic_error("limit element " + e.to_string() + " is discontinuous");
    }
  return out;
}

struct AbelianResult {
  bool abelian = true;
  std::optional<std::pair<std::string, std::string>> witness;  // labels not commuting
};

inline AbelianResult is_abelian_truncated(const CascadeExpr& expr, i64 depth) {
  const SemigroupTable t = truncated_semigroup(expr, depth);
  AbelianResult out;
  for (std::size_t i = 0; i < t.labels.size(); ++i)
    for (std::size_t j = i + 1; j < t.labels.size(); ++j)
      if (t.table[i][j] && t.table[j][i] && *t.table[i][j] != *t.table[j][i]) {
        out.abelian = false;
        out.witness = std::pair{t.labels[i], t.labels[j]};
        return out;
      }
  return out;
}

}  // namespace cascade
