#pragma once

// Residue systems: families of congruence constraints r_n (mod n), and the
// exact pairwise-compatibility test that decides whether some ultrafilter
// lies in every class nN + r_n.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cascade/arith.hpp"
#include "cascade/error.hpp"
#include "cascade/presentation.hpp"

namespace cascade {

/// r_q = offset (mod q) for every q in the family's values (n >= 0), or for
/// every positive q when `family` is empty.
struct ResidueRule {
  std::optional<Family> family;
  i64 offset = 0;

  bool applies_to(i64 q) const { return !family || family->contains(q, 0); }
  bool operator==(const ResidueRule&) const = default;
};

class ResidueSystem {
 public:
  ResidueSystem() = default;

  static ResidueSystem parse(std::string_view text);

  /// Adds the constraint r_n = r. Requires n >= 1 and 0 <= r < n.
  ResidueSystem& set(i64 n, i64 r) {
    if (n < 1) throw MalformedResidue("modulus must be positive, got " + std::to_string(n));
    if (r < 0 || r >= n)
      throw MalformedResidue("residue " + std::to_string(r) + " out of range for modulus " +
                             std::to_string(n));
    auto [it, inserted] = explicit_.emplace(n, r);
    if (!inserted && it->second != r)
      throw MalformedResidue("modulus " + std::to_string(n) + " given two residues");
    return *this;
  }

  ResidueSystem& add_rule(ResidueRule rule) {
    if (rule.family && rule.family->bounded()) {
      // A single modulus; keep it as an explicit constraint.
      const i64 q = rule.family->at(0);
      return set(q, floor_mod(rule.offset, q));
    }
    if (std::find(rules_.begin(), rules_.end(), rule) == rules_.end()) rules_.push_back(rule);
    return *this;
  }

  /// r_q = c (mod q) for every q.
  static ResidueSystem constant(i64 c) {
    ResidueSystem rs;
    rs.add_rule({std::nullopt, c});
    return rs;
  }

  const std::map<i64, i64>& explicit_constraints() const { return explicit_; }
  const std::vector<ResidueRule>& rules() const { return rules_; }
  bool empty() const { return explicit_.empty() && rules_.empty(); }

  /// The residue mod q forced by the system, if any.
  std::optional<i64> determine(i64 q) const;

  /// Residues determined by both systems, added. Moduli in `extra` are
  /// included when both systems determine them.
  ResidueSystem plus(const ResidueSystem& o, const std::vector<i64>& extra = {}) const;
  ResidueSystem negated() const;
  ResidueSystem shifted(i64 m) const;

  std::string to_string() const;

  bool operator==(const ResidueSystem&) const = default;

 private:
  std::map<i64, i64> explicit_;
  std::vector<ResidueRule> rules_;
};

namespace detail {

/// Accumulates congruences x = r (mod m); becomes empty on a conflict.
struct CrtAccumulator {
  std::optional<std::pair<i64, i64>> state = std::pair<i64, i64>{0, 1};  // (residue, modulus)

  void add(i64 r, i64 m) {
    if (!state) return;
    auto [r0, m0] = *state;
    i64 g = 0;
    const i64 inv = inverse_part(m0, m, g);
    r = floor_mod(r, m);
    if ((r - r0) % g != 0) {
      state.reset();
      return;
    }
    const i64 step = m / g;
    const i64 t = mul_mod(floor_mod((r - r0) / g, step), floor_mod(inv, step), step);
    const i64 lcm = checked_mul(m0, step);
    state = std::pair<i64, i64>{
        floor_mod(static_cast<i64>((static_cast<__int128>(m0) * t + r0) % lcm), lcm), lcm};
  }
};

/// Distinct values gcd(q, s) for s ranging over the rule's moduli.
inline std::vector<i64> gcd_profile(const ResidueRule& rule, i64 q) {
  std::vector<i64> out;
  if (!rule.family) return {q};
  const Family& f = *rule.family;
  auto push = [&](i64 g) {
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
  };
  if (f.kind == Family::Kind::Linear) {
    // (a*n + b) mod q is periodic in n with period q / gcd(a, q).
    const i64 cycle = q / std::gcd(f.a, q);
    const i64 limit = std::min<i64>(cycle, 1 << 20);
    for (i64 n = f.b == 0 ? 1 : 0, i = 0; i < limit; ++n, ++i)
      push(std::gcd(q, floor_mod(static_cast<i64>((static_cast<__int128>(f.a) * n + f.b) % q), q)));
  } else if (f.kind == Family::Kind::Geometric) {
    for (i64 n = 0; n <= 64; ++n) push(std::gcd(q, mul_mod(f.a, pow_mod(f.b, n, q), q)));
  } else {
    push(std::gcd(q, f.a));
  }
  return out;
}

}  // namespace detail

inline std::optional<i64> ResidueSystem::determine(i64 q) const {
  if (q < 1) return std::nullopt;
  if (auto it = explicit_.find(q); it != explicit_.end()) return it->second;
  for (const auto& rule : rules_)
    if (rule.applies_to(q)) return floor_mod(rule.offset, q);
  detail::CrtAccumulator acc;
  for (const auto& [n, r] : explicit_) {
    const i64 g = std::gcd(n, q);
    acc.add(r % g, g);
  }
  for (const auto& rule : rules_)
    for (i64 g : detail::gcd_profile(rule, q)) acc.add(floor_mod(rule.offset, g), g);
  if (acc.state && acc.state->second == q) return acc.state->first;
  return std::nullopt;
}

inline ResidueSystem ResidueSystem::plus(const ResidueSystem& o,
                                         const std::vector<i64>& extra) const {
  ResidueSystem out;
  std::vector<i64> moduli = extra;
  for (const auto& [n, r] : explicit_) moduli.push_back(n);
  for (const auto& [n, r] : o.explicit_) moduli.push_back(n);
  std::sort(moduli.begin(), moduli.end());
  moduli.erase(std::unique(moduli.begin(), moduli.end()), moduli.end());
  for (i64 n : moduli) {
    auto a = determine(n);
    auto b = o.determine(n);
    if (a && b) out.set(n, (*a + *b) % n);
  }
  for (const auto& ra : rules_) {
    for (const auto& rb : o.rules_) {
      std::optional<Family> fam;
      if (!ra.family)
        fam = rb.family;
      else if (!rb.family || *ra.family == *rb.family)
        fam = ra.family;
      else
        continue;
      out.add_rule({fam, checked_add(ra.offset, rb.offset)});
    }
  }
  return out;
}

inline ResidueSystem ResidueSystem::negated() const {
  ResidueSystem out;
  for (const auto& [n, r] : explicit_) out.set(n, floor_mod(-r, n));
  for (const auto& rule : rules_) out.add_rule({rule.family, checked_neg(rule.offset)});
  return out;
}

inline ResidueSystem ResidueSystem::shifted(i64 m) const {
  ResidueSystem out;
  for (const auto& [n, r] : explicit_) out.set(n, floor_mod(checked_add(r, floor_mod(m, n)), n));
  for (const auto& rule : rules_) out.add_rule({rule.family, checked_add(rule.offset, m)});
  return out;
}

inline std::string ResidueSystem::to_string() const {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += ",";
  };
  for (const auto& [n, r] : explicit_) {
    sep();
    out += std::to_string(n) + ":" + std::to_string(r);
  }
  for (const auto& rule : rules_) {
    sep();
    const std::string lhs = rule.family ? rule.family->to_string() : "n";
    out += lhs + ":";
    if (rule.offset < 0)
      out += lhs + "-" + std::to_string(-rule.offset);
    else
      out += std::to_string(rule.offset);
  }
  return out;
}

namespace detail {

inline std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

/// nat | nat*n+nat | nat^n | nat*nat^n
inline std::optional<Family> parse_formula_text(std::string_view s) {
  auto nat = [](std::string_view t) { return parse_i64(t); };
  if (auto v = nat(s)) return Family::constant(*v);
  if (s.ends_with("^n")) {
    std::string_view body = s.substr(0, s.size() - 2);
    const auto star = body.find('*');
    if (star == std::string_view::npos) {
      if (auto r = nat(body)) return Family::geometric(1, *r);
      return std::nullopt;
    }
    auto a = nat(body.substr(0, star));
    auto r = nat(body.substr(star + 1));
    if (a && r) return Family::geometric(*a, *r);
    return std::nullopt;
  }
  const auto pos = s.find("*n+");
  if (pos != std::string_view::npos) {
    auto a = nat(s.substr(0, pos));
    auto b = nat(s.substr(pos + 3));
    if (a && b) return Family::linear(*a, *b);
  }
  return std::nullopt;
}

}  // namespace detail

/// Items separated by commas: "n:r" for one modulus, "F:F-c", "F:F+c", "F:c"
/// for every modulus F(n), and "n:..." with the literal variable n for every
/// modulus.
inline ResidueSystem ResidueSystem::parse(std::string_view text) {
  const std::string s = detail::strip_spaces(text);
  ResidueSystem rs;
  if (s.empty() || s == "{}") return rs;
  std::size_t start = 0;
  std::size_t item_no = 0;
  for (;;) {
    ++item_no;
    const std::size_t comma = s.find(',', start);
    const std::string item = s.substr(start, comma == std::string::npos ? comma : comma - start);
    auto fail = [&](const std::string& why) -> ParseError {
      return ParseError("residue item " + std::to_string(item_no) + " '" + item + "': " + why, 1,
                        start + 1);
    };
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw fail("expected modulus:residue");
    const std::string lhs = item.substr(0, colon);
    std::string rhs = item.substr(colon + 1);

    std::optional<Family> fam;
    const bool universal = lhs == "n";
    if (!universal) {
      fam = detail::parse_formula_text(lhs);
      if (!fam) throw fail("bad modulus '" + lhs + "'");
    }
    auto signed_int = [&](std::string_view t) -> std::optional<i64> {
      bool neg = false;
      if (t.starts_with('-') || t.starts_with('+')) {
        neg = t[0] == '-';
        t.remove_prefix(1);
      }
      auto v = detail::parse_i64(t);
      if (!v) return std::nullopt;
      return neg ? -*v : *v;
    };
    const bool single = !universal && fam->kind == Family::Kind::Const;
    i64 offset = 0;
    bool relative = false;
    if (rhs == lhs && !single) {
      relative = true;
    } else if (rhs.size() > lhs.size() && rhs.starts_with(lhs) &&
               (rhs[lhs.size()] == '+' || rhs[lhs.size()] == '-')) {
      auto v = signed_int(std::string_view(rhs).substr(lhs.size()));
      if (!v) throw fail("bad offset in '" + rhs + "'");
      offset = *v;
      relative = true;
    } else {
      auto v = signed_int(rhs);
      if (!v) throw fail("bad residue '" + rhs + "'");
      offset = *v;
    }

    if (single) {
      rs.set(fam->a, relative && fam->a >= 1 ? floor_mod(offset, fam->a) : offset);
    } else {
      if (fam && fam->kind == Family::Kind::Geometric && (fam->a < 1 || fam->b < 1))
        throw fail("geometric modulus needs positive coefficient and ratio");
      if (fam && fam->kind == Family::Kind::Linear && fam->a == 0 && fam->b == 0)
        throw fail("modulus must be positive");
      rs.add_rule({fam, offset});
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return rs;
}

// ---------------------------------------------------------------------------
// Realizability

struct RealizabilityResult {
  bool realizable = false;
  std::optional<i64> witness;                     // least solution, finite systems only
  std::optional<std::pair<i64, i64>> conflict;   // moduli (n, m) with r_n != r_m mod gcd
};

namespace detail {

// A set of moduli in one of the shapes a constraint can cover.
struct ModSet {
  enum class Kind { Single, Linear, Geometric, All } kind;
  i64 a = 0;  // Single: the modulus. Linear: slope. Geometric: coefficient.
  i64 b = 0;  // Linear: intercept. Geometric: ratio.
  i64 offset = 0;

  static ModSet from_rule(const ResidueRule& r) {
    if (!r.family) return {Kind::All, 0, 0, r.offset};
    const Family& f = *r.family;
    switch (f.kind) {
      case Family::Kind::Const:
        return {Kind::Single, f.a, 0, r.offset};
      case Family::Kind::Linear:
        if (f.a == 0) return {Kind::Single, f.b, 0, r.offset};
        return {Kind::Linear, f.a, f.b, r.offset};
      case Family::Kind::Geometric:
        if (f.b == 1) return {Kind::Single, f.a, 0, r.offset};
        return {Kind::Geometric, f.a, f.b, r.offset};
    }
    return {Kind::All, 0, 0, r.offset};
  }

  bool finite_primes() const { return kind == Kind::Single || kind == Kind::Geometric; }

  /// Least member divisible by m, if any.
  std::optional<i64> least_multiple_of(i64 m) const {
    switch (kind) {
      case Kind::Single:
        if (a >= 1 && a % m == 0) return a;
        return std::nullopt;
      case Kind::All:
        return m;
      case Kind::Linear: {
        // Solve a*n + b = 0 (mod m) for the least n >= 0 giving a positive value.
        i64 g = 0;
        const i64 inv = inverse_part(floor_mod(a, m), m, g);
        if (floor_mod(b, m) % g != 0) return std::nullopt;
        const i64 step = m / g;
        i64 n = mul_mod(floor_mod(-(b / g), step), floor_mod(inv, step), step);
        if (checked_add(checked_mul(a, n), b) < 1) n = checked_add(n, step);
        return checked_add(checked_mul(a, n), b);
      }
      case Kind::Geometric:
        for (i64 n = 0; n <= 62; ++n) {
          i64 v = 0;
          try {
            v = checked_mul(a, checked_pow(b, n));
          } catch (const Overflow&) {
            return std::nullopt;
          }
          if (v % m == 0) return v;
        }
        return std::nullopt;
    }
    return std::nullopt;
  }

  std::vector<i64> primes() const;
};

inline std::vector<i64> prime_factors(i64 n) {
  if (n < 2) return {};
  std::vector<i64> out;
  for (i64 p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    out.push_back(p);
    while (n % p == 0) n /= p;
  }
  if (n > 1) out.push_back(n);
  return out;
}

inline std::vector<i64> ModSet::primes() const {
  std::vector<i64> out = prime_factors(a);
  if (kind == Kind::Geometric)
    for (i64 p : prime_factors(b))
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  std::sort(out.begin(), out.end());
  return out;
}

inline bool is_prime(i64 n) {
  auto f = prime_factors(n);
  return f.size() == 1 && f.front() == n;
}

inline i64 valuation(i64 n, i64 p) {
  if (n == 0) return 63;
  i64 e = 0;
  while (n % p == 0) {
    n /= p;
    ++e;
  }
  return e;
}

// Two constraint sets are compatible iff no prime power p^e with e = v_p(delta)+1
// divides a member of each.
inline std::optional<std::pair<i64, i64>> conflict_between(const ModSet& x, const ModSet& y) {
  const i64 delta = x.offset > y.offset ? x.offset - y.offset : y.offset - x.offset;
  if (delta == 0) return std::nullopt;
  std::vector<i64> primes;
  if (x.finite_primes() || y.finite_primes()) {
    primes = (x.finite_primes() ? x : y).primes();
  } else {
    // Both unbounded: a prime coprime to delta and both slopes is always hit.
    i64 p = 2;
    for (;; ++p) {
      if (!is_prime(p)) continue;
      if (delta % p != 0 && (x.kind != ModSet::Kind::Linear || x.a % p != 0) &&
          (y.kind != ModSet::Kind::Linear || y.a % p != 0))
        break;
    }
    primes = {p};
  }
  for (i64 p : primes) {
    const i64 e = valuation(delta, p) + 1;
    i64 m = 1;
    try {
      m = checked_pow(p, e);
    } catch (const Overflow&) {
      continue;
    }
    auto qx = x.least_multiple_of(m);
    auto qy = y.least_multiple_of(m);
    if (qx && qy) return std::pair<i64, i64>{std::min(*qx, *qy), std::max(*qx, *qy)};
  }
  return std::nullopt;
}

}  // namespace detail

/// Decides whether some ultrafilter contains every class nN + r_n. Exact for
/// explicit constraints and for the supported rule shapes.
inline RealizabilityResult realizable(const ResidueSystem& rs) {
  using detail::ModSet;
  RealizabilityResult out;
  std::vector<ModSet> sets;
  for (const auto& [n, r] : rs.explicit_constraints())
    sets.push_back({ModSet::Kind::Single, n, 0, r});
  for (const auto& rule : rs.rules()) sets.push_back(ModSet::from_rule(rule));

  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      if (auto c = detail::conflict_between(sets[i], sets[j])) {
        out.conflict = c;
        return out;
      }
    }
  }
  // A single rule is compatible with itself: r_q - r_q' is c - c = 0.
  out.realizable = true;
  if (rs.rules().empty()) {
    detail::CrtAccumulator acc;
    for (const auto& [n, r] : rs.explicit_constraints()) acc.add(r, n);
    out.witness = acc.state->first;
  }
  return out;
}

}  // namespace cascade
