#pragma once

// Orbits, periods and the symbolic period set of a presented cascade, plus
// the maximal-rank set and the minimal sets.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "cascade/presentation.hpp"

namespace cascade {

struct PeriodResult {
  std::optional<i64> value;  // nullopt: aperiodic

  static PeriodResult finite(i64 k) { return {k}; }
  static PeriodResult aperiodic() { return {}; }

  bool is_finite() const { return value.has_value(); }
  std::string to_string() const { return value ? std::to_string(*value) : "aperiodic"; }
  bool operator==(const PeriodResult&) const = default;
};

namespace detail {

inline PeriodResult period_at(View v, const PointId& x, std::size_t pos) {
  using K = PathStep::Kind;
  return dispatch(v, [&](const auto& n) -> PeriodResult {
    using T = std::decay_t<decltype(n)>;
    const PathStep& s = x.steps[pos];
    if constexpr (std::is_same_v<T, CycleNode>) {
      return PeriodResult::finite(n.k);
    } else if constexpr (std::is_same_v<T, SumNode>) {
      return period_at(view(s.kind == K::Left ? n.left : n.right), x, pos + 1);
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      auto base = period_at(view(n.base), x, pos + 1);
      if (!base.is_finite()) return base;
      return PeriodResult::finite(checked_mul(*base.value, n.copies));
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      if (s.kind == K::Star) return PeriodResult::finite(1);
      return period_at(piece_view(n, s.value), x, pos + 1);
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      return s.kind == K::Int ? PeriodResult::aperiodic() : PeriodResult::finite(1);
    } else {
      return s.kind == K::Index ? PeriodResult::aperiodic() : PeriodResult::finite(1);
    }
  });
}

inline bool has_catalog(View v) {
  return dispatch(v, [&](const auto& n) -> bool {
    using T = std::decay_t<decltype(n)>;
    if constexpr (std::is_same_v<T, CycleNode>) {
      return false;
    } else if constexpr (std::is_same_v<T, SumNode>) {
      return has_catalog(view(n.left)) || has_catalog(view(n.right));
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      return has_catalog(view(n.base));
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      for (const auto& h : n.head)
        if (has_catalog(view(h))) return true;
      if (const auto* rep = std::get_if<CascadeExpr>(&n.tail)) return has_catalog(view(*rep));
      return false;
    } else {
      return true;
    }
  });
}

inline bool has_shift2(View v) {
  return dispatch(v, [&](const auto& n) -> bool {
    using T = std::decay_t<decltype(n)>;
    if constexpr (std::is_same_v<T, SumNode>) {
      return has_shift2(view(n.left)) || has_shift2(view(n.right));
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      return has_shift2(view(n.base));
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      for (const auto& h : n.head)
        if (has_shift2(view(h))) return true;
      if (const auto* rep = std::get_if<CascadeExpr>(&n.tail)) return has_shift2(view(*rep));
      return false;
    } else {
      return std::is_same_v<T, Shift2Node>;
    }
  });
}

}  // namespace detail

/// Least k >= 1 with f^k(x) = x, read off the presentation.
inline PeriodResult period(const CascadeExpr& expr, const PointId& x) {
  validate_point(expr, x);
  return detail::period_at(detail::view(expr), x, 0);
}

/// True iff the presentation uses neither shift2 nor ishift.
inline bool is_all_periodic(const CascadeExpr& expr) {
  return !detail::has_catalog(detail::view(expr));
}

inline bool contains_shift2(const CascadeExpr& expr) {
  return detail::has_shift2(detail::view(expr));
}

/// First min(bound, period) forward iterates of x, starting with x.
inline std::vector<PointId> orbit(const CascadeExpr& expr, const PointId& x, i64 bound) {
  validate_point(expr, x);
  std::vector<PointId> out;
  PointId y = x;
  for (i64 i = 0; i < bound; ++i) {
    if (i > 0 && y == x) break;
    out.push_back(y);
    detail::forward(detail::view(expr), y, 0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Period sets

struct PeriodTail {
  Family family;  // periods family.at(n) for n >= start
  i64 start = 0;
  bool operator==(const PeriodTail&) const = default;
  auto operator<=>(const PeriodTail& o) const {
    return std::tie(family.kind, family.a, family.b, start) <=>
           std::tie(o.family.kind, o.family.a, o.family.b, o.start);
  }
};

/// Symbolic set of periods: finitely many explicit values plus unbounded tails.
struct PeriodSetSpec {
  std::set<i64> explicit_periods;
  std::vector<PeriodTail> tails;
  bool partial = false;  // aperiodic points exist and are not represented

  bool contains(i64 q) const {
    if (explicit_periods.count(q)) return true;
    return std::any_of(tails.begin(), tails.end(),
                       [&](const PeriodTail& t) { return t.family.contains(q, t.start); });
  }

  bool is_finite() const { return tails.empty(); }

  /// All members <= bound, ascending.
  std::vector<i64> enumerate(i64 bound) const {
    std::set<i64> out;
    for (i64 q : explicit_periods)
      if (q <= bound) out.insert(q);
    for (const auto& t : tails) {
      for (i64 n = t.start;; ++n) {
        i64 q = 0;
        try {
          q = t.family.at(n);
        } catch (const Overflow&) {
          break;
        }
        if (q > bound) break;
        out.insert(q);
      }
    }
    return {out.begin(), out.end()};
  }

  std::string to_string() const {
    std::string out = "{";
    bool first = true;
    for (i64 q : explicit_periods) {
      if (!first) out += ", ";
      first = false;
      out += std::to_string(q);
    }
    for (const auto& t : tails) {
      if (!first) out += ", ";
      first = false;
      out += t.family.to_string() + " (n>=" + std::to_string(t.start) + ")";
    }
    out += "}";
    if (partial) out += " partial";
    return out;
  }
};

namespace detail {

inline void add_tail(PeriodSetSpec& out, const Family& fam, i64 start) {
  if (fam.bounded()) {
    out.explicit_periods.insert(fam.at(start));
    return;
  }
  PeriodTail t{fam, start};
  if (std::find(out.tails.begin(), out.tails.end(), t) == out.tails.end()) out.tails.push_back(t);
}

inline void collect_periods(View v, i64 mult, PeriodSetSpec& out) {
  dispatch(v, [&](const auto& n) {
    using T = std::decay_t<decltype(n)>;
    if constexpr (std::is_same_v<T, CycleNode>) {
      out.explicit_periods.insert(checked_mul(n.k, mult));
    } else if constexpr (std::is_same_v<T, SumNode>) {
      collect_periods(view(n.left), mult, out);
      collect_periods(view(n.right), mult, out);
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      collect_periods(view(n.base), checked_mul(mult, n.copies), out);
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      out.explicit_periods.insert(mult);
      for (const auto& h : n.head) collect_periods(view(h), mult, out);
      if (const auto* fam = std::get_if<Family>(&n.tail))
        add_tail(out, fam->scaled(mult), n.first_tail_index());
      else
        collect_periods(view(std::get<CascadeExpr>(n.tail)), mult, out);
    } else {
      out.explicit_periods.insert(mult);
      out.partial = true;
    }
  });
}

}  // namespace detail

inline PeriodSetSpec period_set(const CascadeExpr& expr) {
  PeriodSetSpec out;
  detail::collect_periods(detail::view(expr), 1, out);
  std::sort(out.tails.begin(), out.tails.end());
  // Drop explicit values already produced by a tail.
  for (auto it = out.explicit_periods.begin(); it != out.explicit_periods.end();) {
    const i64 q = *it;
    const bool in_tail = std::any_of(out.tails.begin(), out.tails.end(), [&](const PeriodTail& t) {
      return t.family.contains(q, t.start);
    });
    it = in_tail ? out.explicit_periods.erase(it) : std::next(it);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Catalog components

/// Where a shift2 or ishift sits in the presentation.
struct CatalogSite {
  enum class Kind { Shift2, IShift };
  Kind kind;
  PointId prefix;       // path to the component; append one step to address a point
  i64 scale = 0;        // the component's distances are 2^-(scale + ...)
  i64 multiplier = 1;   // period of its limit points

  PointId at(PathStep s) const {
    PointId p = prefix;
    p.steps.push_back(s);
    return p;
  }
};

namespace detail {

// Depth-first, left to right; for a rep tail only its first piece is visited.
inline void find_sites(View v, PointId& prefix, i64 scale, i64 mult, std::vector<CatalogSite>& out,
                       std::size_t limit) {
  using K = PathStep::Kind;
  if (out.size() >= limit) return;
  dispatch(v, [&](const auto& n) {
    using T = std::decay_t<decltype(n)>;
    if constexpr (std::is_same_v<T, CycleNode>) {
    } else if constexpr (std::is_same_v<T, SumNode>) {
      prefix.steps.push_back({K::Left});
      find_sites(view(n.left), prefix, scale, mult, out, limit);
      prefix.steps.back() = {K::Right};
      find_sites(view(n.right), prefix, scale, mult, out, limit);
      prefix.steps.pop_back();
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      prefix.steps.push_back({K::Copy, 0});
      find_sites(view(n.base), prefix, scale, checked_mul(mult, n.copies), out, limit);
      prefix.steps.pop_back();
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      const i64 last = n.first_tail_index() + (std::holds_alternative<CascadeExpr>(n.tail) ? 0 : -1);
      for (i64 i = 0; i <= last; ++i) {
        prefix.steps.push_back({K::Piece, i});
        find_sites(piece_view(n, i), prefix, scale + i + 1, mult, out, limit);
        prefix.steps.pop_back();
      }
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      out.push_back({CatalogSite::Kind::Shift2, prefix, scale, mult});
    } else {
      out.push_back({CatalogSite::Kind::IShift, prefix, scale, mult});
    }
  });
}

// Product of the copy counts along x's path, and whether x ends in a catalog component.
inline std::pair<i64, std::optional<CatalogSite::Kind>> path_multiplier(View v, const PointId& x,
                                                                        std::size_t pos) {
  using K = PathStep::Kind;
  return dispatch(v, [&](const auto& n) -> std::pair<i64, std::optional<CatalogSite::Kind>> {
    using T = std::decay_t<decltype(n)>;
    const PathStep& s = x.steps[pos];
    if constexpr (std::is_same_v<T, CycleNode>) {
      return {1, std::nullopt};
    } else if constexpr (std::is_same_v<T, SumNode>) {
      return path_multiplier(view(s.kind == K::Left ? n.left : n.right), x, pos + 1);
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      auto r = path_multiplier(view(n.base), x, pos + 1);
      r.first = checked_mul(r.first, n.copies);
      return r;
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      if (s.kind == K::Star) return {1, std::nullopt};
      return path_multiplier(piece_view(n, s.value), x, pos + 1);
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      return {1, CatalogSite::Kind::Shift2};
    } else {
      return {1, CatalogSite::Kind::IShift};
    }
  });
}

}  // namespace detail

/// Catalog components reachable without descending into tail pieces beyond the first.
inline std::vector<CatalogSite> catalog_sites(const CascadeExpr& expr, std::size_t limit = 64) {
  std::vector<CatalogSite> out;
  PointId prefix;
  detail::find_sites(detail::view(expr), prefix, 0, 1, out, limit);
  return out;
}

inline std::optional<CatalogSite> first_catalog_site(const CascadeExpr& expr) {
  auto sites = catalog_sites(expr, 1);
  if (sites.empty()) return std::nullopt;
  return sites.front();
}

/// An aperiodic point, if one exists.
inline std::optional<PointId> aperiodic_point(const CascadeExpr& expr) {
  auto site = first_catalog_site(expr);
  if (!site) return std::nullopt;
  if (site->kind == CatalogSite::Kind::Shift2) return site->at({PathStep::Kind::Int, 0});
  return site->at({PathStep::Kind::Index, 0});
}

// ---------------------------------------------------------------------------
// Maximal rank set

namespace detail {

inline void collect_rank(View v, i64 r, PointId& prefix, std::vector<PointId>& out) {
  using K = PathStep::Kind;
  auto emit = [&](PathStep s) {
    prefix.steps.push_back(s);
    out.push_back(prefix);
    prefix.steps.pop_back();
  };
  dispatch(v, [&](const auto& n) {
    using T = std::decay_t<decltype(n)>;
    if constexpr (std::is_same_v<T, CycleNode>) {
      if (r == 0)
        for (i64 i = 0; i < n.k; ++i) emit({K::Pos, i});
    } else if constexpr (std::is_same_v<T, SumNode>) {
      prefix.steps.push_back({K::Left});
      collect_rank(view(n.left), r, prefix, out);
      prefix.steps.back() = {K::Right};
      collect_rank(view(n.right), r, prefix, out);
      prefix.steps.pop_back();
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      for (i64 j = 0; j < n.copies; ++j) {
        prefix.steps.push_back({K::Copy, j});
        collect_rank(view(n.base), r, prefix, out);
        prefix.steps.pop_back();
      }
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      // Tail pieces have rank below the star, and r is at least the star's rank here.
      for (std::size_t i = 0; i < n.head.size(); ++i) {
        prefix.steps.push_back({K::Piece, static_cast<i64>(i)});
        collect_rank(view(n.head[i]), r, prefix, out);
        prefix.steps.pop_back();
      }
      if (star_rank(n) == r) emit({K::Star});
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      if (r == 1) {
        emit({K::MinusInf});
        emit({K::PlusInf});
      }
    } else {
      if (r == 1) emit({K::Inf});
    }
  });
}

}  // namespace detail

/// Points of maximal Cantor-Bendixson rank. Checks that the set is mapped onto
/// itself and consists of periodic points.
inline std::vector<PointId> max_rank_set(const CascadeExpr& expr) {
  std::vector<PointId> out;
  PointId prefix;
  const i64 r = max_cb_rank(expr);
  detail::collect_rank(detail::view(expr), r, prefix, out);
  std::set<PointId> members(out.begin(), out.end());
  std::set<PointId> image;
  for (const auto& x : out) {
    if (!period(expr, x).is_finite()) throw std::logic_error("maximal-rank point is not periodic");
    image.insert(apply_map(expr, x));
  }
  if (image != members) throw std::logic_error("maximal-rank set is not invariant");
  return out;
}

// ---------------------------------------------------------------------------
// Minimal sets

/// A family of periodic orbits. `representative` addresses one point of the
/// orbit; each variable is a tower piece index (at a step position) that ranges
/// over all n >= its first value, giving one orbit per choice.
struct OrbitFamily {
  PointId representative;
  struct Variable {
    std::size_t step;
    i64 first;
  };
  std::vector<Variable> variables;
  std::string period;  // period as a number, or a formula in the innermost variable n

  /// e.g. "orbit(p{n>=1}.0) period 2^n"
  std::string to_string() const {
    std::string out = "orbit(";
    for (std::size_t i = 0; i < representative.steps.size(); ++i) {
      if (i) out += '.';
      auto var = std::find_if(variables.begin(), variables.end(),
                              [&](const Variable& v) { return v.step == i; });
      if (var != variables.end())
        out += "p{n>=" + std::to_string(var->first) + "}";
      else
        out += cascade::to_string(PointId{{representative.steps[i]}});
    }
    return out + ") period " + period;
  }
};

namespace detail {

inline void gen_orbits(View v, PointId& prefix, std::vector<OrbitFamily::Variable>& vars, i64 mult,
                       std::vector<OrbitFamily>& out) {
  using K = PathStep::Kind;
  auto emit = [&](PathStep s, std::string per) {
    prefix.steps.push_back(s);
    out.push_back({prefix, vars, std::move(per)});
    prefix.steps.pop_back();
  };
  dispatch(v, [&](const auto& n) {
    using T = std::decay_t<decltype(n)>;
    if constexpr (std::is_same_v<T, CycleNode>) {
      emit({K::Pos, 0}, std::to_string(checked_mul(n.k, mult)));
    } else if constexpr (std::is_same_v<T, SumNode>) {
      prefix.steps.push_back({K::Left});
      gen_orbits(view(n.left), prefix, vars, mult, out);
      prefix.steps.back() = {K::Right};
      gen_orbits(view(n.right), prefix, vars, mult, out);
      prefix.steps.pop_back();
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      prefix.steps.push_back({K::Copy, 0});
      gen_orbits(view(n.base), prefix, vars, checked_mul(mult, n.copies), out);
      prefix.steps.pop_back();
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      for (std::size_t i = 0; i < n.head.size(); ++i) {
        prefix.steps.push_back({K::Piece, static_cast<i64>(i)});
        gen_orbits(view(n.head[i]), prefix, vars, mult, out);
        prefix.steps.pop_back();
      }
      const i64 h = n.first_tail_index();
      prefix.steps.push_back({K::Piece, h});
      vars.push_back({prefix.steps.size() - 1, h});
      if (const auto* fam = std::get_if<Family>(&n.tail)) {
        prefix.steps.push_back({K::Pos, 0});
        out.push_back({prefix, vars, fam->scaled(mult).to_string()});
        prefix.steps.pop_back();
      } else {
        gen_orbits(view(std::get<CascadeExpr>(n.tail)), prefix, vars, mult, out);
      }
      vars.pop_back();
      prefix.steps.pop_back();
      emit({K::Star}, std::to_string(mult));
    } else if constexpr (std::is_same_v<T, Shift2Node>) {
      emit({K::MinusInf}, std::to_string(mult));
      emit({K::PlusInf}, std::to_string(mult));
    } else {
      emit({K::Inf}, std::to_string(mult));
    }
  });
}

inline void instantiate_rec(const CascadeExpr& expr, const OrbitFamily& fam, std::size_t var,
                            i64 depth, PointId& point, std::vector<std::vector<PointId>>& out) {
  if (var == fam.variables.size()) {
    const PeriodResult p = period(expr, point);
    out.push_back(orbit(expr, point, *p.value));
    return;
  }
  const auto& v = fam.variables[var];
  for (i64 i = v.first; i <= std::max(depth, v.first); ++i) {
    point.steps[v.step].value = i;
    instantiate_rec(expr, fam, var + 1, depth, point, out);
  }
}

}  // namespace detail

/// Every minimal set, as symbolic orbit families. Each instance at depth 4 is
/// checked to be invariant with no proper invariant subset, and the instances
/// partition the periodic points enumerated at that depth.
inline std::vector<OrbitFamily> minimal_sets(const CascadeExpr& expr);

/// The concrete orbits of a family with all piece indices at most `depth`.
inline std::vector<std::vector<PointId>> instantiate(const CascadeExpr& expr,
                                                     const OrbitFamily& fam, i64 depth) {
  std::vector<std::vector<PointId>> out;
  PointId point = fam.representative;
  detail::instantiate_rec(expr, fam, 0, depth, point, out);
  return out;
}

inline std::vector<OrbitFamily> minimal_sets(const CascadeExpr& expr) {
  std::vector<OrbitFamily> out;
  PointId prefix;
  std::vector<OrbitFamily::Variable> vars;
  detail::gen_orbits(detail::view(expr), prefix, vars, 1, out);

  constexpr i64 kCheckDepth = 4;
  std::map<PointId, int> cover;
  for (const auto& fam : out) {
    for (const auto& orb : instantiate(expr, fam, kCheckDepth)) {
      const std::set<PointId> s(orb.begin(), orb.end());
      std::set<PointId> image;
      for (const auto& x : orb) {
        image.insert(apply_map(expr, x));
        // Each point's orbit is all of s, so no proper invariant subset exists.
        if (orbit(expr, x, static_cast<i64>(orb.size()) + 1).size() != orb.size())
          throw std::logic_error("orbit family instance is not minimal");
      }
      if (image != s) throw std::logic_error("orbit family instance is not invariant");
      for (const auto& x : orb) ++cover[x];
    }
  }
  for (const auto& x : enumerate_points(expr, kCheckDepth)) {
    if (!period(expr, x).is_finite()) continue;
    auto it = cover.find(x);
    if (it == cover.end() || it->second != 1)
      throw std::logic_error("orbit families do not partition the periodic points");
  }
  return out;
}

}  // namespace cascade
