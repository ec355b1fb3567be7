#pragma once

// Uniform return bounds l(eps), equicontinuity moduli delta(eps), and a
// bounded search for equicontinuity failures.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

#include "cascade/dynamics.hpp"

namespace cascade {

struct CoverEntry {
  PointId center;
  i64 period = 1;
  Dyadic radius;  // 0 for an isolated point
};

/// d(x, f^{n l}(x)) < epsilon for every x and n.
struct UniformBound {
  Dyadic epsilon;
  i64 l = 1;
  std::vector<CoverEntry> covering;
};

namespace detail {

// Blocks of diameter below eps contribute nothing; a block at scale 2^-e has
// diameter at most 2^-e.
inline void bound_rec(const CascadeExpr& expr, View v, PointId& prefix, i64 scale, i64 mult,
                      const Dyadic& eps, i64& l, std::vector<CoverEntry>& cover) {
  using K = PathStep::Kind;
  if (Dyadic::inv_pow2(scale) < eps) {
    std::vector<PointId> pts;
    PointId p = prefix;
    enumerate(v, 0, p, pts);
    cover.push_back({pts.front(), *period(expr, pts.front()).value, Dyadic::inv_pow2(scale)});
    return;
  }
  dispatch(v, [&](const auto& n) {
    using T = std::decay_t<decltype(n)>;
    if constexpr (std::is_same_v<T, CycleNode>) {
      l = checked_lcm(l, checked_mul(n.k, mult));
      for (i64 i = 0; i < n.k; ++i) {
        prefix.steps.push_back({K::Pos, i});
        cover.push_back({prefix, checked_mul(n.k, mult), Dyadic::zero()});
        prefix.steps.pop_back();
      }
    } else if constexpr (std::is_same_v<T, SumNode>) {
      prefix.steps.push_back({K::Left});
      bound_rec(expr, view(n.left), prefix, scale, mult, eps, l, cover);
      prefix.steps.back() = {K::Right};
      bound_rec(expr, view(n.right), prefix, scale, mult, eps, l, cover);
      prefix.steps.pop_back();
    } else if constexpr (std::is_same_v<T, CycleOfNode>) {
      for (i64 j = 0; j < n.copies; ++j) {
        prefix.steps.push_back({K::Copy, j});
        bound_rec(expr, view(n.base), prefix, scale, checked_mul(mult, n.copies), eps, l, cover);
        prefix.steps.pop_back();
      }
    } else if constexpr (std::is_same_v<T, TowerNode>) {
      // Piece i lies at scale 2^-(scale+i+1) and within 2^-(scale+i) of the star.
      i64 i = 0;
      for (; !(Dyadic::inv_pow2(scale + i) < eps); ++i) {
        prefix.steps.push_back({K::Piece, i});
        bound_rec(expr, piece_view(n, i), prefix, scale + i + 1, mult, eps, l, cover);
        prefix.steps.pop_back();
      }
      prefix.steps.push_back({K::Star});
      cover.push_back({prefix, mult, Dyadic::inv_pow2(scale + i)});
      prefix.steps.pop_back();
      l = checked_lcm(l, mult);
    } else {
      throw NotAllPeriodic();
    }
  });
}

}  // namespace detail

/// l(eps): lcm of the periods of every block whose diameter reaches eps.
inline UniformBound uniform_period_bound(const CascadeExpr& expr, const Dyadic& epsilon) {
  if (epsilon.is_zero()) throw Error("epsilon must be positive");
  if (!is_all_periodic(expr)) throw NotAllPeriodic();
  UniformBound out;
  out.epsilon = epsilon;
  PointId prefix;
  detail::bound_rec(expr, detail::view(expr), prefix, 0, 1, epsilon, out.l, out.covering);
  return out;
}

/// A point x and n <= n_max with d(x, f^{n l}(x)) >= epsilon, if any.
inline std::optional<std::pair<PointId, i64>> check_uniform_bound(const CascadeExpr& expr,
                                                                   const UniformBound& ub,
                                                                   i64 depth, i64 n_max) {
  for (const auto& x : enumerate_points(expr, depth)) {
    // f^{nl}(x) only depends on nl modulo the period of x.
    const i64 p = *period(expr, x).value;
    const i64 reps = std::min(n_max, p / std::gcd(p, ub.l));
    PointId y = x;
    for (i64 n = 1; n <= reps; ++n) {
      detail::power(detail::view(expr), y, 0, ub.l);
      if (!(detail::distance_unchecked(expr, x, y) < ub.epsilon)) return std::pair{x, n};
    }
  }
  return std::nullopt;
}

/// d(x, y) < delta implies d(f^m x, f^m y) < epsilon for all m.
struct Modulus {
  Dyadic epsilon;
  Dyadic delta;        // from the three-term estimate: delta <= eps/3
  Dyadic third;        // the eps/3 bound used for the estimate
  i64 l = 1;           // l(third)
  Dyadic sharp_delta;  // largest eps/2^j satisfying the invariant at the check depth
  i64 check_depth = 8;
};

namespace detail {

// Does d(x,y) < delta imply d(f^i x, f^i y) < eps for 0 <= i < iterations?
// Checked over `pts`. A pair repeats after the lcm of its two periods, so
// iteration stops there.
inline bool modulus_holds(const CascadeExpr& expr, const std::vector<PointId>& pts,
                          const Dyadic& delta, const Dyadic& eps, i64 iterations) {
  std::vector<i64> per;
  per.reserve(pts.size());
  for (const auto& x : pts) per.push_back(period_at(view(expr), x, 0).value.value_or(iterations));
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      if (!(distance_unchecked(expr, pts[a], pts[b]) < delta)) continue;
      PointId x = pts[a];
      PointId y = pts[b];
      const i64 reps = std::min(iterations, checked_lcm(per[a], per[b]));
      for (i64 i = 0; i < reps; ++i) {
        if (!(distance_unchecked(expr, x, y) < eps)) return false;
        forward(view(expr), x, 0);
        forward(view(expr), y, 0);
      }
    }
  }
  return true;
}

}  // namespace detail

/// The order of f on the points enumerated at `depth`.
inline i64 truncated_order(const CascadeExpr& expr, i64 depth) {
  i64 l = 1;
  for (const auto& x : enumerate_points(expr, depth)) l = checked_lcm(l, *period(expr, x).value);
  return l;
}

/// delta(eps) by the three-term estimate
///   d(f^m x, f^m y) <= d(f^m x, f^{m-kl} x) + d(f^i x, f^i y) + d(f^{m-kl} y, f^m y)
/// with m = kl + i, i < l, l = l(eps/3): each term is below eps/3 once
/// d(x, y) < delta makes the middle term small for i < l.
inline Modulus equicontinuity_modulus(const CascadeExpr& expr, const Dyadic& epsilon,
                                      i64 depth = 8) {
  if (epsilon.is_zero()) throw Error("epsilon must be positive");
  if (!is_all_periodic(expr)) throw NotAllPeriodic();
  Modulus out;
  out.epsilon = epsilon;
  out.check_depth = depth;
  i64 k = 0;
  while (!(Dyadic::inv_pow2(k).times(3) < epsilon)) ++k;
  out.third = Dyadic::inv_pow2(k);
  out.l = uniform_period_bound(expr, out.third).l;

  const auto pts = enumerate_points(expr, depth);
  Dyadic delta = out.third;
  for (int step = 0; step < 64 && !detail::modulus_holds(expr, pts, delta, out.third, out.l); ++step)
    delta = delta.half();
  out.delta = delta;

  // f has finite order on the truncation, so checking one full cycle is exact there.
  const i64 order = std::min<i64>(truncated_order(expr, depth), 4096);
  Dyadic sharp = epsilon;
  while (sharp > delta && !detail::modulus_holds(expr, pts, sharp, epsilon, order))
    sharp = sharp.half();
  out.sharp_delta = std::max(sharp, delta);
  return out;
}

/// A pair (x, y) with d(x, y) < delta and m <= m_max with d(f^m x, f^m y) >= epsilon.
/// Pairs of periodic points are followed until they repeat.
inline std::optional<std::tuple<PointId, PointId, i64>> check_modulus(const CascadeExpr& expr,
                                                                      const Dyadic& delta,
                                                                      const Dyadic& epsilon,
                                                                      i64 depth, i64 m_max) {
  const auto pts = enumerate_points(expr, depth);
  std::vector<std::optional<i64>> per;
  for (const auto& x : pts) per.push_back(period(expr, x).value);
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      if (!(detail::distance_unchecked(expr, pts[a], pts[b]) < delta)) continue;
      PointId x = pts[a];
      PointId y = pts[b];
      i64 reps = m_max + 1;
      if (per[a] && per[b]) reps = std::min(reps, checked_lcm(*per[a], *per[b]));
      for (i64 m = 0; m < reps; ++m) {
        if (!(detail::distance_unchecked(expr, x, y) < epsilon)) return std::tuple{pts[a], pts[b], m};
        detail::forward(detail::view(expr), x, 0);
        detail::forward(detail::view(expr), y, 0);
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Failure search

struct FailureWitness {
  PointId x;
  PointId y;
  i64 n = 0;
  Dyadic initial;  // d(x, y)
  Dyadic final;    // d(f^n x, f^n y) >= epsilon
};

/// Searches pairs enumerated at `depth`, closest first, for an iterate
/// f^n with |n| <= iter_bound that pushes them at least epsilon apart. Among
/// pairs at equal distance the enumeration order decides; for each pair the
/// least positive n is preferred, then the negative n of least magnitude.
inline std::optional<FailureWitness> equicontinuity_failure_witness(const CascadeExpr& expr,
                                                                    const Dyadic& epsilon,
                                                                    i64 depth, i64 iter_bound) {
  const auto pts = enumerate_points(expr, depth);
  struct Cand {
    Dyadic d;
    std::size_t a, b;
  };
  // Only pairs inside one catalog component can separate; group by component.
  std::map<std::vector<PathStep>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!detail::path_multiplier(detail::view(expr), pts[i], 0).second) continue;
    groups[std::vector<PathStep>(pts[i].steps.begin(), pts[i].steps.end() - 1)].push_back(i);
  }
  std::vector<Cand> cands;
  for (const auto& [prefix, idx] : groups)
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = i + 1; j < idx.size(); ++j)
        cands.push_back({detail::distance_unchecked(expr, pts[idx[i]], pts[idx[j]]), idx[i], idx[j]});
  std::sort(cands.begin(), cands.end(), [](const Cand& p, const Cand& q) {
    if (p.d != q.d) return p.d < q.d;
    return std::pair{p.a, p.b} < std::pair{q.a, q.b};
  });

  for (const auto& c : cands) {
    if (!(c.d < epsilon)) break;
    for (int dir : {1, -1}) {
      PointId x = pts[c.a];
      PointId y = pts[c.b];
      for (i64 n = 1; n <= iter_bound; ++n) {
        if (dir > 0) {
          detail::forward(detail::view(expr), x, 0);
          detail::forward(detail::view(expr), y, 0);
        } else {
          detail::backward(detail::view(expr), x, 0);
          detail::backward(detail::view(expr), y, 0);
        }
        const Dyadic dn = detail::distance_unchecked(expr, x, y);
        if (dn < epsilon) continue;
        FailureWitness w{pts[c.a], pts[c.b], dir * n, c.d, dn};
        // Re-check with the closed-form powers.
        const Dyadic check = distance(expr, apply_power(expr, w.x, w.n), apply_power(expr, w.y, w.n));
        if (check != dn || !(distance(expr, w.x, w.y) < epsilon))
          throw std::logic_error("failure witness does not re-verify");
        return w;
      }
    }
  }
  return std::nullopt;
}

}  // namespace cascade
