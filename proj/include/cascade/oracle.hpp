#pragma once

// Brute-force ground truth. Nothing here uses residue arithmetic or the
// closed-form powers: limits come from iterating f or f^-1 step by step,
// congruences are solved by scanning.

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cascade/presentation.hpp"

namespace cascade::oracle {

/// Principal(m), or the classes n_i N + r_i of a non-principal ultrafilter.
struct CongruenceClassSpec {
  std::optional<i64> principal;
  std::vector<std::pair<i64, i64>> classes;

  static CongruenceClassSpec power(i64 m) { return {m, {}}; }
  static CongruenceClassSpec of(std::vector<std::pair<i64, i64>> c) { return {std::nullopt, std::move(c)}; }
};

struct CrtResult {
  bool solvable = false;
  i64 least = 0;
  i64 modulus = 1;
  std::optional<std::pair<i64, i64>> conflict;
};

/// Least n0 >= 0 meeting every congruence, with the lcm of the moduli.
inline CrtResult crt_solve(const std::vector<std::pair<i64, i64>>& congruences) {
  CrtResult out;
  for (const auto& [n, r] : congruences)
    if (n < 1 || r < 0 || r >= n)
      throw MalformedResidue("congruence " + std::to_string(r) + " mod " + std::to_string(n) +
                             " is malformed");
  for (std::size_t i = 0; i < congruences.size(); ++i)
    for (std::size_t j = i + 1; j < congruences.size(); ++j) {
      const auto [n, r] = congruences[i];
      const auto [m, s] = congruences[j];
      if ((r - s) % std::gcd(n, m) != 0) {
        out.conflict = std::pair{n, m};
        return out;
      }
    }
  // Scan: keep a solution x for the moduli so far and step by their lcm.
  i64 x = 0;
  i64 step = 1;
  for (const auto& [n, r] : congruences) {
    i64 tries = 0;
    while (x % n != r) {
      x += step;
      if (++tries > n) throw std::logic_error("compatible congruences without a solution");
    }
    step = checked_lcm(step, n);
    if (step > (i64{1} << 40)) throw Overflow("congruence modulus too large for scanning");
  }
  out.solvable = true;
  out.least = x % step;
  out.modulus = step;
  return out;
}

enum class Direction { Forward, Backward };

struct PIterResult {
  bool stabilized = false;
  PointId value;
  i64 samples = 0;
};

namespace detail {

inline void step(const CascadeExpr& expr, PointId& x, Direction dir) {
  x = dir == Direction::Forward ? apply_map(expr, x) : apply_inverse(expr, x);
}

}  // namespace detail

/// Samples f^m(x) (or f^-m(x)) for m <= m_max in the class and reports the
/// eventual value: either the samples end in at least three equal values, or
/// their distances to some limit point strictly decrease over the last
/// samples (at least three).
inline PIterResult p_iterate_limit(const CascadeExpr& expr, const PointId& x,
                                   const CongruenceClassSpec& spec, i64 m_max,
                                   Direction dir = Direction::Forward) {
  validate_point(expr, x);
  PIterResult out;
  if (spec.principal) {
    PointId y = x;
    const i64 m = *spec.principal;
    const Direction d = (m >= 0) == (dir == Direction::Forward) ? Direction::Forward : Direction::Backward;
    for (i64 i = 0; i < (m < 0 ? -m : m); ++i) detail::step(expr, y, d);
    out.stabilized = true;
    out.value = y;
    out.samples = 1;
    return out;
  }
  const CrtResult crt = crt_solve(spec.classes);
  if (!crt.solvable)
    throw IncompatibleSpec("classes " + std::to_string(crt.conflict->first) + " and " +
                           std::to_string(crt.conflict->second) + " are incompatible");
  std::vector<PointId> samples;
  PointId y = x;
  i64 m = 0;
  const i64 first = crt.least == 0 ? crt.modulus : crt.least;
  for (i64 target = first; target <= m_max; target += crt.modulus) {
    while (m < target) {
      detail::step(expr, y, dir);
      ++m;
    }
    samples.push_back(y);
  }
  out.samples = static_cast<i64>(samples.size());
  if (samples.size() < 3) return out;

  std::size_t run = 1;
  while (run < samples.size() && samples[samples.size() - 1 - run] == samples.back()) ++run;
  if (run >= 3) {
    out.stabilized = true;
    out.value = samples.back();
    return out;
  }

  // Convergence to a limit point near x.
  i64 reach = 2;
  for (const auto& s : x.steps) reach = std::max(reach, (s.value < 0 ? -s.value : s.value) + 2);
  const std::size_t tail = std::max<std::size_t>(3, samples.size() / 2);
  std::optional<PointId> best;
  Dyadic best_d = Dyadic::one().times(2);
  for (const auto& c : enumerate_points(expr, reach)) {
    if (cb_rank_point(expr, c) == 0) continue;
    bool decreasing = true;
    for (std::size_t i = samples.size() - tail + 1; i < samples.size() && decreasing; ++i)
      decreasing = distance(expr, samples[i], c) < distance(expr, samples[i - 1], c);
    if (!decreasing) continue;
    const Dyadic d = distance(expr, samples.back(), c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (best) {
    out.stabilized = true;
    out.value = *best;
  }
  return out;
}

/// The restriction of a map to a finite list of points.
struct FunctionTable {
  std::vector<PointId> domain;
  std::vector<PointId> image;

  std::optional<PointId> at(const PointId& x) const {
    for (std::size_t i = 0; i < domain.size(); ++i)
      if (domain[i] == x) return image[i];
    return std::nullopt;
  }

  /// (g o h)(x) = g(h(x)); requires h's images to lie in g's domain.
  friend FunctionTable compose(const FunctionTable& g, const FunctionTable& h) {
    FunctionTable out{h.domain, {}};
    for (const auto& y : h.image) {
      auto z = g.at(y);
      if (!z) throw Error("table composition leaves the domain");
      out.image.push_back(*z);
    }
    return out;
  }

  bool operator==(const FunctionTable&) const = default;
};

struct ClosureResult {
  std::vector<FunctionTable> tables;
  bool exact = false;        // the point set is invariant under f and f^-1
  i64 period_lcm = 1;        // lcm of the periods found among the points
  i64 unstabilized = 0;      // limit tables dropped because a point did not stabilize
};

/// Distinct restrictions of f^k for |k| <= power_bound, plus the limit
/// restrictions along every class modulo the lcm of the periods found, in
/// both directions.
inline ClosureResult pointwise_closure(const CascadeExpr& expr, const std::vector<PointId>& points,
                                       i64 power_bound) {
  ClosureResult out;
  const std::set<PointId> dom(points.begin(), points.end());
  out.exact = true;
  for (const auto& x : points)
    if (!dom.count(apply_map(expr, x)) || !dom.count(apply_inverse(expr, x))) out.exact = false;

  auto add = [&](FunctionTable t) {
    if (std::find(out.tables.begin(), out.tables.end(), t) == out.tables.end())
      out.tables.push_back(std::move(t));
  };

  std::vector<PointId> fwd = points, bwd = points;
  add({points, points});
  for (i64 k = 1; k <= power_bound; ++k) {
    for (auto& y : fwd) y = apply_map(expr, y);
    for (auto& y : bwd) y = apply_inverse(expr, y);
    add({points, fwd});
    add({points, bwd});
  }

  // Periods by walking each orbit back to its start.
  for (const auto& x : points) {
    PointId y = apply_map(expr, x);
    i64 n = 1;
    while (y != x && n <= 4096) {
      y = apply_map(expr, y);
      ++n;
    }
    if (y == x) out.period_lcm = checked_lcm(out.period_lcm, n);
  }
  const i64 L = out.period_lcm;
  const i64 m_max = std::max<i64>(4 * L, 64);
  for (Direction dir : {Direction::Forward, Direction::Backward}) {
    for (i64 r = 0; r < L; ++r) {
      FunctionTable t{points, {}};
      bool ok = true;
      for (const auto& x : points) {
        auto res = p_iterate_limit(expr, x, CongruenceClassSpec::of({{L, r}}), m_max, dir);
        if (!res.stabilized) {
          ok = false;
          break;
        }
        t.image.push_back(res.value);
      }
      if (ok)
        add(std::move(t));
      else
        ++out.unstabilized;
    }
  }
  return out;
}

}  // namespace cascade::oracle
