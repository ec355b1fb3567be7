#pragma once

// Random presentations and elements for property tests. Parameters stay small
// so that truncated tables and brute-force oracles remain cheap.

#include <random>
#include <vector>

#include "cascade/cascade.hpp"

namespace cascade::gen {

struct ExprOptions {
  int max_depth = 3;
  bool allow_aperiodic = false;
  bool allow_rep = true;
};

inline Family random_family(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 5);
  switch (pick(rng)) {
    case 0:
      return Family::constant(1 + static_cast<i64>(rng() % 3));
    case 1:
      return Family::linear(1, 1);
    case 2:
      return Family::linear(1 + static_cast<i64>(rng() % 2), 1 + static_cast<i64>(rng() % 2));
    case 3:
      return Family::geometric(1, 2);
    case 4:
      return Family::geometric(1, 3);
    default:
      return Family::geometric(2, 2);
  }
}

inline CascadeExpr random_expr(std::mt19937_64& rng, const ExprOptions& opt, int depth = 0) {
  const bool leaf = depth >= opt.max_depth;
  std::uniform_int_distribution<int> pick(0, leaf ? 1 : (opt.allow_aperiodic ? 8 : 6));
  switch (pick(rng)) {
    case 0:
    case 1:
      return CascadeExpr::cycle(1 + static_cast<i64>(rng() % 4));
    case 2:
    case 3: {
      std::vector<CascadeExpr> head;
      const int h = static_cast<int>(rng() % 3);
      ExprOptions periodic = opt;
      periodic.allow_aperiodic = false;
      for (int i = 0; i < h; ++i) head.push_back(random_expr(rng, periodic, opt.max_depth));
      if (opt.allow_rep && depth + 1 < opt.max_depth && rng() % 6 == 0)
        return CascadeExpr::tower_rep(std::move(head), random_expr(rng, periodic, opt.max_depth - 1));
      return CascadeExpr::tower(std::move(head), random_family(rng));
    }
    case 4:
    case 5:
      return CascadeExpr::sum(random_expr(rng, opt, depth + 1), random_expr(rng, opt, depth + 1));
    case 6:
      return CascadeExpr::cycle_of(random_expr(rng, opt, depth + 1), 2 + static_cast<i64>(rng() % 2));
    case 7:
      return CascadeExpr::sum(rng() % 2 ? CascadeExpr::shift2() : CascadeExpr::ishift(),
                              random_expr(rng, opt, depth + 1));
    default:
      return rng() % 2 ? CascadeExpr::shift2() : CascadeExpr::ishift();
  }
}

/// An expression that contains a non-distal generator somewhere.
inline CascadeExpr random_aperiodic_expr(std::mt19937_64& rng, int max_depth = 2) {
  const CascadeExpr gen = rng() % 2 ? CascadeExpr::shift2() : CascadeExpr::ishift();
  ExprOptions opt{max_depth, false, true};
  switch (rng() % 4) {
    case 0:
      return gen;
    case 1:
      return CascadeExpr::sum(random_expr(rng, opt), gen);
    case 2:
      return CascadeExpr::sum(gen, random_expr(rng, opt));
    default:
      return CascadeExpr::cycle_of(gen, 2 + static_cast<i64>(rng() % 2));
  }
}

/// Limit elements with residue data drawn around a random integer, plus
/// occasional uniform offsets and per-tail offsets; only realizable ones
/// are returned.
inline EllisElement random_element(std::mt19937_64& rng, const CascadeExpr& expr) {
  const PeriodSetSpec ps = period_set(expr);
  for (;;) {
    const i64 base = static_cast<i64>(rng() % 1000) - 500;
    ResidueSystem rs;
    if (rng() % 4 == 0) {
      rs = ResidueSystem::constant(base);
    } else {
      for (i64 q : ps.explicit_periods) rs.set(q, floor_mod(base, q));
      for (const auto& t : ps.tails) {
        const i64 offset = rng() % 3 == 0 ? base + static_cast<i64>(rng() % 7) : base;
        rs.add_rule({t.family, offset});
      }
      if (rs.empty()) rs = ResidueSystem::constant(base);
    }
    if (realizable(rs).realizable)
      return EllisElement::limit(rng() % 2 ? Side::Forward : Side::Backward, rs);
  }
}

inline i64 lcm_of_periods(const CascadeExpr& expr, const std::vector<PointId>& pts) {
  i64 l = 1;
  for (const auto& x : pts) l = checked_lcm(l, *period(expr, x).value);
  return l;
}

}  // namespace cascade::gen
