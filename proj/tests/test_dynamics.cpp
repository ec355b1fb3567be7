#include <gtest/gtest.h>

#include <random>
#include <set>

#include "cascade/dynamics.hpp"
#include "support/generators.hpp"

using namespace cascade;

namespace {

// Period by stepping the map until the point returns.
std::optional<i64> brute_period(const CascadeExpr& e, const PointId& x, i64 bound) {
  PointId y = x;
  for (i64 n = 1; n <= bound; ++n) {
    y = apply_map(e, y);
    if (y == x) return n;
  }
  return std::nullopt;
}

}  // namespace

TEST(Period, MatchesBruteForce) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 80; ++i) {
    const CascadeExpr e = gen::random_expr(rng, {3, true, true});
    for (const auto& x : enumerate_points(e, 3)) {
      const PeriodResult p = period(e, x);
      const auto b = brute_period(e, x, 5000);
      if (p.is_finite()) {
        ASSERT_TRUE(b) << to_string(e) << " " << to_string(x);
        EXPECT_EQ(*p.value, *b) << to_string(e) << " " << to_string(x);
      } else {
        EXPECT_FALSE(b) << to_string(e) << " " << to_string(x);
      }
    }
  }
}

TEST(Period, Examples) {
  const CascadeExpr e = parse_cascade("cycleof(sum(cycle(2), shift2), 3)");
  EXPECT_EQ(period(e, parse_point(e, "c1.L.0")).to_string(), "6");
  EXPECT_EQ(period(e, parse_point(e, "c0.R.+inf")).to_string(), "3");
  EXPECT_EQ(period(e, parse_point(e, "c2.R.7")).to_string(), "aperiodic");
  EXPECT_FALSE(is_all_periodic(e));
  EXPECT_TRUE(contains_shift2(e));
  EXPECT_FALSE(contains_shift2(parse_cascade("sum(ishift, cycle(2))")));
}

TEST(PeriodSet, Formatting) {
  EXPECT_EQ(period_set(parse_cascade("sum(cycle(2), cycle(3))")).to_string(), "{2, 3}");
  EXPECT_EQ(period_set(parse_cascade("tower(cycle(2), cycle(2^n))")).to_string(),
            "{1, 2^n (n>=1)}");
  EXPECT_EQ(period_set(parse_cascade("tower(cycle(5), cycle(2*2^n))")).to_string(),
            "{1, 5, 2*2^n (n>=1)}");
  EXPECT_EQ(period_set(parse_cascade("cycleof(tower(cycle(1*n+1)), 2)")).to_string(),
            "{2*n+2 (n>=0)}");
  EXPECT_EQ(period_set(parse_cascade("cycleof(shift2, 3)")).to_string(), "{3} partial");
}

TEST(PeriodSet, ContainsEveryEnumeratedPeriod) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    const CascadeExpr e = gen::random_expr(rng, {3, true, true});
    const PeriodSetSpec ps = period_set(e);
    std::set<i64> seen;
    for (const auto& x : enumerate_points(e, 5)) {
      const PeriodResult p = period(e, x);
      if (p.is_finite()) {
        EXPECT_TRUE(ps.contains(*p.value)) << to_string(e) << " " << *p.value;
        seen.insert(*p.value);
      }
    }
    // Every explicit period and every listed small tail value occurs at this depth.
    for (i64 q : ps.explicit_periods) EXPECT_TRUE(seen.count(q)) << to_string(e) << " " << q;
    EXPECT_EQ(ps.partial, !is_all_periodic(e));
  }
}

TEST(Catalog, AperiodicWitness) {
  EXPECT_EQ(to_string(*aperiodic_point(CascadeExpr::shift2())), "0");
  EXPECT_EQ(to_string(*aperiodic_point(CascadeExpr::ishift())), "x0");
  const CascadeExpr e = parse_cascade("sum(cycle(2), cycleof(ishift, 2))");
  const auto x = aperiodic_point(e);
  ASSERT_TRUE(x);
  EXPECT_FALSE(period(e, *x).is_finite());
  EXPECT_FALSE(aperiodic_point(parse_cascade("tower(cycle(3^n))")));
  const auto site = first_catalog_site(e);
  ASSERT_TRUE(site);
  EXPECT_EQ(site->kind, CatalogSite::Kind::IShift);
  EXPECT_EQ(site->multiplier, 2);
}

TEST(MaxRankSet, InvariantAndMaximal) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const CascadeExpr e = gen::random_expr(rng, {3, true, true});
    const auto top = max_rank_set(e);
    ASSERT_FALSE(top.empty());
    const i64 r = max_cb_rank(e);
    std::set<PointId> members(top.begin(), top.end());
    for (const auto& x : top) {
      EXPECT_EQ(cb_rank_point(e, x), r);
      EXPECT_TRUE(members.count(apply_map(e, x)));
    }
    for (const auto& x : enumerate_points(e, 3))
      if (cb_rank_point(e, x) == r) { EXPECT_TRUE(members.count(x)) << to_string(x); }
  }
}

TEST(MinimalSets, Formatting) {
  const auto fams = minimal_sets(parse_cascade("tower(cycle(2), cycle(2^n))"));
  std::vector<std::string> got;
  for (const auto& f : fams) got.push_back(f.to_string());
  EXPECT_EQ(got, (std::vector<std::string>{"orbit(p0.0) period 2", "orbit(p{n>=1}.0) period 2^n",
                                           "orbit(*) period 1"}));
}

TEST(MinimalSets, OrbitsPartitionPeriodicPoints) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 60; ++i) {
    const CascadeExpr e = gen::random_expr(rng, {2, true, true});
    std::set<PointId> covered;
    for (const auto& fam : minimal_sets(e))
      for (const auto& orb : instantiate(e, fam, 3)) {
        const std::set<PointId> s(orb.begin(), orb.end());
        for (const auto& x : orb) {
          EXPECT_TRUE(s.count(apply_map(e, x)));
          EXPECT_TRUE(covered.insert(x).second) << "orbit overlap at " << to_string(x);
        }
      }
    for (const auto& x : enumerate_points(e, 3))
      if (period(e, x).is_finite()) { EXPECT_TRUE(covered.count(x)) << to_string(e) << " " << to_string(x); }
  }
}
