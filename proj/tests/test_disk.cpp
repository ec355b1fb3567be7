#include <gtest/gtest.h>

#include "cascade/disk.hpp"

using namespace cascade;

namespace {

DiskPoint pt(Rational r, Rational a) { return DiskPoint::make(r, a); }

}  // namespace

TEST(Disk, Apply) {
  EXPECT_EQ(disk_apply(pt(1, 0), 1), pt(1, 1));
  EXPECT_EQ(disk_apply(pt(1, 0), 2), pt(1, 0));
  EXPECT_EQ(disk_apply(pt(Rational(5, 4), 0), 8), pt(Rational(5, 4), 0));
  EXPECT_EQ(disk_apply(pt(Rational(1, 3), Rational(1, 2)), -3), pt(Rational(1, 3), Rational(3, 2)));
  EXPECT_EQ(pt(Rational(7, 6), Rational(5, 2)).angle, Rational(1, 2));
  EXPECT_EQ(pt(Rational(7, 6), 1).to_string(), "(7/6·pi, 1·pi)");
  EXPECT_THROW(pt(Rational(5, 2), 0), InvalidPoint);
  EXPECT_THROW(pt(Rational(-1, 2), 0), InvalidPoint);
}

TEST(Disk, Additivity) {
  for (i64 den = 1; den <= 12; ++den)
    for (i64 num = 0; num <= 2 * den; ++num) {
      const DiskPoint x = pt(Rational(num, den), Rational(num % 3, 5));
      for (i64 a = -7; a <= 7; ++a)
        for (i64 b = -7; b <= 7; b += 3) EXPECT_EQ(disk_apply(disk_apply(x, a), b), disk_apply(x, a + b));
    }
}

TEST(Disk, Period) {
  EXPECT_EQ(disk_period(pt(1, 0)), 2);
  EXPECT_EQ(disk_period(pt(Rational(7, 6), 0)), 12);
  EXPECT_EQ(disk_period(pt(0, 0)), 1);
  EXPECT_EQ(disk_period(pt(2, 0)), 1);
  for (i64 den = 1; den <= 15; ++den)
    for (i64 num = 0; num <= 2 * den; ++num) {
      const DiskPoint x = pt(Rational(num, den), 0);
      const i64 p = disk_period(x);
      EXPECT_EQ(disk_apply(x, p), x);
      for (i64 k = 1; k < p; ++k) EXPECT_NE(disk_apply(x, k), x);
    }
}

TEST(Disk, PIterate) {
  using oracle::CongruenceClassSpec;
  EXPECT_EQ(disk_p_iterate(pt(Rational(7, 6), 0), CongruenceClassSpec::of({{12, 6}})), pt(Rational(7, 6), 1));
  EXPECT_EQ(disk_p_iterate(pt(1, 0), CongruenceClassSpec::of({{2, 0}})), pt(1, 0));
  EXPECT_EQ(disk_p_iterate(pt(1, Rational(1, 2)), CongruenceClassSpec::of({{2, 1}})), pt(1, Rational(3, 2)));
  EXPECT_EQ(disk_p_iterate(pt(1, 0), CongruenceClassSpec::power(3)), pt(1, 1));
  EXPECT_THROW(disk_p_iterate(pt(Rational(7, 6), 0), CongruenceClassSpec::of({{2, 0}})), UnderdeterminedResidue);
  EXPECT_THROW(disk_p_iterate(pt(1, 0), CongruenceClassSpec::of({{4, 3}, {16, 9}})), IncompatibleSpec);
  // Lemma instance: the image is f^r for the determined residue r.
  const ResidueSystem rs = ResidueSystem::parse("2:0,12:6,20:10");
  for (const auto& x : {pt(1, 0), pt(Rational(7, 6), Rational(1, 3)), pt(Rational(11, 10), 0)})
    EXPECT_EQ(disk_p_iterate(x, rs), disk_apply(x, *rs.determine(disk_period(x))));
}

TEST(Disk, NonWapWitness) {
  const NonWapReport one = nonwap_witness(1);
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_EQ(one.rows[0].period, 12);
  EXPECT_EQ(one.rows[0].image, pt(Rational(7, 6), 1));

  const NonWapReport rep = nonwap_witness(3);
  ASSERT_EQ(rep.rows.size(), 3u);
  const i64 primes[] = {3, 5, 7};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& row = rep.rows[i];
    EXPECT_EQ(row.n, primes[i]);
    EXPECT_EQ(row.period, 4 * primes[i]);
    EXPECT_EQ(row.residue, 2 * primes[i]);
    EXPECT_EQ(row.image.angle, Rational(1));
  }
  EXPECT_EQ(rep.limit_image, pt(1, 0));
  EXPECT_EQ(rep.images_limit, pt(1, 1));
  EXPECT_EQ(rep.angular_gap, Rational(1));
  EXPECT_EQ(nonwap_witness(8).rows.back().n, 23);
  EXPECT_THROW(nonwap_witness(0), Error);
}

TEST(Disk, CommuteCheck) {
  const std::vector<DiskPoint> sample{pt(1, 0), pt(Rational(7, 6), 0)};
  EXPECT_TRUE(disk_commute_check(sample, ResidueSystem::parse("2:1,12:6"), ResidueSystem::parse("2:0,12:4")));
  EXPECT_TRUE(disk_commute_check({}, ResidueSystem(), ResidueSystem()));
  EXPECT_THROW(disk_commute_check(sample, ResidueSystem::parse("2:1"), ResidueSystem::parse("2:0,12:4")),
               UnderdeterminedResidue);
}
