#pragma once

// The rotation f(r, theta) = (r, theta + r) of a closed disk, restricted to
// radii and angles that are rational multiples of pi. Every such point is
// periodic, so iterates and limit elements are computed exactly.

#include <boost/rational.hpp>

#include <string>
#include <vector>

#include "cascade/ellis.hpp"
#include "cascade/oracle.hpp"

namespace cascade {

using Rational = boost::rational<i64>;

/// Polar coordinates in units of pi: radius in [0, 2], angle in [0, 2).
struct DiskPoint {
  Rational radius;
  Rational angle;

  static DiskPoint make(Rational radius, Rational angle) {
    if (radius < 0 || radius > 2) throw InvalidPoint("disk radius must lie in [0, 2] (units of pi)");
    return {radius, normalize_angle(angle)};
  }

  static Rational normalize_angle(Rational a) {
    const i64 turns = floor_div(a.numerator(), checked_mul(2, a.denominator()));
    return a - Rational(checked_mul(2, turns));
  }

  std::string to_string() const {
    auto r = [](const Rational& q) {
      if (q.denominator() == 1) return std::to_string(q.numerator());
      return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
    };
    return "(" + r(radius) + "·pi, " + r(angle) + "·pi)";
  }

  bool operator==(const DiskPoint&) const = default;
};

inline DiskPoint disk_apply(const DiskPoint& x, i64 n) {
  return DiskPoint::make(x.radius, x.angle + x.radius * Rational(n));
}

/// Rotation by r*pi has order q where r/2 = p/q in lowest terms.
inline i64 disk_period(const DiskPoint& x) { return (x.radius / Rational(2)).denominator(); }

inline DiskPoint disk_p_iterate(const DiskPoint& x, const ResidueSystem& rs) {
  const i64 q = disk_period(x);
  auto r = rs.determine(q);
  if (!r)
    throw UnderdeterminedResidue("no residue modulo " + std::to_string(q) + " for the point " +
                                 x.to_string());
  return disk_apply(x, *r);
}

inline DiskPoint disk_p_iterate(const DiskPoint& x, const oracle::CongruenceClassSpec& spec) {
  if (spec.principal) return disk_apply(x, *spec.principal);
  ResidueSystem rs;
  for (const auto& [n, r] : spec.classes) rs.set(n, r);
  if (!realizable(rs).realizable) throw IncompatibleSpec("congruence classes are incompatible");
  return disk_p_iterate(x, rs);
}

struct NonWapRow {
  i64 n = 0;  // the prime n_k
  DiskPoint point;
  i64 period = 0;
  i64 residue = 0;
  DiskPoint image;
};

/// Points (pi + pi/(2 n_k), 0) converge to (pi, 0), but under an f^p with
/// p in 4 n_k N + 2 n_k for every k and in 2N their images stay at angle pi
/// while (pi, 0) is fixed.
struct NonWapReport {
  std::vector<NonWapRow> rows;
  ResidueSystem residues;
  DiskPoint limit;
  DiskPoint limit_image;
  DiskPoint images_limit;
  Rational angular_gap;
};

inline NonWapReport nonwap_witness(i64 k_max) {
  if (k_max < 1) throw Error("nonwap_witness needs at least one prime (k >= 1)");
  NonWapReport rep;
  std::vector<i64> primes;
  for (i64 p = 3; static_cast<i64>(primes.size()) < k_max; p += 2) {
    bool prime = true;
    for (i64 d = 3; d * d <= p; d += 2)
      if (p % d == 0) prime = false;
    if (prime) primes.push_back(p);
  }
  rep.residues.set(2, 0);
  for (i64 n : primes) rep.residues.set(checked_mul(4, n), checked_mul(2, n));
  if (!realizable(rep.residues).realizable) throw std::logic_error("disk residues not realizable");

  for (i64 n : primes) {
    NonWapRow row;
    row.n = n;
    row.point = DiskPoint::make(Rational(1) + Rational(1, 2 * n), 0);
    row.period = disk_period(row.point);
    row.residue = *rep.residues.determine(row.period);
    row.image = disk_p_iterate(row.point, rep.residues);
    if (row.period != 4 * n || row.image.angle != Rational(1))
      throw std::logic_error("disk witness row does not match");
    rep.rows.push_back(row);
  }
  rep.limit = DiskPoint::make(1, 0);
  rep.limit_image = disk_p_iterate(rep.limit, rep.residues);
  rep.images_limit = DiskPoint::make(1, 1);
  rep.angular_gap = rep.images_limit.angle - rep.limit_image.angle;
  if (rep.limit_image != rep.limit) throw std::logic_error("disk limit point not fixed");
  return rep;
}

/// True when e1 o e2 and e2 o e1 agree at every sample point.
inline bool disk_commute_check(const std::vector<DiskPoint>& points, const ResidueSystem& e1,
                               const ResidueSystem& e2) {
  for (const auto& x : points)
    if (disk_p_iterate(disk_p_iterate(x, e2), e1) != disk_p_iterate(disk_p_iterate(x, e1), e2))
      return false;
  return true;
}

}  // namespace cascade
