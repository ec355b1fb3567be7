#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

#include "cascade/error.hpp"

namespace cascade {

using i64 = std::int64_t;

inline i64 checked_add(i64 a, i64 b) {
  i64 r;
  if (__builtin_add_overflow(a, b, &r)) throw Overflow("integer overflow in addition");
  return r;
}

inline i64 checked_mul(i64 a, i64 b) {
  i64 r;
  if (__builtin_mul_overflow(a, b, &r)) throw Overflow("integer overflow in multiplication");
  return r;
}

inline i64 checked_neg(i64 a) { return checked_mul(a, -1); }

/// Representative of a mod m in [0, m). m > 0.
inline i64 floor_mod(i64 a, i64 m) {
  i64 r = a % m;
  return r < 0 ? r + m : r;
}

inline i64 floor_div(i64 a, i64 m) { return (a - floor_mod(a, m)) / m; }

inline i64 checked_lcm(i64 a, i64 b) {
  if (a == 0 || b == 0) return 0;
  return checked_mul(a / std::gcd(a, b), b);
}

inline i64 checked_pow(i64 base, i64 exp) {
  i64 r = 1;
  for (i64 i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

/// (a * b) mod m without overflow; m > 0.
inline i64 mul_mod(i64 a, i64 b, i64 m) {
  return static_cast<i64>((static_cast<__int128>(floor_mod(a, m)) * floor_mod(b, m)) % m);
}

inline i64 pow_mod(i64 base, i64 exp, i64 m) {
  if (m == 1) return 0;
  i64 r = 1;
  i64 b = floor_mod(base, m);
  while (exp > 0) {
    if (exp & 1) r = mul_mod(r, b, m);
    b = mul_mod(b, b, m);
    exp >>= 1;
  }
  return r;
}

/// Extended Euclid: returns g = gcd(a, b) and x with a*x = g (mod b).
inline i64 inverse_part(i64 a, i64 b, i64& g) {
  i64 old_r = a, r = b, old_s = 1, s = 0;
  while (r != 0) {
    i64 q = old_r / r;
    i64 t = old_r - q * r;
    old_r = r;
    r = t;
    t = old_s - q * s;
    old_s = s;
    s = t;
  }
  g = old_r;
  return old_s;
}

/// Exact non-negative dyadic rational num / 2^exp, kept normalized
/// (num odd, or num == 0 with exp == 0).
class Dyadic {
 public:
  constexpr Dyadic() = default;

  static Dyadic from_parts(i64 num, i64 exp) {
    if (num < 0) throw Error("dyadic values are non-negative");
    Dyadic d;
    d.num_ = num;
    d.exp_ = exp;
    d.normalize();
    return d;
  }

  static Dyadic zero() { return {}; }
  static Dyadic one() { return from_parts(1, 0); }

  /// 2^-e for e >= 0.
  static Dyadic inv_pow2(i64 e) { return from_parts(1, e); }

  i64 numerator() const noexcept { return num_; }
  i64 exponent() const noexcept { return exp_; }
  bool is_zero() const noexcept { return num_ == 0; }

  /// True iff the value is 2^-k for some k >= 0.
  std::optional<i64> inv_pow2_exponent() const {
    if (num_ == 1) return exp_;
    return std::nullopt;
  }

  Dyadic half() const { return num_ == 0 ? *this : from_parts(num_, exp_ + 1); }

  Dyadic times(i64 k) const { return from_parts(checked_mul(num_, k), exp_); }

  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    if (a.num_ == 0 || b.num_ == 0) return (a.num_ != 0) <=> (b.num_ != 0);
    // Compare magnitudes through bit lengths first, then by aligned shifting.
    const i64 la = std::bit_width(static_cast<std::uint64_t>(a.num_)) - a.exp_;
    const i64 lb = std::bit_width(static_cast<std::uint64_t>(b.num_)) - b.exp_;
    if (la != lb) return la <=> lb;
    using u128 = unsigned __int128;
    u128 x = static_cast<u128>(a.num_);
    u128 y = static_cast<u128>(b.num_);
    if (a.exp_ < b.exp_)
      x <<= (b.exp_ - a.exp_);
    else
      y <<= (a.exp_ - b.exp_);
    return x <=> y;
  }
  friend bool operator==(const Dyadic& a, const Dyadic& b) = default;

  std::string to_string() const {
    if (num_ == 0) return "0";
    if (exp_ == 0) return std::to_string(num_);
    if (exp_ <= 62) return std::to_string(num_) + "/" + std::to_string(i64{1} << exp_);
    return std::to_string(num_) + "/2^" + std::to_string(exp_);
  }

 private:
  void normalize() {
    if (num_ == 0) {
      exp_ = 0;
      return;
    }
    while (exp_ < 0) {
      num_ = checked_mul(num_, 2);
      ++exp_;
    }
    while (exp_ > 0 && (num_ & 1) == 0) {
      num_ >>= 1;
      --exp_;
    }
  }

  i64 num_ = 0;
  i64 exp_ = 0;
};

namespace detail {

inline std::optional<i64> parse_i64(std::string_view s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  i64 v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace detail

/// Parses "a", "a/b" with b a power of two, or "a/2^k".
inline Dyadic parse_dyadic(std::string_view text) {
  auto fail = [&]() -> Dyadic {
    throw ParseError("expected a dyadic rational such as 1/2^3 or 3/8, got '" +
                         std::string(text) + "'",
                     1, 1);
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    auto v = detail::parse_i64(text);
    if (!v) return fail();
    return Dyadic::from_parts(*v, 0);
  }
  auto num = detail::parse_i64(text.substr(0, slash));
  if (!num) return fail();
  std::string_view den = text.substr(slash + 1);
  if (den.starts_with("2^")) {
    auto k = detail::parse_i64(den.substr(2));
    if (!k || *k > 4096) return fail();
    return Dyadic::from_parts(*num, *k);
  }
  auto d = detail::parse_i64(den);
  if (!d || *d == 0 || !std::has_single_bit(static_cast<std::uint64_t>(*d))) return fail();
  return Dyadic::from_parts(*num, std::countr_zero(static_cast<std::uint64_t>(*d)));
}

}  // namespace cascade
