#pragma once

// Exact arithmetic primitives shared by every module: arbitrary precision
// integers and rationals, factorials and binomial coefficients, and the
// canonical num/den text form used by all serialization paths.
//
// Rationals are kept in lowest terms with positive denominator; both
// invariants are maintained by cpp_rational itself.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gwproj {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Rational from any numerator/denominator pair with den != 0; the sign moves
// to the numerator (cpp_rational itself rejects negative denominators).
inline Rational make_rational(Int num, Int den) {
  if (den == 0) throw std::domain_error("make_rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return Rational(num, den);
}

inline Int factorial(long n) {
  if (n < 0) throw std::invalid_argument("factorial: negative argument");
  Int r = 1;
  for (long k = 2; k <= n; ++k) r *= k;
  return r;
}

// binomial(n, k) for any integer n and k >= 0, via the falling factorial
// n(n-1)...(n-k+1)/k!. Zero when k < 0; matches binom(n,k) = 0 for
// 0 <= n < k and the signed values for negative n.
inline Int binomial(long n, long k) {
  if (k < 0) return 0;
  Int num = 1;
  for (long j = 0; j < k; ++j) num *= (n - j);
  return num / factorial(k);
}

// (sum parts)! / prod parts_i!; zero if any part is negative.
inline Int multinomial(const std::vector<long>& parts) {
  long total = 0;
  for (long p : parts) {
    if (p < 0) return 0;
    total += p;
  }
  Int r = factorial(total);
  for (long p : parts) r /= factorial(p);
  return r;
}

// "7", "0", "-5/12"; integers print without the /1.
inline std::string rat_str(const Rational& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) {
    s += '/';
    s += denominator(r).str();
  }
  return s;
}

// Strict inverse of rat_str up to normalization: optional leading '-',
// digits, optionally '/' and a positive integer. Anything else is rejected.
inline std::optional<Rational> rat_parse(std::string_view s) {
  auto all_digits = [](std::string_view t) {
    if (t.empty()) return false;
    for (char c : t)
      if (c < '0' || c > '9') return false;
    return true;
  };
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = (s[0] == '-');
    s.remove_prefix(1);
  }
  std::string_view num = s, den = "1";
  if (auto pos = s.find('/'); pos != std::string_view::npos) {
    num = s.substr(0, pos);
    den = s.substr(pos + 1);
  }
  if (!all_digits(num) || !all_digits(den)) return std::nullopt;
  Int n{std::string(num)};
  Int d{std::string(den)};
  if (d == 0) return std::nullopt;
  Rational r(n, d);
  if (neg) r = -r;
  return r;
}

}  // namespace gwproj
