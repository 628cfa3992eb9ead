#pragma once

// Truncated power series R[[q]] / (q^{D+1}) with dense coefficient storage.
//
// Every series carries its truncation order D and stores exactly the
// coefficients of q^0..q^D. Arithmetic follows the min rule: the result of
// a binary operation is truncated to min(D_lhs, D_rhs), the orders at which
// both operands are known. Coefficients beyond the truncation order are
// unknown, not zero; coeff(k) for k > D is a logic error.

#include <gwproj/rational.hpp>

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gwproj {

template <typename R>
struct TruncatedSeries {
  std::vector<R> a;  // a[k] multiplies q^k; size() == order()+1 >= 1

  TruncatedSeries() : a(1) {}
  explicit TruncatedSeries(long order) : a(static_cast<size_t>(order) + 1) {
    if (order < 0) throw std::invalid_argument("series: negative order");
  }
  TruncatedSeries(std::vector<R> coeffs) : a(std::move(coeffs)) {
    if (a.empty()) throw std::invalid_argument("series: empty coefficient list");
  }

  long order() const { return static_cast<long>(a.size()) - 1; }

  const R& coeff(long k) const {
    if (k < 0 || k > order()) throw std::out_of_range("series coeff beyond truncation");
    return a[static_cast<size_t>(k)];
  }
  R& coeff(long k) {
    if (k < 0 || k > order()) throw std::out_of_range("series coeff beyond truncation");
    return a[static_cast<size_t>(k)];
  }

  bool is_zero() const {
    for (const auto& c : a)
      if (!(c == R())) return false;
    return true;
  }

  // Retruncate down to `order` (may only shrink).
  TruncatedSeries truncated(long order) const {
    if (order > this->order()) throw std::out_of_range("series truncated: cannot extend");
    TruncatedSeries r(order);
    std::copy(a.begin(), a.begin() + order + 1, r.a.begin());
    return r;
  }

  friend bool operator==(const TruncatedSeries& x, const TruncatedSeries& y) {
    return x.a == y.a;
  }
};

using QSeries = TruncatedSeries<Rational>;

template <typename R>
TruncatedSeries<R> series_const(const R& c, long order) {
  TruncatedSeries<R> r(order);
  r.a[0] = c;
  return r;
}

inline QSeries series_one(long order) { return series_const(Rational(1), order); }

// q itself (requires order >= 1).
inline QSeries series_q(long order) {
  QSeries r(order);
  r.a[1] = 1;
  return r;
}

template <typename R>
TruncatedSeries<R> operator+(const TruncatedSeries<R>& x, const TruncatedSeries<R>& y) {
  long d = std::min(x.order(), y.order());
  TruncatedSeries<R> r(d);
  for (long k = 0; k <= d; ++k) r.a[k] = x.a[k] + y.a[k];
  return r;
}

template <typename R>
TruncatedSeries<R> operator-(const TruncatedSeries<R>& x, const TruncatedSeries<R>& y) {
  long d = std::min(x.order(), y.order());
  TruncatedSeries<R> r(d);
  for (long k = 0; k <= d; ++k) r.a[k] = x.a[k] - y.a[k];
  return r;
}

template <typename R>
TruncatedSeries<R> operator-(const TruncatedSeries<R>& x) {
  TruncatedSeries<R> r(x.order());
  for (long k = 0; k <= x.order(); ++k) r.a[k] = -x.a[k];
  return r;
}

template <typename R>
TruncatedSeries<R> series_mul(const TruncatedSeries<R>& x, const TruncatedSeries<R>& y) {
  long d = std::min(x.order(), y.order());
  TruncatedSeries<R> r(d);
  for (long i = 0; i <= d; ++i) {
    if (x.a[i] == R()) continue;
    for (long j = 0; i + j <= d; ++j) {
      if (y.a[j] == R()) continue;
      r.a[i + j] += x.a[i] * y.a[j];
    }
  }
  return r;
}

template <typename R>
TruncatedSeries<R> operator*(const TruncatedSeries<R>& x, const TruncatedSeries<R>& y) {
  return series_mul(x, y);
}

template <typename R, typename S>
TruncatedSeries<R> operator*(const S& c, const TruncatedSeries<R>& x) {
  TruncatedSeries<R> r(x.order());
  for (long k = 0; k <= x.order(); ++k) r.a[k] = x.a[k] * c;
  return r;
}

template <typename R>
TruncatedSeries<R>& operator+=(TruncatedSeries<R>& x, const TruncatedSeries<R>& y) {
  x = x + y;
  return x;
}

// Multiplicative inverse; requires invertible constant term.
template <typename R>
TruncatedSeries<R> series_inv(const TruncatedSeries<R>& x) {
  if (x.a[0] == R()) throw std::domain_error("series_inv: constant term is zero");
  long d = x.order();
  TruncatedSeries<R> r(d);
  R c0inv = R(1) / x.a[0];
  r.a[0] = c0inv;
  for (long k = 1; k <= d; ++k) {
    R s{};
    for (long j = 1; j <= k; ++j) s += x.a[j] * r.a[k - j];
    r.a[k] = -c0inv * s;
  }
  return r;
}

// x^e for rational e; requires constant term exactly 1. Standard recurrence
// from x g' = e x' g with g = x^e.
template <typename R>
TruncatedSeries<R> series_fractional_power(const TruncatedSeries<R>& x, const Rational& e) {
  if (!(x.a[0] == R(1)))
    throw std::domain_error("series_fractional_power: constant term must be 1");
  long d = x.order();
  TruncatedSeries<R> g(d);
  g.a[0] = R(1);
  for (long k = 1; k <= d; ++k) {
    R s{};
    for (long j = 1; j <= k; ++j) s += (e * j - (k - j)) * x.a[j] * g.a[k - j];
    g.a[k] = s / k;
  }
  return g;
}

// exp(x); requires zero constant term. g' = x' g.
template <typename R>
TruncatedSeries<R> series_exp(const TruncatedSeries<R>& x) {
  if (!(x.a[0] == R()))
    throw std::domain_error("series_exp: constant term must be 0");
  long d = x.order();
  TruncatedSeries<R> g(d);
  g.a[0] = R(1);
  for (long k = 1; k <= d; ++k) {
    R s{};
    for (long j = 1; j <= k; ++j) s += Rational(j) * x.a[j] * g.a[k - j];
    g.a[k] = s / k;
  }
  return g;
}

// log(x); requires constant term exactly 1. Integrates x'/x.
template <typename R>
TruncatedSeries<R> series_log(const TruncatedSeries<R>& x) {
  if (!(x.a[0] == R(1)))
    throw std::domain_error("series_log: constant term must be 1");
  long d = x.order();
  TruncatedSeries<R> g(d);
  for (long k = 1; k <= d; ++k) {
    R s = Rational(k) * x.a[k];
    for (long j = 1; j < k; ++j) s -= Rational(j) * g.a[j] * x.a[k - j];
    g.a[k] = s / k;
  }
  return g;
}

// Euler operator q d/dq: coefficientwise k * a_k; order is preserved.
template <typename R>
TruncatedSeries<R> euler_D(const TruncatedSeries<R>& x) {
  TruncatedSeries<R> r(x.order());
  for (long k = 1; k <= x.order(); ++k) r.a[k] = Rational(k) * x.a[k];
  return r;
}

// d/dq; the truncation order drops by one.
template <typename R>
TruncatedSeries<R> series_derivative(const TruncatedSeries<R>& x) {
  if (x.order() == 0) throw std::out_of_range("series_derivative: order 0 input");
  TruncatedSeries<R> r(x.order() - 1);
  for (long k = 0; k < x.order(); ++k) r.a[k] = Rational(k + 1) * x.a[k + 1];
  return r;
}

// Multiply by q^k. Coefficients of the result up to the input's order are
// determined by the input, so the order is preserved.
template <typename R>
TruncatedSeries<R> series_shift(const TruncatedSeries<R>& x, long k) {
  if (k < 0) throw std::invalid_argument("series_shift: negative shift");
  TruncatedSeries<R> r(x.order());
  for (long j = k; j <= x.order(); ++j) r.a[j] = x.a[j - k];
  return r;
}

template <typename R>
TruncatedSeries<R> series_pow(const TruncatedSeries<R>& x, long m) {
  if (m < 0) throw std::invalid_argument("series_pow: negative exponent");
  TruncatedSeries<R> r = series_const(R(1), x.order());
  for (long i = 0; i < m; ++i) r = r * x;
  return r;
}

// "D;c0,c1,...,cD" with num/den coefficients.
inline std::string series_str(const QSeries& x) {
  std::string s = std::to_string(x.order());
  s += ';';
  for (long k = 0; k <= x.order(); ++k) {
    if (k) s += ',';
    s += rat_str(x.a[k]);
  }
  return s;
}

inline std::optional<QSeries> series_parse(std::string_view s) {
  auto semi = s.find(';');
  if (semi == std::string_view::npos) return std::nullopt;
  long d = 0;
  try {
    size_t used = 0;
    d = std::stol(std::string(s.substr(0, semi)), &used);
    if (used != semi || d < 0) return std::nullopt;
  } catch (...) {
    return std::nullopt;
  }
  QSeries r(d);
  std::string_view rest = s.substr(semi + 1);
  long k = 0;
  while (true) {
    auto comma = rest.find(',');
    std::string_view tok = (comma == std::string_view::npos) ? rest : rest.substr(0, comma);
    auto v = rat_parse(tok);
    if (!v || k > d) return std::nullopt;
    r.a[k++] = *v;
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (k != d + 1) return std::nullopt;
  return r;
}

}  // namespace gwproj
