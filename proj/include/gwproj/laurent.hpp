#pragma once

// Sparse Laurent polynomials over Q in one distinguished symbol, with an
// optional exponent window. A window [lo, hi] means only exponents in that
// inclusive range are retained; terms produced outside it are discarded on
// normalization. Operations on two operands require the same symbol and
// intersect their windows.

#include <gwproj/rational.hpp>
#include <gwproj/series.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace gwproj {

enum class Symbol { u, w, H, hbar_inv };

inline const char* symbol_name(Symbol s) {
  switch (s) {
    case Symbol::u: return "u";
    case Symbol::w: return "w";
    case Symbol::H: return "H";
    case Symbol::hbar_inv: return "1/h";
  }
  return "?";
}

struct ExpWindow {
  long lo = 0, hi = 0;  // inclusive
  friend bool operator==(const ExpWindow&, const ExpWindow&) = default;
};

struct LaurentPoly {
  Symbol sym = Symbol::u;
  std::map<long, Rational> coef;  // exponent -> coefficient, zeros erased
  std::optional<ExpWindow> window;

  LaurentPoly() = default;
  explicit LaurentPoly(Symbol s) : sym(s) {}

  bool in_window(long e) const {
    return !window || (window->lo <= e && e <= window->hi);
  }

  void add_term(long e, const Rational& c) {
    if (c == 0 || !in_window(e)) return;
    auto it = coef.find(e);
    if (it == coef.end()) {
      coef.emplace(e, c);
    } else {
      it->second += c;
      if (it->second == 0) coef.erase(it);
    }
  }

  Rational coeff(long e) const {
    auto it = coef.find(e);
    return it == coef.end() ? Rational(0) : it->second;
  }

  bool is_zero() const { return coef.empty(); }

  friend bool operator==(const LaurentPoly& x, const LaurentPoly& y) {
    return x.sym == y.sym && x.coef == y.coef;
  }
};

inline LaurentPoly lp_const(Symbol s, const Rational& c) {
  LaurentPoly r(s);
  r.add_term(0, c);
  return r;
}

inline LaurentPoly lp_monomial(Symbol s, long e, const Rational& c = Rational(1)) {
  LaurentPoly r(s);
  r.add_term(e, c);
  return r;
}

namespace detail {
inline std::optional<ExpWindow> window_meet(const std::optional<ExpWindow>& a,
                                            const std::optional<ExpWindow>& b) {
  if (!a) return b;
  if (!b) return a;
  return ExpWindow{std::max(a->lo, b->lo), std::min(a->hi, b->hi)};
}
inline void require_same_symbol(const LaurentPoly& x, const LaurentPoly& y) {
  if (x.sym != y.sym) throw std::invalid_argument("laurent: symbol mismatch");
}
}  // namespace detail

inline LaurentPoly operator+(const LaurentPoly& x, const LaurentPoly& y) {
  detail::require_same_symbol(x, y);
  LaurentPoly r(x.sym);
  r.window = detail::window_meet(x.window, y.window);
  for (const auto& [e, c] : x.coef) r.add_term(e, c);
  for (const auto& [e, c] : y.coef) r.add_term(e, c);
  return r;
}

inline LaurentPoly operator-(const LaurentPoly& x) {
  LaurentPoly r = x;
  for (auto& [e, c] : r.coef) c = -c;
  return r;
}

inline LaurentPoly operator-(const LaurentPoly& x, const LaurentPoly& y) {
  return x + (-y);
}

inline LaurentPoly operator*(const LaurentPoly& x, const LaurentPoly& y) {
  detail::require_same_symbol(x, y);
  LaurentPoly r(x.sym);
  r.window = detail::window_meet(x.window, y.window);
  for (const auto& [e1, c1] : x.coef)
    for (const auto& [e2, c2] : y.coef) r.add_term(e1 + e2, c1 * c2);
  return r;
}

inline LaurentPoly operator*(const Rational& c, const LaurentPoly& x) {
  LaurentPoly r(x.sym);
  r.window = x.window;
  for (const auto& [e, v] : x.coef) r.add_term(e, c * v);
  return r;
}

inline LaurentPoly& operator+=(LaurentPoly& x, const LaurentPoly& y) {
  x = x + y;
  return x;
}

// d/dx on the symbol: c x^e -> c e x^{e-1}.
inline LaurentPoly lp_derivative(const LaurentPoly& x) {
  LaurentPoly r(x.sym);
  r.window = x.window;
  for (const auto& [e, c] : x.coef) r.add_term(e - 1, c * e);
  return r;
}

// Clamp to a window, dropping outside terms.
inline LaurentPoly lp_truncate_window(const LaurentPoly& x, ExpWindow w) {
  LaurentPoly r(x.sym);
  r.window = detail::window_meet(x.window, w);
  for (const auto& [e, c] : x.coef) r.add_term(e, c);
  return r;
}

// Substitute a power series for the symbol. Negative exponents require an
// invertible constant term.
inline QSeries lp_eval_series(const LaurentPoly& x, const QSeries& f) {
  long d = f.order();
  QSeries out(d);
  if (x.coef.empty()) return out;
  QSeries finv(0);
  if (x.coef.begin()->first < 0) finv = series_inv(f);
  // Walk exponents from 0 outward so powers build incrementally.
  QSeries pos = series_one(d), neg = series_one(d);
  long ep = 0, en = 0;
  for (auto it = x.coef.rbegin(); it != x.coef.rend(); ++it) {
    const auto& [e, c] = *it;
    if (e >= 0) continue;
    while (en > e) {
      neg = neg * finv;
      --en;
    }
    out += c * neg;
  }
  for (const auto& [e, c] : x.coef) {
    if (e < 0) continue;
    while (ep < e) {
      pos = pos * f;
      ++ep;
    }
    out += c * pos;
  }
  return out;
}

inline std::string lp_str(const LaurentPoly& x) {
  if (x.coef.empty()) return "0";
  std::string s;
  for (const auto& [e, c] : x.coef) {
    if (!s.empty()) s += " + ";
    s += rat_str(c);
    if (e != 0) {
      s += '*';
      s += symbol_name(x.sym);
      s += '^';
      s += std::to_string(e);
    }
  }
  return s;
}

}  // namespace gwproj
