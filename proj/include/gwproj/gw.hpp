#pragma once

// Invariant assembly on top of the structure coefficients: the generating
// slice in the descendant variables, direct bracket extraction, the one-point
// genus-one closed form, a plane-curve count oracle, and the vanishing test.

#include <gwproj/coeffs.hpp>

#include <iterator>
#include <map>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace gwproj {

// One bracket query: insertions tau_{b_s} H^{c_s} at genus g, degree d.
struct GWQuery {
  int n = 2;
  int g = 0;
  long d = 0;
  std::vector<std::pair<long, long>> insertions;  // (b_s, c_s)

  int marks() const { return static_cast<int>(insertions.size()); }
};

// Balance of the integrand degree against the virtual dimension:
// sum(b_s + c_s) = nd + (n-4)(1-g) + N.
inline bool dimension_ok(const GWQuery& q) {
  long lhs = 0;
  for (const auto& [b, c] : q.insertions) lhs += b + c;
  return lhs == static_cast<long>(q.n) * q.d +
                    static_cast<long>(q.n - 4) * (1 - q.g) + q.marks();
}

namespace gw_detail {

inline void validate(const GWQuery& q) {
  if (q.n < 2) throw std::invalid_argument("invariant: n must be >= 2");
  if (q.g < 0) throw std::invalid_argument("invariant: negative genus");
  if (q.d < 0) throw std::invalid_argument("invariant: negative degree");
  if (q.marks() < 1)
    throw std::invalid_argument("invariant: needs at least one insertion");
  if (2 * q.g + q.marks() < 3)
    throw std::invalid_argument("invariant: needs 2g+N >= 3");
  for (const auto& [b, c] : q.insertions) {
    if (b < 0) throw std::invalid_argument("invariant: negative descendant power");
    if (c < 0 || c >= q.n)
      throw std::invalid_argument("invariant: H power out of [0,n)");
  }
}

inline Int ipow(long base, long e) {
  Int r = 1;
  for (long i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace gw_detail

// The q^d slice of the descendant kernel F_p, expanded around w = 0:
//   (w+d)^p w^{nd-p} / prod_{r=1}^d (w+r)^n.
// The numerator's zero at w = 0 has order nd-p >= 0, so the slice is an
// honest power series; the d = 0 slice is the constant 1.
inline QSeries descendant_kernel_slice(int n, long p, long d, long order) {
  if (p < 0 || p >= n)
    throw std::invalid_argument("kernel slice: p out of [0,n)");
  if (d == 0) return series_one(order);
  QSeries num(order);
  long shift = n * d - p;
  for (long j = 0; j <= p && shift + j <= order; ++j)
    num.coeff(shift + j) = Rational(binomial(p, j) * gw_detail::ipow(d, p - j));
  QSeries den = series_one(order);
  for (long r = 1; r <= d; ++r) {
    QSeries lin(order);
    lin.coeff(0) = Rational(r);
    if (order >= 1) lin.coeff(1) = Rational(1);
    den = den * series_pow(lin, n);
  }
  return num * series_inv(den);
}

// Direct extraction of one bracket from the coefficient table: sum over the
// degree spent on the table entry, per-slot kernel degrees, and descendant
// shifts b' within the support window.
inline Rational gw_invariant(CoeffCtx& ctx, const GWQuery& q) {
  gw_detail::validate(q);
  if (q.n != ctx.n())
    throw std::invalid_argument("invariant: context built for a different n");
  if (!dimension_ok(q)) return Rational(0);

  const int N = q.marks();
  const long cap = 3L * (q.g - 1) + N;
  if (cap < 0) return Rational(0);

  LVec p(static_cast<size_t>(N), 0), bp(static_cast<size_t>(N), 0);
  Rational total(0);

  auto slot = [&](auto&& self, int s, long spent, long bptot,
                  const Rational& partial) -> void {
    if (s == N) {
      long dprime = q.d - spent;
      Rational nc = ctx.nc_recursive(q.g, p, bp, dprime, 0);
      if (nc != 0) total += partial * nc;
      return;
    }
    const auto [b_s, c_s] = q.insertions[static_cast<size_t>(s)];
    const long chat = q.n - 1 - c_s;
    for (long bps = 0; bps <= b_s && bptot + bps <= cap; ++bps) {
      for (long ds = 0; spent + ds <= q.d; ++ds) {
        long ps = q.n * ds + chat - b_s + bps;
        if (ps < 0) continue;
        if (ps >= q.n) break;
        QSeries sl = descendant_kernel_slice(q.n, ps, ds, b_s - bps);
        Rational f = sl.coeff(b_s - bps);
        if (f == 0) continue;
        p[static_cast<size_t>(s)] = ps;
        bp[static_cast<size_t>(s)] = bps;
        self(self, s + 1, spent + ds, bptot + bps, partial * f);
      }
    }
  };
  slot(slot, 0, 0, 0, Rational(1));
  return total;
}

// One monomial slot of the generating slice: q^d, descendant exponents b
// (the hbar^{-b_s-1} powers), hyperplane exponents e, each e_s in [0,n).
struct ZKey {
  long d = 0;
  LVec b;
  LVec e;
  friend bool operator<(const ZKey& x, const ZKey& y) {
    return std::tie(x.d, x.b, x.e) < std::tie(y.d, y.b, y.e);
  }
  friend bool operator==(const ZKey& x, const ZKey& y) {
    return x.d == y.d && x.b == y.b && x.e == y.e;
  }
};

using ZSlice = std::map<ZKey, Rational>;

// Materialize the generating slice through degree d_max and descendant depth
// b_max: every table entry is convolved with its per-slot kernel expansions,
// and each slot lands at hyperplane exponent p - n*d_slot + w-power, with
// exponents at n and beyond truncated away.
inline ZSlice assemble_Z(CoeffCtx& ctx, int g, int N, long d_max, long b_max) {
  if (2 * g + N < 3)
    throw std::invalid_argument("generating slice: needs 2g+N >= 3");
  if (d_max < 0 || b_max < 0)
    throw std::invalid_argument("generating slice: negative window");
  const int n = ctx.n();
  const long cap = 3L * (g - 1) + N;

  ZSlice out;
  LVec p(static_cast<size_t>(N), 0), b(static_cast<size_t>(N), 0);

  auto for_tables = [&](auto&& visit) {
    auto loop_b = [&](auto&& self, int s, long left) -> void {
      if (s == N) {
        auto loop_p = [&](auto&& inner, int r) -> void {
          if (r == N) {
            for (long dprime = 0; dprime <= d_max; ++dprime) {
              Rational nc = ctx.nc_recursive(g, p, b, dprime, 0);
              if (nc != 0) visit(dprime, nc);
            }
            return;
          }
          for (long v = 0; v < n; ++v) {
            p[static_cast<size_t>(r)] = v;
            inner(inner, r + 1);
          }
        };
        loop_p(loop_p, 0);
        return;
      }
      for (long v = 0; v <= left && v <= b_max; ++v) {
        b[static_cast<size_t>(s)] = v;
        self(self, s + 1, left - v);
      }
      b[static_cast<size_t>(s)] = 0;
    };
    loop_b(loop_b, 0, cap);
  };

  for_tables([&](long dprime, const Rational& nc) {
    ZKey key;
    key.b.assign(static_cast<size_t>(N), 0);
    key.e.assign(static_cast<size_t>(N), 0);
    auto slots = [&](auto&& self, int s, long spent, const Rational& partial)
        -> void {
      if (s == N) {
        key.d = spent;
        out[key] += partial;
        return;
      }
      long ps = p[static_cast<size_t>(s)];
      for (long ds = 0; spent + ds <= d_max; ++ds) {
        long kmax = b_max - b[static_cast<size_t>(s)];
        if (kmax < 0) break;
        QSeries sl = descendant_kernel_slice(n, ps, ds, kmax);
        for (long k = 0; k <= kmax; ++k) {
          long e = ps - n * ds + k;
          if (e < 0) continue;
          if (e >= n) break;
          Rational f = sl.coeff(k);
          if (f == 0) continue;
          key.b[static_cast<size_t>(s)] = b[static_cast<size_t>(s)] + k;
          key.e[static_cast<size_t>(s)] = e;
          self(self, s + 1, spent + ds, partial * f);
        }
      }
    };
    slots(slots, 0, dprime, nc);
  });

  for (auto it = out.begin(); it != out.end();)
    it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

// One-point genus-one closed form: the w^{n-1-c} coefficient of
//   (n (1+2d-n+2w) / 48) (d+w)^{n-2} / prod_{r=1}^d (r+w)^n.
inline Rational genus1_onepoint(int n, long d, long c) {
  if (n < 2) throw std::invalid_argument("one-point value: n must be >= 2");
  if (d < 0) throw std::invalid_argument("one-point value: negative degree");
  if (c < 0 || c >= n)
    throw std::invalid_argument("one-point value: H power out of [0,n)");
  const long order = n - 1 - c;
  QSeries lin(order);
  lin.coeff(0) = Rational(static_cast<long>(n) * (1 + 2 * d - n), 48);
  if (order >= 1) lin.coeff(1) = Rational(n, 24);
  QSeries mid(order);
  for (long j = 0; j <= n - 2 && j <= order; ++j)
    mid.coeff(j) = Rational(binomial(n - 2, j) * gw_detail::ipow(d, n - 2 - j));
  QSeries den = series_one(order);
  for (long r = 1; r <= d; ++r) {
    QSeries f(order);
    f.coeff(0) = Rational(r);
    if (order >= 1) f.coeff(1) = Rational(1);
    den = den * series_pow(f, n);
  }
  return (lin * mid * series_inv(den)).coeff(order);
}

// Plane-curve counts N_d through the standard quadratic recursion; the
// independent yardstick for the genus-zero primary values at n = 3.
inline Rational wdvv_oracle_p2(long d) {
  if (d < 1) throw std::invalid_argument("plane count: degree must be >= 1");
  static std::map<long, Rational> memo{{1, Rational(1)}};
  if (auto it = memo.find(d); it != memo.end()) return it->second;
  Rational total(0);
  for (long d1 = 1; d1 < d; ++d1) {
    long d2 = d - d1;
    Rational pair = wdvv_oracle_p2(d1) * wdvv_oracle_p2(d2);
    Int a = gw_detail::ipow(d1, 2) * gw_detail::ipow(d2, 2) *
            binomial(3 * d - 4, 3 * d1 - 2);
    Int b = gw_detail::ipow(d1, 3) * d2 * binomial(3 * d - 4, 3 * d1 - 1);
    total += pair * Rational(a - b);
  }
  memo.emplace(d, total);
  return total;
}

// Degree-zero route through the Hodge bundle: the Euler class of the twisted
// dual pairs each lambda monomial with a complementary hyperplane power, so
// the bracket collapses to a weighted descendant integral.
inline Rational gw_degree_zero(HodgeEngine& hodge, const GWQuery& q) {
  gw_detail::validate(q);
  if (q.d != 0)
    throw std::invalid_argument("degree-zero route: query has positive degree");
  if (!dimension_ok(q)) return Rational(0);
  const int N = q.marks();
  LVec b;
  for (const auto& ins : q.insertions) b.push_back(ins.first);
  long need = 3L * (q.g - 1) + N - vec_sum(b);
  Rational total(0);
  for (const auto& [I, cval] : compute_CgnI(q.g, q.n))
    if (weighted_size(I) == need) total += cval * hodge.bracket(q.g, I, b);
  return total;
}

// Support-window vanishing test: when some subset of low insertions carries
// more descendant weight than the window allows, the bracket must be zero.
// Returns the verdict of the actual evaluation so callers can assert it.
inline bool check_vanishing(CoeffCtx& ctx, const GWQuery& q,
                            const std::vector<int>& S) {
  gw_detail::validate(q);
  long bsum = 0;
  std::vector<bool> seen(static_cast<size_t>(q.marks()) + 1, false);
  for (int s : S) {
    if (s < 1 || s > q.marks() || seen[static_cast<size_t>(s)])
      throw std::invalid_argument("vanishing test: S is not a subset of [N]");
    seen[static_cast<size_t>(s)] = true;
    const auto& [b, c] = q.insertions[static_cast<size_t>(s - 1)];
    if (b + c >= q.n)
      throw std::invalid_argument("vanishing test: insertion too deep for S");
    bsum += b;
  }
  if (bsum <= 3L * (q.g - 1) + q.marks())
    throw std::invalid_argument("vanishing test: window not exceeded");
  return gw_invariant(ctx, q) == Rational(0);
}

}  // namespace gwproj
