#pragma once

// Hypergeometric series attached to a degree-n Fermat-type datum and the
// differential operators acting on them.
//
// Throughout, q is the algebraic coordinate, D = q d/dq, and
//     L = (1+q)^{1/n},            u = L^n = 1+q.
//
// The operator family is generated by the table H_{m,j}(u):
//     H_{m,j} = 0 unless 0 <= j <= m,   H_{0,0} = 1,
//     H_{m,j} = H_{m-1,j} + (u-1) ( d/du + (m-j)/(n u) ) H_{m-1,j-1},
// from which the degree-k operators are
//     Op_k = L^n * sum_{i=0..k} binom(n,i) H_{n-i,k-i}(L^n) D^i.
//
// The coefficient functions Phi_b in Q[[q]] solve the triangular system
//     Op_1 Phi_b + sum_{j=2..n} L^{1-j} Op_j Phi_{b+1-j} = 0,  Phi_{<0} = 0,
// with Phi_0 = L^{-(n-1)/2} and nonzero seed only at b = 0; xi solves
// 1 + D xi = L with xi(0) = 0. The two-index family
//     Phi_{p;0..} :  Phi_{0;b} = Phi_b,  Phi_{p;b} = L Phi_{p-1;b} + D Phi_{p-1;b-1}
// enters every vertex factor downstream.
//
// Direct expansions of the same data:
//     F(w,q)   = sum_d q^d w^{nd} / prod_{r=1..d} ((w+r)^n - w^n)
//     F_p(w,q) = sum_d q^d (w+d)^p w^{nd-p} / prod_{r=1..d} (w+r)^n
// expand_Fp gives the Taylor table in 1/w per q-degree; the w = infinity
// expansion of F organizes the same coefficients against
//     F ~ e^{xi w} sum_b Phi_b w^{-b},
// which asymptotic_consistency checks degree by degree.

#include <gwproj/laurent.hpp>
#include <gwproj/rational.hpp>
#include <gwproj/series.hpp>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gwproj {

// H_{m,j} as Laurent polynomials in u, built on demand.
class HTable {
 public:
  explicit HTable(int n) : n_(n) {}

  const LaurentPoly& get(int m, int j) {
    auto key = std::make_pair(m, j);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    LaurentPoly v(Symbol::u);
    if (m >= 0 && j >= 0 && j <= m) {
      if (m == 0) {
        v.add_term(0, 1);
      } else {
        v = get(m - 1, j);
        const LaurentPoly& prev = get(m - 1, j - 1);
        LaurentPoly um1(Symbol::u);  // u - 1
        um1.add_term(1, 1);
        um1.add_term(0, -1);
        LaurentPoly inner = lp_derivative(prev);
        if (m != j) {
          // + (m-j)/(n u) * prev
          LaurentPoly scaled(Symbol::u);
          for (const auto& [e, c] : prev.coef)
            scaled.add_term(e - 1, c * Rational(m - j, n_));
          inner += scaled;
        }
        v += um1 * inner;
      }
    }
    return memo_.emplace(key, std::move(v)).first->second;
  }

 private:
  int n_;
  std::map<std::pair<int, int>, LaurentPoly> memo_;
};

inline LaurentPoly compute_H(int n, int m, int j) {
  HTable t(n);
  return t.get(m, j);
}

// All series data attached to (n, order): built once, then read-only.
struct MirrorData {
  int n = 2;
  long order = 0;  // q-truncation of every stored series
  long b_max = 0;  // Phi_b available for 0 <= b <= b_max

  QSeries u;   // 1 + q
  QSeries L;   // (1+q)^{1/n}
  QSeries xi;  // D xi = L - 1, xi(0) = 0

  std::vector<QSeries> phi;                 // phi[b], 0 <= b <= b_max
  std::vector<std::vector<QSeries>> phipb;  // phipb[p][b], 0 <= p <= n-1

  // (1+q)^{e/n} cache used by the solver and by vertex factors.
  mutable std::map<long, QSeries> lpow;

  const QSeries& L_pow(long e) const {
    auto it = lpow.find(e);
    if (it != lpow.end()) return it->second;
    QSeries v = series_fractional_power(u, Rational(e, n));
    return lpow.emplace(e, std::move(v)).first->second;
  }

  const QSeries& Phi(long b) const { return phi[static_cast<size_t>(b)]; }
  const QSeries& Phi_pb(long p, long b) const {
    return phipb[static_cast<size_t>(p)][static_cast<size_t>(b)];
  }
};

// Op_k applied to f: L^n sum_{i=0..k} binom(n,i) H_{n-i,k-i}(L^n) D^i f.
inline QSeries apply_Lk(const MirrorData& md, int k, const QSeries& f) {
  HTable ht(md.n);
  QSeries acc(std::min(f.order(), md.order));
  QSeries Dif = f.truncated(acc.order());
  for (int i = 0; i <= k; ++i) {
    if (i > 0) Dif = euler_D(Dif);
    Rational bin(binomial(md.n, i));
    if (bin == 0) continue;
    const LaurentPoly& h = ht.get(md.n - i, k - i);
    if (h.is_zero()) continue;
    QSeries hser = lp_eval_series(h, md.u.truncated(acc.order()));
    acc += bin * (hser * Dif);
  }
  return md.u.truncated(acc.order()) * acc;
}

// Solve Op_1 f = rhs for f with prescribed constant term. Coefficient d of
// Op_1 f is  n d f_d + (n(d-1) + (n-1)/2) f_{d-1}.
inline QSeries solve_L1(const MirrorData& md, const QSeries& rhs, const Rational& f0) {
  long d = rhs.order();
  QSeries f(d);
  f.a[0] = f0;
  int n = md.n;
  for (long k = 1; k <= d; ++k)
    f.a[k] = (rhs.a[k] - (Rational(n * (k - 1)) + Rational(n - 1, 2)) * f.a[k - 1]) /
             Rational(n * k);
  return f;
}

inline MirrorData build_mirror(int n, long order, long b_max) {
  if (n < 2) throw std::invalid_argument("build_mirror: n must be at least 2");
  MirrorData md;
  md.n = n;
  md.order = order;
  md.b_max = b_max;
  md.u = series_one(order);
  if (order >= 1) md.u.a[1] = 1;
  md.L = series_fractional_power(md.u, Rational(1, n));

  // xi from D xi = L - 1.
  md.xi = QSeries(order);
  for (long d = 1; d <= order; ++d) md.xi.a[d] = md.L.a[d] / d;

  // Phi_b, b = 0..b_max, each solved from the ones below it. The b = 0 row
  // has zero right side and unit constant term, which reproduces the closed
  // form (1+q)^{-(n-1)/2n}.
  md.phi.reserve(static_cast<size_t>(b_max) + 1);
  for (long b = 0; b <= b_max; ++b) {
    QSeries rhs(order);
    for (int j = 2; j <= n && j <= b + 1; ++j) {
      const QSeries& lower = md.phi[static_cast<size_t>(b + 1 - j)];
      rhs = rhs - md.L_pow(1 - j) * apply_Lk(md, j, lower);
    }
    if (!(rhs.a[0] == 0))
      throw std::logic_error("build_mirror: inconsistent constant term");
    md.phi.push_back(solve_L1(md, rhs, b == 0 ? Rational(1) : Rational(0)));
  }

  // Phi_{p;b} for p = 0..n-1.
  md.phipb.assign(static_cast<size_t>(n), {});
  md.phipb[0] = md.phi;
  for (int p = 1; p < n; ++p) {
    auto& row = md.phipb[static_cast<size_t>(p)];
    const auto& prev = md.phipb[static_cast<size_t>(p - 1)];
    row.reserve(static_cast<size_t>(b_max) + 1);
    for (long b = 0; b <= b_max; ++b) {
      QSeries v = md.L * prev[static_cast<size_t>(b)];
      if (b > 0) v += euler_D(prev[static_cast<size_t>(b - 1)]);
      row.push_back(std::move(v));
    }
  }
  return md;
}

inline QSeries compute_phi_pb(const MirrorData& md, long p, long b) {
  if (p == 0) return md.Phi(b);
  QSeries v = md.L * compute_phi_pb(md, p - 1, b);
  if (b > 0) v += euler_D(compute_phi_pb(md, p - 1, b - 1));
  return v;
}

// Taylor table of F_p at w = 0 per q-degree: entry(d, b) is the coefficient
// of q^d w^b in (w+d)^p w^{nd-p} / prod_{r=1..d} (w+r)^n, 0 <= b <= b_max.
struct FpTable {
  int n = 2, p = 0;
  long d_max = 0, b_max = 0;
  std::vector<std::vector<Rational>> c;  // c[d][b]

  const Rational& entry(long d, long b) const {
    static const Rational zero(0);
    if (d < 0 || d > d_max || b < 0 || b > b_max) return zero;
    return c[static_cast<size_t>(d)][static_cast<size_t>(b)];
  }
};

inline FpTable expand_Fp(int n, int p, long d_max, long b_max) {
  if (p < 0 || p >= n) throw std::invalid_argument("expand_Fp: need 0 <= p < n");
  FpTable t;
  t.n = n;
  t.p = p;
  t.d_max = d_max;
  t.b_max = b_max;
  t.c.resize(static_cast<size_t>(d_max) + 1);
  for (long d = 0; d <= d_max; ++d) {
    QSeries row(b_max);  // series in w
    if (d == 0) {
      row.a[0] = 1;  // (w+0)^p w^{-p} with the 0^0 = 1 reading at p = 0
    } else {
      // (w+d)^p = sum_i binom(p,i) d^{p-i} w^i
      Int dpow = 1;
      for (int i = p; i >= 0; --i) {
        if (i <= b_max) row.a[i] = Rational(binomial(p, i)) * Rational(dpow);
        dpow *= d;
      }
      // prod_{r=1..d} (w+r)^{-n} = prod r^{-n} (1+w/r)^{-n}
      Rational scale(1);
      for (long r = 1; r <= d; ++r) {
        QSeries base = series_one(b_max);
        base.a[1] = Rational(1, r);
        row = row * series_fractional_power(base, Rational(-n));
        Rational rn(1);
        for (int j = 0; j < n; ++j) rn *= r;
        scale /= rn;
      }
      row = scale * row;
      // w^{nd-p} shift: nd - p > 0 for d >= 1, drop powers beyond b_max
      row = series_shift(row, n * d - p);
    }
    t.c[static_cast<size_t>(d)] = std::move(row.a);
  }
  return t;
}

// Expansion of F at w = infinity: with v = 1/w,
//   q^d term of F = v^d / (n^d d!) * prod_{r=1..d} g_r(v)^{-1},
//   g_r(v) = ((1+rv)^n - 1) / (n r v) = sum_{j=1..n} binom(n,j) (rv)^{j-1} / n.
// entry(d, b) is the coefficient of q^d w^{-b}; rows carry b in [-d, b_max].
struct FInfTable {
  int n = 2;
  long d_max = 0, b_max = 0;
  std::vector<std::vector<Rational>> row;  // row[d][j] multiplies v^j, j = b + d

  Rational entry(long d, long b) const {
    if (d < 0 || d > d_max) return Rational(0);
    long j = b + d;
    const auto& r = row[static_cast<size_t>(d)];
    if (j < 0 || j >= static_cast<long>(r.size())) return Rational(0);
    return r[static_cast<size_t>(j)];
  }
};

inline FInfTable expand_F_at_infinity(int n, long d_max, long b_max) {
  FInfTable t;
  t.n = n;
  t.d_max = d_max;
  t.b_max = b_max;
  t.row.resize(static_cast<size_t>(d_max) + 1);
  for (long d = 0; d <= d_max; ++d) {
    long vord = b_max + d;
    QSeries acc = series_one(vord);
    for (long r = 1; r <= d; ++r) {
      QSeries g(vord);
      for (int j = 1; j <= n; ++j) {
        if (j - 1 > vord) break;
        Rational rj(1);
        for (int i = 0; i < j - 1; ++i) rj *= r;
        g.a[j - 1] = Rational(binomial(n, j)) * rj / n;
      }
      acc = acc * series_inv(g);
    }
    Rational scale = Rational(1) / Rational(factorial(d));
    for (long i = 0; i < d; ++i) scale /= n;
    acc = scale * acc;
    t.row[static_cast<size_t>(d)] = std::move(acc.a);
  }
  return t;
}

struct ConsistencyReport {
  bool ok = true;
  std::string detail;  // first mismatch, when not ok
};

// Checks [q^d w^{-b}] F == [q^d w^{-b}] e^{xi w} sum_k Phi_k w^{-k}
// for all 0 <= d <= d_max and -d <= b <= b_max.
inline ConsistencyReport asymptotic_consistency(int n, long d_max, long b_max) {
  FInfTable f = expand_F_at_infinity(n, d_max, b_max);
  MirrorData md = build_mirror(n, d_max, b_max + d_max);
  // xi^k / k! as series, k = 0..d_max (w-exponent k needs k <= d + b caps).
  std::vector<QSeries> xipow;
  xipow.push_back(series_one(d_max));
  for (long k = 1; k <= d_max; ++k)
    xipow.push_back(Rational(1, k) * (xipow.back() * md.xi));
  ConsistencyReport rep;
  for (long d = 0; d <= d_max; ++d) {
    for (long b = -d; b <= b_max; ++b) {
      // [q^d w^{-b}] of e^{xi w} sum Phi_k w^{-k}: the w^{-b} piece collects
      // xi^k/k! against Phi_{k+b}, and xi^k starts at q^k.
      Rational rhs(0);
      for (long k = std::max(0L, -b); k <= d; ++k) {
        const QSeries& xk = xipow[static_cast<size_t>(k)];
        const QSeries& ph = md.Phi(k + b);
        for (long j = k; j <= d; ++j)
          rhs += xk.a[static_cast<size_t>(j)] * ph.a[static_cast<size_t>(d - j)];
      }
      Rational lhs = f.entry(d, b);
      if (lhs != rhs) {
        rep.ok = false;
        rep.detail = "mismatch at d=" + std::to_string(d) + " b=" + std::to_string(b) +
                     ": direct " + rat_str(lhs) + " vs asymptotic " + rat_str(rhs);
        return rep;
      }
    }
  }
  return rep;
}

}  // namespace gwproj
