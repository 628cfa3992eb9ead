#pragma once

// Generalized Hodge-psi brackets and the coefficient tables built from them.
//
// For g >= 0, a tuple I = (i_1,...,i_g) selects the Hodge monomial
// lambda_{g;I} = prod_k lambda_k^{i_k}, with weight |I| = sum i_k and size
// ||I|| = sum k i_k. Writing mu_g(I) = 3(g-1) - ||I||, the bracket of a
// tuple b = (b_1,...,b_m) is
//     << lambda_{g;I} ; tau_b >>
//       = integral over Mbar_{g,|b|-mu} of lambda_{g;I} psi_1^{b_1}...psi_m^{b_m}
//         (the remaining |b| - mu - m points carry psi^0)   if |b| >= mu + m,
//       = 0                                                 otherwise,
// and << lambda ; ttau_b >> = (prod b_k!) << lambda ; tau_b >>.
//
// Genus 0 and 1 admit closed forms. Higher genus reduces by the string and
// dilaton moves
//     << tau_{b,0} >> = sum_i << tau_{b - e_i} >>,
//     << tau_{b,1} >> = (|b| + 1 - g + ||I||) << tau_b >>
// down to dimension-exact tuples with every entry >= 2, whose values are
// externally supplied seed integrals. The same engine run on genus <= 1 is
// an independent cross-check of the closed forms.
//
// The symmetric coefficients C_{I;eps} linearize the bracket,
//     << lambda_{g;I} ; tau_b >> = sum_{|eps| <= mu+m} C_{I;eps}
//                                   binom(|b|-|eps|; b-eps)     (|b| >= mu+m),
// and satisfy: C unchanged under appending eps_k = 0; appending a 1
// multiplies by (|eps| + ||I|| - g) except at (g,I) = (1,(0)), |eps| <= 1;
// C_{I;eps} = 0 whenever some subset S with 2g + |S| >= 3 has
// |eps|_S > mu + |S|. These determine everything from the m = 0 column.
//
// From C, the alternating sums over a slot profile c = (c_1, c_2, ...)
// (c_r slots of cap r, |c| = sum c_r, ||c|| = sum r c_r) are
//     A^{(g,eps)}_{I;c} = (prod eps_k!) sum_{eps'} C_{I;eps eps'}
//         (mu+m+|c|-|eps|-|eps'|)! prod_{(r,j)} eps'_{r,j}! binom(r, eps'_{r,j})
// over slot tuples eps' with |eps| + |eps'| <= mu + m + |c|; the hatted
// variant shifts the profile by one slot, A-hat at (c_1, c_2, ...) reads A at
// (0, c_1, c_2, ...) divided by prod eps_k!.

#include <gwproj/rational.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace gwproj {

using LVec = std::vector<long>;

inline long vec_sum(const LVec& v) {
  long s = 0;
  for (long x : v) s += x;
  return s;
}

// ||I|| = sum k i_k  (and for slot profiles, ||c|| = sum r c_r).
inline long weighted_size(const LVec& I) {
  long s = 0;
  for (size_t k = 0; k < I.size(); ++k) s += static_cast<long>(k + 1) * I[k];
  return s;
}

inline long mu_of(int g, const LVec& I) { return 3 * (g - 1) - weighted_size(I); }

struct MissingSeed : std::runtime_error {
  int g;
  LVec I, b;
  MissingSeed(int g_, LVec I_, LVec b_)
      : std::runtime_error(format(g_, I_, b_)), g(g_), I(std::move(I_)), b(std::move(b_)) {}
  static std::string format(int g, const LVec& I, const LVec& b) {
    std::string s = "missing seed integral: g=" + std::to_string(g) + " I=(";
    for (size_t k = 0; k < I.size(); ++k) s += (k ? "," : "") + std::to_string(I[k]);
    s += ") b=(";
    for (size_t k = 0; k < b.size(); ++k) s += (k ? "," : "") + std::to_string(b[k]);
    return s + ")";
  }
};

// Seed key: (g, I, b sorted descending, every entry >= 2, |b| = mu + m).
using SeedKey = std::tuple<int, LVec, LVec>;
using SeedTable = std::map<SeedKey, Rational>;

class HodgeEngine {
 public:
  HodgeEngine() = default;
  explicit HodgeEngine(SeedTable seeds) : seeds_(std::move(seeds)) {}

  // << lambda_{g;I} ; tau_b >>, closed forms at genus <= 1, seeded reduction above.
  Rational bracket(int g, const LVec& I, const LVec& b) {
    check_shape(g, I);
    if (g <= 1) return bracket_closed(g, I, b);
    return bracket_reduced(g, I, b);
  }

  // Same values through the string/dilaton engine regardless of genus.
  Rational bracket_reduced(int g, const LVec& I, const LVec& b) {
    check_shape(g, I);
    LVec bs = b;
    std::sort(bs.begin(), bs.end(), std::greater<>());
    return reduce(g, I, std::move(bs));
  }

  // << lambda_{g;I} ; ttau_b >> = prod b_k! times the bracket.
  Rational hodge_integral(int g, const LVec& I, const LVec& b) {
    Rational v = bracket(g, I, b);
    if (v == 0) return v;
    for (long x : b) v *= Rational(factorial(x));
    return v;
  }

  // C_{I;eps}; symmetric in eps.
  Rational C(int g, const LVec& I, const LVec& eps) {
    check_shape(g, I);
    LVec es = eps;
    std::sort(es.begin(), es.end(), std::greater<>());
    return C_sorted(g, I, std::move(es));
  }

  // A^{(g,eps)}_{I;c}; symmetric in eps, c is a slot profile (c[r-1] slots of cap r).
  Rational A(int g, const LVec& I, const LVec& eps, const LVec& c) {
    check_shape(g, I);
    LVec es = eps;
    std::sort(es.begin(), es.end(), std::greater<>());
    AKey key{g, I, es, c};
    if (auto it = a_memo_.find(key); it != a_memo_.end()) return it->second;

    long m = static_cast<long>(es.size());
    long mu = mu_of(g, I);
    long cnum = vec_sum(c);
    long budget = mu + m + cnum;
    Rational total(0);
    if (budget >= 0 && vec_sum(es) <= budget) {
      // slot caps: c[r-1] slots each ranging 0..r
      std::vector<long> caps;
      for (size_t r1 = 0; r1 < c.size(); ++r1)
        for (long j = 0; j < c[r1]; ++j) caps.push_back(static_cast<long>(r1 + 1));
      LVec epsp(caps.size(), 0);
      Rational acc;
      std::function<void(size_t, long, Rational)> rec = [&](size_t idx, long used,
                                                            Rational factor) {
        if (idx == caps.size()) {
          LVec full = es;
          full.insert(full.end(), epsp.begin(), epsp.end());
          Rational cv = C(g, I, full);
          if (cv == 0) return;
          total += cv * Rational(factorial(budget - used)) * factor;
          return;
        }
        for (long v = 0; v <= caps[idx] && used + v <= budget; ++v) {
          epsp[idx] = v;
          rec(idx + 1, used + v,
              factor * Rational(factorial(v)) * Rational(binomial(caps[idx], v)));
        }
        epsp[idx] = 0;
      };
      long used0 = vec_sum(es);
      rec(0, used0, Rational(1));
      for (long e : es) total *= Rational(factorial(e));
    }
    a_memo_.emplace(std::move(key), total);
    return total;
  }

  // Hatted variant: slot profile shifted by one, eps factorials divided out.
  Rational A_hat(int g, const LVec& I, const LVec& eps, const LVec& c) {
    LVec shifted(c.size() + 1, 0);
    for (size_t r1 = 0; r1 < c.size(); ++r1) shifted[r1 + 1] = c[r1];
    Rational v = A(g, I, eps, shifted);
    if (v == 0) return v;
    for (long e : eps) v /= Rational(factorial(e));
    return v;
  }

  // Defining alternating sum for A^{(g)}_{I,b;c} over slot tuples b'.
  Rational A_def(int g, const LVec& I, const LVec& b, const LVec& c) {
    check_shape(g, I);
    long m = static_cast<long>(b.size());
    long mu = mu_of(g, I);
    long cnum = vec_sum(c);
    std::vector<long> caps;
    for (size_t r1 = 0; r1 < c.size(); ++r1)
      for (long j = 0; j < c[r1]; ++j) caps.push_back(static_cast<long>(r1 + 1));
    Rational total(0);
    LVec bp(caps.size(), 0);
    std::function<void(size_t, long, Rational)> rec = [&](size_t idx, long bpsum,
                                                          Rational binfac) {
      if (idx == caps.size()) {
        long arg = vec_sum(b) + bpsum - mu - m - cnum;
        if (arg < 0) return;  // bracket vanishes below the dimension gate
        LVec full = b;
        full.insert(full.end(), bp.begin(), bp.end());
        Rational hv = hodge_integral(g, I, full);
        if (hv == 0) return;
        Rational term = hv / Rational(factorial(arg)) * binfac;
        if (bpsum % 2) term = -term;
        total += term;
        return;
      }
      for (long v = 0; v <= caps[idx]; ++v) {
        bp[idx] = v;
        rec(idx + 1, bpsum + v, binfac * Rational(binomial(caps[idx], v)));
      }
      bp[idx] = 0;
    };
    rec(0, 0, Rational(1));
    return total;
  }

  // Finite-difference form of the same quantity:
  //   (-1)^{||c||} sum_{eps <= b, |eps| <= mu+m} A^{(g,eps)}_{I;c}
  //       binom(|b|-|eps|, mu+m+|c|-||c||-|eps|) prod binom(b_k, eps_k).
  Rational A_from_eps(int g, const LVec& I, const LVec& b, const LVec& c) {
    check_shape(g, I);
    long m = static_cast<long>(b.size());
    long mu = mu_of(g, I);
    long cnum = vec_sum(c), csz = weighted_size(c);
    Rational total(0);
    LVec eps(b.size(), 0);
    std::function<void(size_t, long)> rec = [&](size_t idx, long esum) {
      if (esum > mu + m) return;
      if (idx == b.size()) {
        Rational av = A(g, I, eps, c);
        if (av == 0) return;
        Rational term = av * Rational(binomial(vec_sum(b) - esum, mu + m + cnum - csz - esum));
        for (size_t k = 0; k < b.size(); ++k)
          term *= Rational(binomial(b[k], eps[k]));
        total += term;
        return;
      }
      for (long v = 0; v <= b[idx]; ++v) {
        eps[idx] = v;
        rec(idx + 1, esum + v);
      }
      eps[idx] = 0;
    };
    rec(0, 0);
    if (csz % 2) total = -total;
    return total;
  }

  const SeedTable& seeds() const { return seeds_; }
  void set_seeds(SeedTable s) {
    seeds_ = std::move(s);
    bracket_memo_.clear();
    c_memo_.clear();
    a_memo_.clear();
  }

 private:
  using Key = std::tuple<int, LVec, LVec>;
  using AKey = std::tuple<int, LVec, LVec, LVec>;

  static void check_shape(int g, const LVec& I) {
    if (g < 0 || I.size() != static_cast<size_t>(g))
      throw std::invalid_argument("hodge: tuple I must have length g");
    for (long i : I)
      if (i < 0) throw std::invalid_argument("hodge: negative entry in I");
  }

  // Genus 1, I = (0) column values: eps in {0,1}^m, depend on |eps| only.
  static Rational c1_column(long k) {
    if (k == 0) return Rational(0);
    if (k == 1) return Rational(1, 24);
    return -Rational(factorial(k - 2), 24);
  }

  Rational bracket_closed(int g, const LVec& I, const LVec& b) {
    long m = static_cast<long>(b.size());
    for (long x : b)
      if (x < 0) return Rational(0);
    long total = vec_sum(b);
    long mu = mu_of(g, I);
    if (total < mu + m) return Rational(0);
    if (g == 0) {
      Rational v(factorial(total));
      for (long x : b) v /= Rational(factorial(x));
      return v;
    }
    long isz = weighted_size(I);
    if (isz >= 2) return Rational(0);
    if (isz == 1) {  // I = (1)
      Rational v = Rational(factorial(total), 24);
      for (long x : b) v /= Rational(factorial(x));
      return v;
    }
    // I = (0): subsets eps in {0,1}^m with eps <= b
    LVec bs = b;
    std::sort(bs.begin(), bs.end(), std::greater<>());
    Key key{g, I, bs};
    if (auto it = bracket_memo_.find(key); it != bracket_memo_.end()) return it->second;
    Rational out(0);
    long msize = m;
    for (long mask = 0; mask < (1L << msize); ++mask) {
      long k = 0;
      bool ok = true;
      Rational denom(1);
      for (long i = 0; i < msize; ++i) {
        long e = (mask >> i) & 1;
        if (bs[static_cast<size_t>(i)] < e) {
          ok = false;
          break;
        }
        k += e;
        denom *= Rational(factorial(bs[static_cast<size_t>(i)] - e));
      }
      if (!ok) continue;
      Rational cv = c1_column(k);
      if (cv == 0) continue;
      out += cv * Rational(factorial(total - k)) / denom;
    }
    bracket_memo_.emplace(std::move(key), out);
    return out;
  }

  Rational reduce(int g, const LVec& I, LVec b) {
    long m = static_cast<long>(b.size());
    for (long x : b)
      if (x < 0) return Rational(0);
    long total = vec_sum(b);
    long mu = mu_of(g, I);
    if (total < mu + m) return Rational(0);
    if (total > mu + m) {  // pad with psi^0 points, then the tuple is exact
      b.resize(static_cast<size_t>(total - mu), 0);
      m = total - mu;
    }
    Key key{g, I, b};
    if (auto it = bracket_memo_.find(key); it != bracket_memo_.end()) return it->second;
    Rational out(0);
    if (g == 0) {
      if (m == 3) {
        out = 1;  // the point count of Mbar_{0,3}
      } else {
        out = reduce_step(g, I, b);
      }
    } else if (g == 1) {
      if (m == 0) {
        out = 0;  // no stable space behind the empty tuple at genus 1
      } else if (m == 1) {
        long isz = weighted_size(I);
        if (isz == 0 && b[0] == 1) out = Rational(1, 24);
        else if (isz == 1 && b[0] == 0) out = Rational(1, 24);
        else out = 0;
      } else {
        out = reduce_step(g, I, b);
      }
    } else {
      if (m == 0) {
        out = seed_value(g, I, b);
      } else if (b.back() >= 2) {
        out = seed_value(g, I, b);  // dimension-exact, all entries >= 2
      } else {
        out = reduce_step(g, I, b);
      }
    }
    bracket_memo_.emplace(std::move(key), out);
    return out;
  }

  Rational reduce_step(int g, const LVec& I, const LVec& b) {
    // b sorted descending and dimension-exact; last entry is the smallest
    LVec bb(b.begin(), b.end() - 1);
    if (b.back() == 0) {
      Rational s(0);
      for (size_t i = 0; i < bb.size(); ++i) {
        LVec child = bb;
        child[i] -= 1;
        s += bracket_reduced(g, I, child);
      }
      return s;
    }
    if (b.back() == 1)
      return Rational(vec_sum(bb) + 1 - g + weighted_size(I)) * bracket_reduced(g, I, bb);
    throw std::logic_error("hodge reduce: entry >= 2 reached below genus 2");
  }

  Rational seed_value(int g, const LVec& I, const LVec& b) {
    auto it = seeds_.find(SeedKey{g, I, b});
    if (it == seeds_.end()) throw MissingSeed(g, I, b);
    return it->second;
  }

  Rational C_sorted(int g, const LVec& I, LVec eps) {
    long m = static_cast<long>(eps.size());
    for (long e : eps)
      if (e < 0) return Rational(0);
    long mu = mu_of(g, I);
    // vanishing clause on descending prefixes (the extremal subsets)
    {
      long pref = 0;
      for (long s = 0; s <= m; ++s) {
        if (s > 0) pref += eps[static_cast<size_t>(s - 1)];
        if (2 * g + s >= 3 && pref > mu + s) return Rational(0);
      }
    }
    if (g == 0) {
      for (long e : eps)
        if (e != 0) return Rational(0);
      return Rational(1);
    }
    if (g == 1) {
      long isz = weighted_size(I);
      if (isz >= 2) return Rational(0);
      if (isz == 1) {  // I = (1)
        for (long e : eps)
          if (e != 0) return Rational(0);
        return Rational(1, 24);
      }
      for (long e : eps)
        if (e > 1) return Rational(0);
      return c1_column(vec_sum(eps));
    }
    Key key{g, I, eps};
    if (auto it = c_memo_.find(key); it != c_memo_.end()) return it->second;
    Rational out(0);
    if (m == 0) {
      out = (mu == 0) ? bracket_reduced(g, I, {}) : Rational(0);
    } else if (eps.back() == 0) {
      LVec ee(eps.begin(), eps.end() - 1);
      out = C_sorted(g, I, std::move(ee));
    } else if (eps.back() == 1) {
      LVec ee(eps.begin(), eps.end() - 1);
      out = Rational(vec_sum(ee) + weighted_size(I) - g) * C_sorted(g, I, std::move(ee));
    } else {
      long total = vec_sum(eps);
      if (total != mu + m) {
        out = 0;  // below the top weight the all->=2 column vanishes
      } else {
        // solve the bracket identity at b = eps for the top coefficient
        out = bracket_reduced(g, I, eps);
        LVec ep(eps.size(), 0);
        std::function<void(size_t, long)> rec = [&](size_t idx, long esum) {
          if (esum > mu + m) return;
          if (idx == eps.size()) {
            if (esum == total) return;  // the unknown itself
            Rational cv = C(g, I, ep);
            if (cv == 0) return;
            LVec parts;
            for (size_t k = 0; k < eps.size(); ++k) parts.push_back(eps[k] - ep[k]);
            out -= cv * make_rational(multinomial(parts), 1);
            return;
          }
          for (long v = 0; v <= eps[idx]; ++v) {
            ep[idx] = v;
            rec(idx + 1, esum + v);
          }
          ep[idx] = 0;
        };
        rec(0, 0);
      }
    }
    c_memo_.emplace(std::move(key), out);
    return out;
  }

  SeedTable seeds_;
  std::map<Key, Rational> bracket_memo_;
  std::map<Key, Rational> c_memo_;
  std::map<AKey, Rational> a_memo_;
};

// Expansion coefficients of the twisted Euler class against Hodge monomials:
// per Chern root x, the factor is sum_{k=0..n-1} (-1)^k binom(n, n-1-k)
// H^{n-1-k} x^k; the product over g roots expands as
//     sum_I C_{g;n;I} lambda_{g;I} H^{(n-1)g - ||I||}.
// Returned are the I with H-exponent inside [0, n-1] (all I when clamp is
// off); values are integers.
inline std::map<LVec, Rational> compute_CgnI(int g, int n, bool clamp = true) {
  using Mono = std::vector<int>;
  std::map<Mono, Rational> P;
  P[Mono(static_cast<size_t>(g), 0)] = 1;
  for (int i = 0; i < g; ++i) {
    std::map<Mono, Rational> next;
    for (int k = 0; k < n; ++k) {
      Rational coef = Rational(binomial(n, n - 1 - k));
      if (k % 2) coef = -coef;
      if (coef == 0) continue;
      for (const auto& [mono, c] : P) {
        Mono m2 = mono;
        m2[static_cast<size_t>(i)] += k;
        next[m2] += c * coef;
      }
    }
    for (auto it = next.begin(); it != next.end();)
      it = (it->second == 0) ? next.erase(it) : std::next(it);
    P = std::move(next);
  }

  // Peel into the elementary-symmetric basis: the lex-greatest monomial of a
  // symmetric polynomial has non-increasing exponents lambda, and e_{lambda'}
  // (conjugate partition) leads with exactly that monomial.
  auto expand_elementary = [g](int k) {
    std::map<Mono, Rational> e;
    std::vector<int> idx(static_cast<size_t>(k));
    std::function<void(int, int)> rec = [&](int start, int depth) {
      if (depth == k) {
        Mono m(static_cast<size_t>(g), 0);
        for (int j : idx) m[static_cast<size_t>(j)] = 1;
        e[m] = 1;
        return;
      }
      for (int v = start; v < g; ++v) {
        idx[static_cast<size_t>(depth)] = v;
        rec(v + 1, depth + 1);
      }
    };
    rec(0, 0);
    return e;
  };

  std::map<LVec, Rational> out;
  while (!P.empty()) {
    auto lead = std::max_element(P.begin(), P.end(), [](const auto& a, const auto& b) {
      return a.first < b.first;
    });
    Mono lambda = lead->first;
    Rational c = lead->second;
    // conjugate partition multiplicities: i_k = #{j : lambda'_j = k}
    LVec I(static_cast<size_t>(g), 0);
    std::map<Mono, Rational> prod;
    prod[Mono(static_cast<size_t>(g), 0)] = 1;
    // lambda'_j = #{parts of lambda >= j}
    int maxpart = lambda.empty() ? 0 : *std::max_element(lambda.begin(), lambda.end());
    for (int j = 1; j <= maxpart; ++j) {
      int lj = 0;
      for (int part : lambda)
        if (part >= j) ++lj;
      if (lj >= 1 && lj <= g) I[static_cast<size_t>(lj - 1)] += 1;
      auto ek = expand_elementary(lj);
      std::map<Mono, Rational> nx;
      for (const auto& [m1, c1] : prod)
        for (const auto& [m2, c2] : ek) {
          Mono m = m1;
          for (size_t t = 0; t < m.size(); ++t) m[t] += m2[t];
          nx[m] += c1 * c2;
        }
      prod = std::move(nx);
    }
    for (const auto& [mono, pc] : prod) {
      auto it = P.find(mono);
      Rational nv = (it == P.end() ? Rational(0) : it->second) - c * pc;
      if (nv == 0) {
        if (it != P.end()) P.erase(it);
      } else {
        P[mono] = nv;
      }
    }
    out[I] += c;
  }
  for (auto it = out.begin(); it != out.end();) {
    long h = static_cast<long>(n - 1) * g - weighted_size(it->first);
    bool drop = it->second == 0 || (clamp && (h < 0 || h >= n));
    it = drop ? out.erase(it) : std::next(it);
  }
  return out;
}

}  // namespace gwproj
