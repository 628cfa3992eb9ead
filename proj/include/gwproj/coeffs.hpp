#pragma once

// Structure coefficients nc^{(d,t)}_{g;p,b}: the graph-sum route and the
// strand recursion, built on the same per-cluster series, plus a disk-backed
// memo table.  Only t = 0 is meaningful to callers; t is threaded through the
// recursion because the splitting step shifts it.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gwproj/graphs.hpp"
#include "gwproj/hodge.hpp"
#include "gwproj/mirror.hpp"

namespace gwproj {

// ---------------------------------------------------------------------------
// Memo keys and the cache file.

struct CoeffKey {
  int g = 0;
  int n = 2;
  std::vector<long> p;
  std::vector<long> b;
  long d = 0;
  long t = 0;

  friend bool operator<(const CoeffKey& x, const CoeffKey& y) {
    return std::tie(x.g, x.n, x.d, x.t, x.p, x.b) <
           std::tie(y.g, y.n, y.d, y.t, y.p, y.b);
  }
  friend bool operator==(const CoeffKey& x, const CoeffKey& y) {
    return x.g == y.g && x.n == y.n && x.d == y.d && x.t == y.t && x.p == y.p &&
           x.b == y.b;
  }
};

using CoeffTable = std::map<CoeffKey, Rational>;

struct CacheError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace coeff_detail {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace coeff_detail

inline const char* coeff_cache_header() { return "gwproj-coeff-cache v1"; }

// One record per key: g n d t N p... b... value, newline-terminated, followed
// by an fnv1a checksum of the record block.  Reloading is bit-exact because
// values are exact rationals.
inline void save_coeff_table(const std::string& path, const CoeffTable& table) {
  std::ostringstream body;
  for (const auto& [k, v] : table) {
    body << k.g << ' ' << k.n << ' ' << k.d << ' ' << k.t << ' ' << k.p.size();
    for (long x : k.p) body << ' ' << x;
    for (long x : k.b) body << ' ' << x;
    body << ' ' << rat_str(v) << '\n';
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CacheError("cannot open cache file for writing: " + path);
  out << coeff_cache_header() << '\n' << body.str() << "checksum "
      << coeff_detail::hex64(coeff_detail::fnv1a64(body.str())) << '\n';
  out.flush();
  if (!out) throw CacheError("cache write failure: " + path);
}

// Absent or empty file loads as an empty table.  A cache written by a
// different format version is discarded (recompute is always safe); anything
// structurally wrong is reported with its line number.
inline CoeffTable load_coeff_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (text.empty()) return {};

  std::vector<std::string> lines;
  {
    std::istringstream ls(text);
    std::string line;
    while (std::getline(ls, line)) lines.push_back(line);
  }
  if (lines.empty()) return {};

  const std::string want = coeff_cache_header();
  if (lines[0] != want) {
    if (lines[0].rfind("gwproj-coeff-cache v", 0) == 0) return {};  // stale version
    throw CacheError("cache parse error at line 1: not a coefficient cache");
  }
  if (lines.size() < 2 || lines.back().rfind("checksum ", 0) != 0)
    throw CacheError("cache parse error at line " +
                     std::to_string(lines.size()) + ": missing checksum line");

  std::string body;
  for (size_t i = 1; i + 1 < lines.size(); ++i) body += lines[i] + '\n';
  const std::string stored = lines.back().substr(9);
  if (stored != coeff_detail::hex64(coeff_detail::fnv1a64(body)))
    throw CacheError("cache checksum failure: " + path);

  CoeffTable table;
  for (size_t i = 1; i + 1 < lines.size(); ++i) {
    const std::string where = "cache parse error at line " + std::to_string(i + 1);
    std::istringstream rec(lines[i]);
    CoeffKey k;
    long nmarks = -1;
    if (!(rec >> k.g >> k.n >> k.d >> k.t >> nmarks) || nmarks < 0)
      throw CacheError(where + ": bad key fields");
    k.p.resize(static_cast<size_t>(nmarks));
    k.b.resize(static_cast<size_t>(nmarks));
    for (auto& x : k.p)
      if (!(rec >> x)) throw CacheError(where + ": truncated p tuple");
    for (auto& x : k.b)
      if (!(rec >> x)) throw CacheError(where + ": truncated b tuple");
    std::string vtok, extra;
    if (!(rec >> vtok)) throw CacheError(where + ": missing value");
    if (rec >> extra) throw CacheError(where + ": trailing tokens");
    auto v = rat_parse(vtok);
    if (!v) throw CacheError(where + ": bad rational '" + vtok + "'");
    table[std::move(k)] = *v;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Splitting data: the collections the recursion sums over.  One strand is
// pinned to the last mark; the rest carry disjoint (possibly empty) mark sets.

struct PartitionStrand {
  int g = 0;
  std::vector<int> S;  // sorted mark labels
  int nslots = 1;      // N_i: new slots opened on the strand
};

struct PartitionDatum {
  int gprime = 0;
  std::vector<PartitionStrand> strands;  // includes the pinned (0,{N},1)
  Rational weight;  // ordered-tuple count over m!
};

namespace coeff_detail {

// Strand type over a palette of mark colors: a[j] marks of color j.
struct ColoredStrand {
  int g = 0;
  int nslots = 1;
  std::vector<long> a;

  friend bool operator<(const ColoredStrand& x, const ColoredStrand& y) {
    return std::tie(x.g, x.nslots, x.a) < std::tie(y.g, y.nslots, y.a);
  }
};

struct ColoredSplit {
  int gprime = 0;
  std::vector<ColoredStrand> strands;  // pinned strand left implicit
  Rational weight;
};

// All admissible splits of genus g with the non-pinned marks grouped into
// color classes of sizes ncol.  Identical strands are emitted once with the
// multiset weight: orderings of the defining tuples divided by m! give
// prod_j ncol_j! / (prod_i prod_j a_ij! * prod multiplicities!).
inline std::vector<ColoredSplit> colored_splits(int g,
                                                const std::vector<long>& ncol) {
  const size_t K = ncol.size();

  std::vector<ColoredStrand> cands;
  {
    std::vector<long> a(K, 0);
    auto emit_a = [&](auto&& self, size_t j, int gi, int ns, long asum) -> void {
      if (j == K) {
        if (gi + ns + asum >= 2) cands.push_back({gi, ns, a});
        return;
      }
      for (long v = 0; v <= ncol[j]; ++v) {
        a[j] = v;
        self(self, j + 1, gi, ns, asum + v);
      }
      a[j] = 0;
    };
    for (int gi = 0; gi <= g; ++gi)
      for (int ns = 1; gi + ns - 1 <= g; ++ns) emit_a(emit_a, 0, gi, ns, 0);
  }
  std::sort(cands.begin(), cands.end());

  std::vector<ColoredSplit> out;
  std::vector<long> rem = ncol;
  std::vector<std::pair<size_t, long>> picked;  // (candidate index, count)

  auto all_used = [&]() {
    for (long r : rem)
      if (r != 0) return false;
    return true;
  };

  auto emit = [&](int used) {
    if (!all_used()) return;
    int gp = g - used;
    long slots = 1;
    Rational w(1);
    for (auto [ci, k] : picked) {
      slots += static_cast<long>(cands[ci].nslots) * k;
      w /= Rational(factorial(k));
      for (long aj : cands[ci].a)
        for (long rep = 0; rep < k; ++rep) w /= Rational(factorial(aj));
    }
    if (2 * gp + slots < 3) return;
    for (long nj : ncol) w *= Rational(factorial(nj));
    ColoredSplit sp;
    sp.gprime = gp;
    sp.weight = w;
    for (auto [ci, k] : picked)
      for (long rep = 0; rep < k; ++rep) sp.strands.push_back(cands[ci]);
    out.push_back(std::move(sp));
  };

  auto rec = [&](auto&& self, size_t idx, int used) -> void {
    emit(used);
    if (idx == cands.size()) return;
    for (size_t ci = idx; ci < cands.size(); ++ci) {
      const ColoredStrand& c = cands[ci];
      int cost = c.g + c.nslots - 1;
      long kmax = cost > 0 ? (g - used) / cost : -1;
      for (size_t j = 0; j < K; ++j)
        if (c.a[j] > 0) {
          long cap = rem[j] / c.a[j];
          if (kmax < 0 || cap < kmax) kmax = cap;
        }
      if (kmax < 0) continue;  // free strand consuming nothing: excluded above
      for (long k = 1; k <= kmax; ++k) {
        for (size_t j = 0; j < K; ++j) rem[j] -= k * c.a[j];
        picked.emplace_back(ci, k);
        self(self, ci + 1, used + static_cast<int>(k) * cost);
        picked.pop_back();
        for (size_t j = 0; j < K; ++j) rem[j] += k * c.a[j];
      }
    }
  };
  rec(rec, 0, 0);
  return out;
}

inline int parity_sign(long x) { return ((x % 2) + 2) % 2 == 0 ? 1 : -1; }

template <typename R>
inline bool series_is_zero(const TruncatedSeries<R>& s) {
  for (long k = 0; k <= s.order(); ++k)
    if (s.coeff(k) != R()) return false;
  return true;
}

}  // namespace coeff_detail

// Materialized splitting data with explicit mark sets (every mark its own
// color).  The engine itself works on the colored form; this view exists for
// inspection and property tests.
inline std::vector<PartitionDatum> enumerate_partition_data(int g, int N) {
  if (g < 0 || N < 1 || 2 * g + N < 3)
    throw std::invalid_argument("enumerate_partition_data: need 2g+N >= 3, N >= 1");
  std::vector<long> ncol(static_cast<size_t>(N - 1), 1);
  std::vector<PartitionDatum> out;
  for (const auto& sp : coeff_detail::colored_splits(g, ncol)) {
    PartitionDatum pd;
    pd.gprime = sp.gprime;
    pd.weight = sp.weight;
    for (const auto& cs : sp.strands) {
      PartitionStrand st;
      st.g = cs.g;
      st.nslots = cs.nslots;
      for (size_t j = 0; j < cs.a.size(); ++j)
        if (cs.a[j]) st.S.push_back(static_cast<int>(j) + 1);
      pd.strands.push_back(std::move(st));
    }
    pd.strands.push_back({0, {N}, 1});
    out.push_back(std::move(pd));
  }
  return out;
}

// ---------------------------------------------------------------------------
// The evaluation context: mirror series, Hodge data, and all memo layers for
// one fixed n and q-truncation order.

struct PhiKey {
  int g = 0;
  LVec I, c, eps;
  friend bool operator<(const PhiKey& x, const PhiKey& y) {
    return std::tie(x.g, x.I, x.c, x.eps) < std::tie(y.g, y.I, y.c, y.eps);
  }
};

using VertexSeries = std::map<PhiKey, QSeries>;

class CoeffCtx {
 public:
  CoeffCtx(int n, long order, SeedTable seeds = {})
      : n_(n), order_(order), hodge_(std::move(seeds)) {
    if (n < 2) throw std::invalid_argument("CoeffCtx: n must be >= 2");
    if (order < 0) throw std::invalid_argument("CoeffCtx: negative order");
    rebuild(2);
  }

  int n() const { return n_; }
  long order() const { return order_; }
  HodgeEngine& hodge() { return hodge_; }
  const MirrorData& mirror() const { return md_; }

  bool prune_qorder = true;

  const CoeffTable& table() const { return table_; }
  // Insert-if-absent merge; exactness makes duplicates harmless.
  void merge_table(const CoeffTable& t) {
    for (const auto& kv : t)
      if (kv.first.n == n_) table_.insert(kv);
  }

  // Vertex series Phi^{(g,eps)}_{I;c}: sign * C_{g;n;I} * A-hat / Phi_0^{2g-2}
  // times prod_r (1/c_r!) (Phi_r / ((r+1)! Phi_0))^{c_r}.
  const QSeries& phi_gec(int g, const LVec& I, const LVec& c, const LVec& eps) {
    long m = static_cast<long>(eps.size());
    if (2 * g + m < 3)
      throw std::invalid_argument("phi_gec: cluster needs 2g+m >= 3");
    PhiKey key{g, I, c, eps};
    while (!key.c.empty() && key.c.back() == 0) key.c.pop_back();
    std::sort(key.eps.begin(), key.eps.end());
    if (auto it = phi_memo_.find(key); it != phi_memo_.end()) return it->second;

    long rtop = 0;
    for (size_t r1 = 0; r1 < c.size(); ++r1)
      if (c[r1] > 0) rtop = static_cast<long>(r1) + 1;
    ensure_bmax(rtop);

    Rational scalar(0);
    const auto& table = cgni(g);
    if (auto it = table.find(I); it != table.end() && it->second != 0) {
      Rational ah = hodge_.A_hat(g, I, eps, c);
      scalar = it->second * ah;
      if (coeff_detail::parity_sign(mu_of(g, I) + m + vec_sum(c)) < 0)
        scalar = -scalar;
    }
    QSeries val = series_const(scalar, order_);
    if (scalar != 0) {
      if (g == 0) {
        val = val * md_.Phi(0) * md_.Phi(0);
      } else {
        for (int j = 0; j < 2 * g - 2; ++j) val = val * phi0_inv_;
      }
      Rational rfac(1);
      for (size_t r1 = 0; r1 < c.size(); ++r1) {
        long cr = c[r1];
        if (cr == 0) continue;
        long r = static_cast<long>(r1) + 1;
        QSeries base = make_rational(Int(1), factorial(r + 1)) *
                       (md_.Phi(r) * phi0_inv_);
        val = val * series_pow(base, cr);
        rfac /= Rational(factorial(cr));
      }
      val = rfac * val;
    }
    return phi_memo_.emplace(std::move(key), std::move(val)).first->second;
  }

  // Cluster series for one spectator of genus g with slots (pi_j, sigma_j):
  // the sum over admissible (I, c, b'', eps) of
  //   phi_gec * prod_j Phi_{pi_j; b''_j + eps_j + sigma_j} / (b''_j! Phi_0),
  // where |b''| + |eps| + ||c|| exhausts the budget 3(g-1) - ||I|| + m.
  const QSeries& cluster_series(int g, std::vector<std::pair<long, long>> slots) {
    long m = static_cast<long>(slots.size());
    if (2 * g + m < 3)
      throw std::invalid_argument("cluster_series: needs 2g+m >= 3");
    std::sort(slots.begin(), slots.end());
    ClusterKey key{g, slots};
    if (auto it = cluster_memo_.find(key); it != cluster_memo_.end())
      return it->second;

    long bcap = 3L * (g - 1) + m;  // budget at I = 0
    long smax = 0;
    for (const auto& sl : slots) smax = std::max(smax, sl.second);
    ensure_bmax(std::max(bcap + smax, bcap));

    QSeries acc(order_);
    LVec I(static_cast<size_t>(g), 0);
    LVec c;
    std::vector<long> bpp(slots.size(), 0), eps(slots.size(), 0);

    auto leaf = [&]() {
      const QSeries& head = phi_gec(g, I, c, eps);
      if (coeff_detail::series_is_zero(head)) return;
      QSeries term = head;
      for (size_t j = 0; j < slots.size(); ++j) {
        long idx = bpp[j] + eps[j] + slots[j].second;
        term = term * md_.Phi_pb(slots[j].first, idx) * phi0_inv_;
        if (bpp[j] > 1) term = make_rational(Int(1), factorial(bpp[j])) * term;
      }
      acc += term;
    };

    // distribute the residual budget over per-slot (b'', eps) pairs
    auto fill_slots = [&](auto&& self, size_t j, long left) -> void {
      if (j == slots.size()) {
        if (left == 0) leaf();
        return;
      }
      long lo = std::max(0L, -slots[j].second);  // slot index must stay >= 0
      for (long be = lo; be <= left; ++be)
        for (long bp = 0; bp <= be; ++bp) {
          bpp[j] = bp;
          eps[j] = be - bp;
          self(self, j + 1, left - be);
        }
      bpp[j] = eps[j] = 0;
    };

    auto fill_c = [&](auto&& self, long r, long left) -> void {
      if (r > left) {  // indices above `left` cannot carry weight
        fill_slots(fill_slots, 0, left);
        return;
      }
      for (long cr = 0; cr * r <= left; ++cr) {
        c[static_cast<size_t>(r - 1)] = cr;
        self(self, r + 1, left - cr * r);
      }
      c[static_cast<size_t>(r - 1)] = 0;
    };

    auto fill_I = [&](auto&& self, size_t k, long used) -> void {
      if (k == I.size()) {
        long budget = 3L * (g - 1) - used + m;
        if (budget < 0) return;
        c.assign(static_cast<size_t>(std::max(budget, 1L)), 0);
        if (budget > 0)
          fill_c(fill_c, 1, budget);
        else
          fill_slots(fill_slots, 0, 0);
        return;
      }
      long w = static_cast<long>(k) + 1;
      for (long v = 0; used + v * w <= 3L * (g - 1) + m; ++v) {
        I[k] = v;
        self(self, k + 1, used + v * w);
      }
      I[k] = 0;
    };
    fill_I(fill_I, 0, 0);

    return cluster_memo_.emplace(std::move(key), std::move(acc)).first->second;
  }

  // Two-point seed value: (-1)^b exactly on the diagonal stratum.
  Rational nc_base(long p, long pp, long b, long bp, long d, long t) const {
    if (b >= 0 && b + bp == -1 && d == 0 && t == 0 && p + pp == n_ - 1)
      return Rational(coeff_detail::parity_sign(b));
    return Rational(0);
  }

  // Graph-sum route: sum over trivalent classes, per-edge splittings, and the
  // per-vertex cluster series.  flip_orientation re-chooses every edge-flag
  // sign; the result must not depend on it.
  Rational nc_closed(int g, const LVec& p, const LVec& b, long d,
                     bool flip_orientation = false) {
    int N = static_cast<int>(p.size());
    validate_query(g, p, b, d, 0);
    if (2 * g + N < 3)
      throw std::invalid_argument("nc_closed: needs 2g+N >= 3");
    ensure_bmax(2 * (3L * (g - 1) + N) + 2);

    Rational total(0);
    for (const auto& cls : trivalent(g, N)) {
      const MarkedGraph& G = cls.canonical;
      auto edges = edge_list(G);
      if (flip_orientation)
        for (auto& e : edges) std::swap(e.tail, e.head);
      int V = G.num_vertices();

      for (const auto& item : index_set_SGamma(G, n_, d, p, b, edges)) {
        std::vector<std::vector<std::pair<long, long>>> slots(
            static_cast<size_t>(V));
        for (int v = 0; v < V; ++v)
          for (int mk : G.marks[v])
            slots[static_cast<size_t>(v)].emplace_back(n_ - 1 - p[mk - 1],
                                                       -b[mk - 1]);
        for (size_t e = 0; e < edges.size(); ++e) {
          slots[static_cast<size_t>(edges[e].tail)].emplace_back(
              item.pprime[e], -item.bprime[e]);
          slots[static_cast<size_t>(edges[e].head)].emplace_back(
              n_ - 1 - item.pprime[e], 1 + item.bprime[e]);
        }

        if (prune_qorder) {
          bool dead = false;
          for (int v = 0; v < V && !dead; ++v) {
            long qmin = 0;
            for (const auto& sl : slots[static_cast<size_t>(v)])
              if (sl.second >= 1) ++qmin;
            dead = qmin > item.d[v];
          }
          if (dead) continue;
        }

        Rational term = make_rational(Int(1), cls.aut_order);
        for (int v = 0; v < V && term != 0; ++v)
          term *= cluster_series(G.genus[v], slots[static_cast<size_t>(v)])
                      .coeff(item.d[v]);
        if (term == 0) continue;
        long bptot = 0;
        for (long x : item.bprime) bptot += x;
        if (coeff_detail::parity_sign(vec_sum(b) + bptot) < 0) term = -term;
        total += term;
      }
    }
    return total;
  }

  // Recursion route, memoized.  Strands with new negative-b slots terminate
  // in the two-point seed; everything else descends strictly.
  Rational nc_recursive(int g, const LVec& p, const LVec& b, long d, long t) {
    RecOptions opts;
    opts.solve_support = true;
    opts.qorder_prune = prune_qorder;
    return rec_eval(g, p, b, d, t, opts, table_);
  }

  // Reference evaluator: no support solving, no q-order pruning, blunt slot
  // windows, private memo.  Exists to cross-check the tuned path.
  Rational nc_recursive_ref(int g, const LVec& p, const LVec& b, long d, long t) {
    RecOptions opts;
    opts.solve_support = false;
    opts.qorder_prune = false;
    CoeffTable local;
    return rec_eval(g, p, b, d, t, opts, local);
  }

 private:
  struct ClusterKey {
    int g;
    std::vector<std::pair<long, long>> slots;
    friend bool operator<(const ClusterKey& x, const ClusterKey& y) {
      return std::tie(x.g, x.slots) < std::tie(y.g, y.slots);
    }
  };

  struct RecOptions {
    bool solve_support = true;
    bool qorder_prune = true;
  };

  int n_;
  long order_;
  MirrorData md_;
  QSeries phi0_inv_;
  HodgeEngine hodge_;
  std::map<int, std::map<LVec, Rational>> cgni_;
  VertexSeries phi_memo_;
  std::map<ClusterKey, QSeries> cluster_memo_;
  std::map<std::pair<int, int>, std::vector<MarkedGraphClass>> graphs_;
  CoeffTable table_;

  void rebuild(long b_max) {
    md_ = build_mirror(n_, order_, b_max);
    phi0_inv_ = series_inv(md_.Phi(0));
  }
  void ensure_bmax(long need) {
    if (need > md_.b_max) rebuild(need + 2);
  }

  const std::map<LVec, Rational>& cgni(int g) {
    auto it = cgni_.find(g);
    if (it == cgni_.end()) it = cgni_.emplace(g, compute_CgnI(g, n_)).first;
    return it->second;
  }

  const std::vector<MarkedGraphClass>& trivalent(int g, int N) {
    auto key = std::make_pair(g, N);
    auto it = graphs_.find(key);
    if (it == graphs_.end())
      it = graphs_.emplace(key, enumerate_trivalent(g, N)).first;
    return it->second;
  }

  void validate_query(int g, const LVec& p, const LVec& b, long d, long t) const {
    if (g < 0) throw std::invalid_argument("coefficient: negative genus");
    if (p.size() != b.size())
      throw std::invalid_argument("coefficient: p and b must have equal length");
    if (d < 0 || t < 0)
      throw std::invalid_argument("coefficient: negative degree or twist");
    if (d > order_)
      throw std::invalid_argument("coefficient: degree beyond the series order");
    for (long ps : p)
      if (ps < 0 || ps >= n_)
        throw std::invalid_argument("coefficient: p entry out of [0,n)");
  }

  // One strand of a split, with its marks' values materialized.
  struct StrandPlan {
    int g = 0;
    int nslots = 1;
    LVec mp, mb;
    bool base = false;  // two-point seed shape
    long measure = 0;   // 3g + marks + slots, for the descent check
  };

  Rational rec_eval(int g, const LVec& p, const LVec& b, long d, long t,
                    const RecOptions& opts, CoeffTable& memo) {
    int N = static_cast<int>(p.size());
    validate_query(g, p, b, d, t);
    for (long bs : b)
      if (bs < 0) throw std::invalid_argument("coefficient: negative b entry");
    if (g == 0 && N == 2) return nc_base(p[0], p[1], b[0], b[1], d, t);
    if (2 * g + N < 3)
      throw std::invalid_argument("coefficient: needs 2g+N >= 3");

    CoeffKey key{g, n_, p, b, d, t};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    ensure_bmax(2 * (3L * g + N) + 4);

    // color the non-pinned marks by their (p,b) values
    std::vector<std::pair<long, long>> palette;
    std::vector<long> ncol;
    for (int s = 0; s + 1 < N; ++s) {
      std::pair<long, long> col{p[static_cast<size_t>(s)],
                                b[static_cast<size_t>(s)]};
      auto it = std::find(palette.begin(), palette.end(), col);
      if (it == palette.end()) {
        palette.push_back(col);
        ncol.push_back(1);
      } else {
        ++ncol[static_cast<size_t>(it - palette.begin())];
      }
    }

    Rational total(0);
    for (const auto& sp : coeff_detail::colored_splits(g, ncol))
      total += sp.weight * split_value(sp, palette, g, N, p, b, d, t, opts, memo);

    memo.emplace(std::move(key), total);
    return total;
  }

  Rational split_value(const coeff_detail::ColoredSplit& sp,
                       const std::vector<std::pair<long, long>>& palette,
                       int g, int N, const LVec& p, const LVec& b, long d,
                       long t, const RecOptions& opts, CoeffTable& memo) {
    std::vector<StrandPlan> plans;
    for (const auto& cs : sp.strands) {
      StrandPlan pl;
      pl.g = cs.g;
      pl.nslots = cs.nslots;
      for (size_t j = 0; j < cs.a.size(); ++j)
        for (long rep = 0; rep < cs.a[j]; ++rep) {
          pl.mp.push_back(palette[j].first);
          pl.mb.push_back(palette[j].second);
        }
      long marks = static_cast<long>(pl.mp.size());
      pl.base = 2 * cs.g + marks + cs.nslots == 2;
      pl.measure = 3L * cs.g + marks + cs.nslots;
      if (!pl.base && pl.measure >= 3L * g + N)
        throw std::logic_error("coefficient recursion failed to descend");
      plans.push_back(std::move(pl));
    }
    // the pinned strand: one slot tied to the last mark
    StrandPlan pinned;
    pinned.g = 0;
    pinned.nslots = 1;
    pinned.mp = {p[static_cast<size_t>(N - 1)]};
    pinned.mb = {b[static_cast<size_t>(N - 1)]};
    pinned.base = true;
    plans.push_back(std::move(pinned));

    long nslots_total = 0;
    for (const auto& pl : plans) nslots_total += pl.nslots;
    const long bwin = 3L * (sp.gprime - 1) + nslots_total;  // max b''+eps budget

    // per-strand slot assignments (p', b'); base strands carry their value
    std::vector<LVec> spp(plans.size()), spb(plans.size());
    for (size_t i = 0; i < plans.size(); ++i) {
      spp[i].assign(static_cast<size_t>(plans[i].nslots), 0);
      spb[i].assign(static_cast<size_t>(plans[i].nslots), 0);
    }

    Rational total(0);

    auto finish = [&]() {
      long psum = 0, bsum = 0, pos = 0;
      std::vector<std::pair<long, long>> slots;
      for (size_t i = 0; i < plans.size(); ++i)
        for (size_t f = 0; f < spp[i].size(); ++f) {
          slots.emplace_back(spp[i][f], 1 + spb[i][f]);
          psum += spp[i][f];
          bsum += spb[i][f];
          if (spb[i][f] >= 0) ++pos;
        }
      long K = psum - bsum - (n_ - 4L) * (1 - sp.gprime) - 2 * nslots_total;
      if (((K % n_) + n_) % n_ != 0) return;
      K /= n_;

      // base-strand product is degree-free; collect the honest strands
      Rational basev(1);
      std::vector<size_t> honest;
      for (size_t i = 0; i < plans.size(); ++i) {
        const StrandPlan& pl = plans[i];
        if (pl.base) {
          Rational v = pl.mp.size() == 1
                           ? nc_base(pl.mp[0], spp[i][0], pl.mb[0], spb[i][0], 0, 0)
                           : nc_base(spp[i][0], spp[i][1], spb[i][0], spb[i][1],
                                     0, 0);
          if (v == 0) return;
          basev *= v / Rational(factorial(pl.nslots));
        } else {
          honest.push_back(i);
        }
      }

      for (long dp = 0; dp <= d; ++dp) {
        long tp = K - dp;
        long remd = d - dp, remt = t - tp;
        if (remt < 0) continue;
        if (opts.qorder_prune && pos > dp) continue;
        Rational cc = cluster_series(sp.gprime, slots).coeff(dp);
        if (cc == 0) continue;

        Rational inner(0);
        if (honest.empty()) {
          if (remd != 0 || remt != 0) continue;
          inner = Rational(1);
        } else if (opts.solve_support) {
          // support law pins d_i + t_i per strand
          std::vector<long> req(honest.size());
          long rsum = 0;
          bool ok = true;
          for (size_t h = 0; h < honest.size() && ok; ++h) {
            const StrandPlan& pl = plans[honest[h]];
            long nn = static_cast<long>(pl.mp.size()) + pl.nslots;
            long num = (n_ - 4L) * (pl.g - 1) + (n_ - 2L) * nn -
                       (vec_sum(pl.mp) + vec_sum(spp[honest[h]])) +
                       (vec_sum(pl.mb) + vec_sum(spb[honest[h]]));
            if (num < 0 || num % n_ != 0)
              ok = false;
            else
              rsum += req[h] = num / n_;
          }
          if (!ok || rsum != remd + remt) continue;
          inner = honest_sum(plans, spp, spb, honest, req, 0, remd, opts, memo);
        } else {
          inner = blunt_sum(plans, spp, spb, honest, 0, remd, remt, opts, memo);
        }
        total += basev * cc * inner;
      }
    };

    // enumerate slot values strand by strand
    auto assign = [&](auto&& self, size_t i) -> void {
      if (i == plans.size()) {
        finish();
        return;
      }
      const StrandPlan& pl = plans[i];
      if (pl.base && !opts.solve_support) {
        // blunt scan; nc_base prunes in finish()
        auto scan = [&](auto&& sf, size_t f) -> void {
          if (f == spp[i].size()) {
            self(self, i + 1);
            return;
          }
          for (long pv = 0; pv < n_; ++pv)
            for (long bv = -1 - bwin; bv <= bwin; ++bv) {
              spp[i][f] = pv;
              spb[i][f] = bv;
              sf(sf, f + 1);
            }
        };
        scan(scan, 0);
        return;
      }
      if (pl.base && pl.mp.size() == 1) {
        if (pl.mb[0] > bwin) return;  // slot index cannot reach zero
        spp[i][0] = n_ - 1 - pl.mp[0];
        spb[i][0] = -1 - pl.mb[0];
        self(self, i + 1);
        return;
      }
      if (pl.base) {  // two fresh slots
        for (long pv = 0; pv < n_; ++pv)
          for (long x = 0; x <= bwin; ++x) {
            spp[i][0] = pv;
            spp[i][1] = n_ - 1 - pv;
            spb[i][0] = x;
            spb[i][1] = -1 - x;
            self(self, i + 1);
          }
        return;
      }
      long cap = 3L * (pl.g - 1) + static_cast<long>(pl.mp.size()) + pl.nslots -
                 vec_sum(pl.mb);
      if (cap < 0) return;  // no admissible sub-key
      auto scan = [&](auto&& sf, size_t f, long left) -> void {
        if (f == spp[i].size()) {
          self(self, i + 1);
          return;
        }
        for (long pv = 0; pv < n_; ++pv)
          for (long bv = 0; bv <= left; ++bv) {
            spp[i][f] = pv;
            spb[i][f] = bv;
            sf(sf, f + 1, left - bv);
          }
      };
      scan(scan, 0, cap);
    };
    assign(assign, 0);
    return total;
  }

  // product over honest strands with per-strand degree+twist totals pinned
  Rational honest_sum(const std::vector<StrandPlan>& plans,
                      const std::vector<LVec>& spp, const std::vector<LVec>& spb,
                      const std::vector<size_t>& honest,
                      const std::vector<long>& req, size_t h, long remd,
                      const RecOptions& opts, CoeffTable& memo) {
    if (h == honest.size()) return remd == 0 ? Rational(1) : Rational(0);
    long tail = 0;
    for (size_t j = h + 1; j < honest.size(); ++j) tail += req[j];
    Rational acc(0);
    const StrandPlan& pl = plans[honest[h]];
    LVec sub_p = pl.mp, sub_b = pl.mb;
    sub_p.insert(sub_p.end(), spp[honest[h]].begin(), spp[honest[h]].end());
    sub_b.insert(sub_b.end(), spb[honest[h]].begin(), spb[honest[h]].end());
    for (long di = std::max(0L, remd - tail); di <= std::min(req[h], remd);
         ++di) {
      Rational v = rec_eval(pl.g, sub_p, sub_b, di, req[h] - di, opts, memo);
      if (v == 0) continue;
      Rational rest = honest_sum(plans, spp, spb, honest, req, h + 1,
                                 remd - di, opts, memo);
      acc += v * rest;
    }
    return acc / Rational(factorial(pl.nslots));
  }

  // plain composition sum over (d_i, t_i), used by the reference evaluator
  Rational blunt_sum(const std::vector<StrandPlan>& plans,
                     const std::vector<LVec>& spp, const std::vector<LVec>& spb,
                     const std::vector<size_t>& honest, size_t h, long remd,
                     long remt, const RecOptions& opts, CoeffTable& memo) {
    if (h == honest.size())
      return (remd == 0 && remt == 0) ? Rational(1) : Rational(0);
    Rational acc(0);
    const StrandPlan& pl = plans[honest[h]];
    LVec sub_p = pl.mp, sub_b = pl.mb;
    sub_p.insert(sub_p.end(), spp[honest[h]].begin(), spp[honest[h]].end());
    sub_b.insert(sub_b.end(), spb[honest[h]].begin(), spb[honest[h]].end());
    for (long di = 0; di <= remd; ++di)
      for (long ti = 0; ti <= remt; ++ti) {
        Rational v = rec_eval(pl.g, sub_p, sub_b, di, ti, opts, memo);
        if (v == 0) continue;
        acc += v * blunt_sum(plans, spp, spb, honest, h + 1, remd - di,
                             remt - ti, opts, memo);
      }
    return acc / Rational(factorial(pl.nslots));
  }
};

}  // namespace gwproj
