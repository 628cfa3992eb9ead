#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gwproj/rational.hpp>

namespace gwproj {

// Connected multigraph with a genus label on every vertex and marked points
// attached to vertices.  adj is a symmetric multiplicity matrix whose diagonal
// entry adj[v][v] counts loops at v (each loop contributes 2 to the degree).
struct MarkedGraph {
  std::vector<int> genus;
  std::vector<std::vector<int>> marks;  // ascending mark labels per vertex
  std::vector<std::vector<int>> adj;

  int num_vertices() const { return static_cast<int>(genus.size()); }

  long degree(int v) const {
    long d = 2L * adj[v][v];
    for (int u = 0; u < num_vertices(); ++u)
      if (u != v) d += adj[v][u];
    return d;
  }

  // |F-bar_v|: incident edge flags plus attached marks
  long flag_count(int v) const {
    return degree(v) + static_cast<long>(marks[v].size());
  }

  long valence(int v) const { return 2L * (genus[v] - 1) + flag_count(v); }

  long m_v(int v) const { return 3L * (genus[v] - 1) + flag_count(v); }

  long num_edges() const {
    long e = 0;
    for (int v = 0; v < num_vertices(); ++v) {
      e += adj[v][v];
      for (int u = v + 1; u < num_vertices(); ++u) e += adj[v][u];
    }
    return e;
  }

  int num_marks() const {
    int n = 0;
    for (const auto& mv : marks) n += static_cast<int>(mv.size());
    return n;
  }

  int total_genus() const {
    long g = 1 - num_vertices() + num_edges();
    for (int gv : genus) g += gv;
    return static_cast<int>(g);
  }

  bool connected() const {
    int V = num_vertices();
    if (V == 0) return false;
    std::vector<char> seen(V, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u = 0; u < V; ++u)
        if (u != v && adj[v][u] > 0 && !seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  }
};

inline void validate_graph(const MarkedGraph& G) {
  int V = G.num_vertices();
  if (V == 0) throw std::invalid_argument("graph: no vertices");
  if (static_cast<int>(G.marks.size()) != V ||
      static_cast<int>(G.adj.size()) != V)
    throw std::invalid_argument("graph: field sizes disagree");
  for (int v = 0; v < V; ++v) {
    if (static_cast<int>(G.adj[v].size()) != V)
      throw std::invalid_argument("graph: adjacency row size");
    if (G.genus[v] < 0) throw std::invalid_argument("graph: negative genus");
    for (int u = 0; u < V; ++u) {
      if (G.adj[v][u] < 0)
        throw std::invalid_argument("graph: negative multiplicity");
      if (G.adj[v][u] != G.adj[u][v])
        throw std::invalid_argument("graph: adjacency not symmetric");
    }
  }
  std::vector<int> all;
  for (const auto& mv : G.marks) {
    if (!std::is_sorted(mv.begin(), mv.end()))
      throw std::invalid_argument("graph: marks not sorted");
    all.insert(all.end(), mv.begin(), mv.end());
  }
  std::sort(all.begin(), all.end());
  for (int s = 0; s < static_cast<int>(all.size()); ++s)
    if (all[s] != s + 1)
      throw std::invalid_argument("graph: mark labels are not 1..N");
  if (!G.connected()) throw std::invalid_argument("graph: not connected");
  for (int v = 0; v < V; ++v)
    if (G.valence(v) <= 0)
      throw std::invalid_argument("graph: vertex fails valence > 0");
}

// Oriented edge; tail carries the '-' flag, head the '+' flag.  Deterministic
// order: positions (v,v) then (v,u), u > v, rows ascending, parallel copies
// consecutive.  A loop's two flags both live at its vertex.
struct GraphEdge {
  int tail;
  int head;
};

inline std::vector<GraphEdge> edge_list(const MarkedGraph& G) {
  std::vector<GraphEdge> out;
  int V = G.num_vertices();
  for (int v = 0; v < V; ++v) {
    for (int k = 0; k < G.adj[v][v]; ++k) out.push_back({v, v});
    for (int u = v + 1; u < V; ++u)
      for (int k = 0; k < G.adj[v][u]; ++k) out.push_back({v, u});
  }
  return out;
}

namespace graph_detail {

// Iterated neighbour-colour refinement from an arbitrary starting palette.
// Colours are iso-invariant ranks, so they may prune the canonical search but
// never split an isomorphism class.
inline std::vector<long> refine_colors(std::vector<std::vector<long>> sig,
                                       const std::vector<std::vector<int>>& adj) {
  int V = static_cast<int>(sig.size());
  std::vector<long> color(V, 0);
  std::size_t classes = 0;
  for (;;) {
    std::map<std::vector<long>, long> rank;
    for (const auto& s : sig) rank.emplace(s, 0);
    long r = 0;
    for (auto& kv : rank) kv.second = r++;
    for (int v = 0; v < V; ++v) color[v] = rank.at(sig[v]);
    if (rank.size() == classes) return color;
    classes = rank.size();
    for (int v = 0; v < V; ++v) {
      std::vector<long> s{color[v], adj[v][v]};
      std::vector<std::pair<long, long>> nb;
      for (int u = 0; u < V; ++u)
        if (u != v && adj[v][u] > 0) nb.emplace_back(color[u], adj[v][u]);
      std::sort(nb.begin(), nb.end());
      for (auto& p : nb) {
        s.push_back(p.first);
        s.push_back(p.second);
      }
      sig[v] = std::move(s);
    }
  }
}

// All vertex orderings minimising the concatenated adjacency rows, subject to
// position colours.  The orderings returned form a single coset, so their
// count is the number of colour-preserving graph automorphisms.
struct CanonSearch {
  const std::vector<long>& color;
  const std::vector<std::vector<int>>& adj;
  int V;
  std::vector<long> pos_color;
  std::vector<std::vector<int>> best;
  std::vector<std::vector<int>> orders;
  std::vector<int> prefix;
  std::vector<char> used;

  CanonSearch(const std::vector<long>& c, const std::vector<std::vector<int>>& a)
      : color(c), adj(a), V(static_cast<int>(a.size())) {}

  void run() {
    pos_color = color;
    std::sort(pos_color.begin(), pos_color.end());
    used.assign(V, 0);
    rec(0);
  }

  void rec(int i) {
    if (i == V) {
      orders.push_back(prefix);
      return;
    }
    std::vector<std::pair<std::vector<int>, int>> cand;
    for (int v = 0; v < V; ++v) {
      if (used[v] || color[v] != pos_color[i]) continue;
      std::vector<int> row(i + 1);
      for (int j = 0; j < i; ++j) row[j] = adj[v][prefix[j]];
      row[i] = adj[v][v];
      cand.emplace_back(std::move(row), v);
    }
    const std::vector<int>* mn = &cand.front().first;
    for (const auto& c : cand)
      if (c.first < *mn) mn = &c.first;
    if (static_cast<int>(best.size()) == i) {
      best.push_back(*mn);
    } else if (*mn > best[i]) {
      return;
    } else if (*mn < best[i]) {
      best.resize(i);
      best.push_back(*mn);
      orders.clear();
    }
    for (const auto& c : cand) {
      if (c.first != best[i]) continue;
      used[c.second] = 1;
      prefix.push_back(c.second);
      rec(i + 1);
      prefix.pop_back();
      used[c.second] = 0;
    }
  }
};

inline std::vector<std::vector<long>> marked_palette(const MarkedGraph& G) {
  std::vector<std::vector<long>> sig;
  for (int v = 0; v < G.num_vertices(); ++v) {
    std::vector<long> s{G.genus[v], G.degree(v), G.adj[v][v],
                        static_cast<long>(G.marks[v].size())};
    for (int m : G.marks[v]) s.push_back(m);
    sig.push_back(std::move(s));
  }
  return sig;
}

inline Int edge_symmetry_factor(const std::vector<std::vector<int>>& adj) {
  Int f = 1;
  int V = static_cast<int>(adj.size());
  for (int v = 0; v < V; ++v) {
    int l = adj[v][v];
    f *= factorial(l);
    f <<= l;
    for (int u = v + 1; u < V; ++u) f *= factorial(adj[v][u]);
  }
  return f;
}

}  // namespace graph_detail

// |Aut|: vertex bijections preserving genus labels, adjacency and markings
// pointwise, times the flag symmetries of parallel edges and loops.
inline Int automorphism_count(const MarkedGraph& G) {
  auto color = graph_detail::refine_colors(graph_detail::marked_palette(G), G.adj);
  graph_detail::CanonSearch search(color, G.adj);
  search.run();
  return Int(search.orders.size()) * graph_detail::edge_symmetry_factor(G.adj);
}

// Relabels vertices into the canonical order determined by the colour-pruned
// minimum-key search; isomorphic graphs produce identical results.
inline MarkedGraph canonical_form(const MarkedGraph& G) {
  auto color = graph_detail::refine_colors(graph_detail::marked_palette(G), G.adj);
  graph_detail::CanonSearch search(color, G.adj);
  search.run();
  // marks vectors are part of the colours, so every minimal ordering induces
  // the same relabeled graph
  const std::vector<int>& ord = search.orders.front();
  int V = G.num_vertices();
  MarkedGraph H;
  H.genus.resize(V);
  H.marks.resize(V);
  H.adj.assign(V, std::vector<int>(V, 0));
  for (int i = 0; i < V; ++i) {
    H.genus[i] = G.genus[ord[i]];
    H.marks[i] = G.marks[ord[i]];
    for (int j = 0; j < V; ++j) H.adj[i][j] = G.adj[ord[i]][ord[j]];
  }
  return H;
}

// Flattened iso-invariant key of the canonical form; equal iff isomorphic.
inline std::vector<long> canonical_key(const MarkedGraph& G) {
  MarkedGraph H = canonical_form(G);
  std::vector<long> key{static_cast<long>(H.num_vertices())};
  for (int v = 0; v < H.num_vertices(); ++v) {
    key.push_back(H.genus[v]);
    key.push_back(static_cast<long>(H.marks[v].size()));
    for (int m : H.marks[v]) key.push_back(m);
    for (int u = v; u < H.num_vertices(); ++u) key.push_back(H.adj[v][u]);
  }
  return key;
}

struct MarkedGraphClass {
  MarkedGraph canonical;
  Int aut_order;
};

namespace graph_detail {

// Streams each weighted class once: the canonical unmarked graph, its mark
// multiplicities, vertex automorphisms in canonical labels, and the flag
// symmetry factor of its parallel edges and loops.
template <typename F>
void for_each_weighted_class(int g, int N, F&& fn) {
  if (g < 0 || N < 0) throw std::invalid_argument("enumerate_trivalent: bad (g,N)");
  int vmax = std::max(1, 2 * (g - 1) + N);
  int emax = 3 * (g - 1) + N;
  long val_total = 2L * g - 2 + N;
  std::set<std::vector<long>> seen;

  for (int V = 1; V <= vmax; ++V) {
    for (int E = V - 1; E <= std::min(V - 1 + g, emax); ++E) {
      int gsum = g - (1 - V + E);
      if (gsum < 0) continue;

      // vertex types (g_v, mk_v), lex non-increasing
      std::vector<std::pair<int, int>> types(V);
      auto fill_graphs = [&]() {
        std::vector<std::vector<int>> adj(V, std::vector<int>(V, 0));
        std::vector<long> deg(V, 0);
        std::vector<long> degcap(V);
        for (int v = 0; v < V; ++v) {
          degcap[v] = val_total - (V - 1) - (2L * types[v].first - 2) -
                      types[v].second;
          if (degcap[v] < 0) return;
        }
        // rows of the upper triangle; after row v the degree of v is final
        auto rec = [&](auto&& self, int v, int u, int used) -> void {
          if (v == V) {
            if (used != E) return;
            MarkedGraph W;
            W.genus.resize(V);
            W.marks.assign(V, {});
            W.adj = adj;
            std::vector<int> mkc(V);
            for (int i = 0; i < V; ++i) {
              W.genus[i] = types[i].first;
              mkc[i] = types[i].second;
            }
            if (!W.connected()) return;
            // weighted canonical form: mark multiplicity as a colour
            std::vector<std::vector<long>> sig;
            for (int i = 0; i < V; ++i)
              sig.push_back({W.genus[i], mkc[i], W.degree(i), W.adj[i][i]});
            auto color = graph_detail::refine_colors(sig, W.adj);
            graph_detail::CanonSearch search(color, W.adj);
            search.run();
            const std::vector<int>& ord = search.orders.front();
            MarkedGraph C;
            C.genus.resize(V);
            C.marks.assign(V, {});
            C.adj.assign(V, std::vector<int>(V, 0));
            std::vector<int> cm(V);
            for (int i = 0; i < V; ++i) {
              C.genus[i] = W.genus[ord[i]];
              cm[i] = mkc[ord[i]];
              for (int j = 0; j < V; ++j) C.adj[i][j] = W.adj[ord[i]][ord[j]];
            }
            std::vector<long> key{V};
            for (int i = 0; i < V; ++i) {
              key.push_back(C.genus[i]);
              key.push_back(cm[i]);
              for (int j = i; j < V; ++j) key.push_back(C.adj[i][j]);
            }
            if (!seen.insert(key).second) return;
            // vertex automorphisms of the weighted graph, canonical labels
            std::vector<int> inv(V);
            for (int i = 0; i < V; ++i) inv[ord[i]] = i;
            std::vector<std::vector<int>> auts;
            for (const auto& o : search.orders) {
              std::vector<int> a(V);
              for (int i = 0; i < V; ++i) a[inv[o[i]]] = i;
              auts.push_back(std::move(a));
            }
            fn(C, cm, auts, edge_symmetry_factor(C.adj));
            return;
          }
          if (u == V) {
            if (2 * (types[v].first - 1) + deg[v] + types[v].second < 1) return;
            if (V > 1 && deg[v] == 0) return;
            self(self, v + 1, v + 1, used);
            return;
          }
          long slack = E - used;
          long cap;
          if (u == v) {
            cap = std::min(slack, (degcap[v] - deg[v]) / 2);
          } else {
            cap = std::min({slack, degcap[v] - deg[v], degcap[u] - deg[u]});
          }
          for (long c = 0; c <= cap; ++c) {
            adj[v][u] = adj[u][v] = static_cast<int>(c);
            deg[v] += (u == v ? 2 * c : c);
            if (u != v) deg[u] += c;
            self(self, v, u + 1, used + static_cast<int>(c));
            deg[v] -= (u == v ? 2 * c : c);
            if (u != v) deg[u] -= c;
          }
          adj[v][u] = adj[u][v] = 0;
        };
        rec(rec, 0, 0, 0);
      };

      auto pick_types = [&](auto&& self, int v, int gs, int ms, int pg,
                            int pm) -> void {
        if (v == V) {
          if (gs == 0 && ms == 0) fill_graphs();
          return;
        }
        for (int gv = std::min(gs, pg); gv >= 0; --gv) {
          int mcap = (gv == pg) ? pm : ms;
          for (int mk = std::min(ms, mcap); mk >= 0; --mk) {
            types[v] = {gv, mk};
            self(self, v + 1, gs - gv, ms - mk, gv, mk);
          }
        }
      };
      pick_types(pick_types, 0, gsum, N, gsum, N);
    }
  }
}

}  // namespace graph_detail

// All connected N-marked genus-g graphs with every valence positive, up to
// isomorphism.  Vertex and edge counts are bounded by sum(valence) = 2g-2+N
// and sum(m_v) + |Edg| = 3(g-1)+N.
inline std::vector<MarkedGraphClass> enumerate_trivalent(int g, int N) {
  std::vector<MarkedGraphClass> out;
  graph_detail::for_each_weighted_class(
      g, N,
      [&](const MarkedGraph& C, const std::vector<int>& cm,
          const std::vector<std::vector<int>>& auts, const Int& esym) {
        int V = C.num_vertices();
        std::vector<int> t(N);
        std::vector<int> room(cm.begin(), cm.end());
        // assign mark labels; keep orbit-least placements only
        auto place = [&](auto&& pself, int s) -> void {
          if (s == N) {
            long stab = 0;
            for (const auto& a : auts) {
              int cmp = 0;
              for (int i = 0; i < N; ++i) {
                int m = a[t[i]];
                if (m != t[i]) {
                  cmp = (m < t[i]) ? -1 : 1;
                  break;
                }
              }
              if (cmp < 0) return;  // not the orbit representative
              if (cmp == 0) ++stab;
            }
            MarkedGraph M = C;
            for (int i = 0; i < N; ++i) M.marks[t[i]].push_back(i + 1);
            MarkedGraphClass cls;
            cls.canonical = canonical_form(M);
            cls.aut_order = Int(stab) * esym;
            out.push_back(std::move(cls));
            return;
          }
          for (int v = 0; v < V; ++v) {
            if (room[v] == 0) continue;
            --room[v];
            t[s] = v;
            pself(pself, s + 1);
            ++room[v];
          }
        };
        place(place, 0);
      });

  std::vector<std::pair<std::vector<long>, std::size_t>> keyed;
  keyed.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    keyed.emplace_back(canonical_key(out[i].canonical), i);
  std::sort(keyed.begin(), keyed.end());
  std::vector<MarkedGraphClass> sorted;
  sorted.reserve(out.size());
  for (const auto& kv : keyed) sorted.push_back(std::move(out[kv.second]));
  return sorted;
}

// Per-edge splittings (d_v, p'_e, b'_e) satisfying the vertex balance
//   sum_{marks} (n-1-p_s+b_s) + sum_{'-' flags} (p'+b') +
//   sum_{'+' flags} (n-2-p'-b') = (n-4)(1-g_v) + |F-bar_v| + n(d_v + t_v)
// with d_v >= 0 summing to d and integer vertex twists t_v summing to zero.
// Each vertex therefore only pins d_v + t_v, so every splitting of (p', b')
// whose balance totals are divisible by n and sum to nd is paired with all
// compositions of d over the vertices.  The total of b' is a priori bounded
// by sum(m_v) = 3(g-1)+N-|Edg|; larger values contribute nothing downstream.
struct SGammaItem {
  std::vector<long> d;
  std::vector<long> pprime;
  std::vector<long> bprime;
};

inline std::vector<SGammaItem> index_set_SGamma(const MarkedGraph& G, int n,
                                                long d, const std::vector<long>& p,
                                                const std::vector<long>& b,
                                                const std::vector<GraphEdge>& edges) {
  int N = G.num_marks();
  if (static_cast<int>(p.size()) != N || static_cast<int>(b.size()) != N)
    throw std::invalid_argument("index_set_SGamma: p,b must have one entry per mark");
  for (long ps : p)
    if (ps < 0 || ps >= n) throw std::invalid_argument("index_set_SGamma: p out of [0,n)");
  for (long bs : b)
    if (bs < 0) throw std::invalid_argument("index_set_SGamma: negative b");

  int V = G.num_vertices();
  int E = static_cast<int>(edges.size());
  long btot = 3L * (G.total_genus() - 1) + N - E;
  if (btot < 0) btot = 0;

  std::vector<long> base(V);
  for (int v = 0; v < V; ++v) {
    long t = 0;
    for (int m : G.marks[v]) t += (n - 1 - p[m - 1]) + b[m - 1];
    base[v] = t - (n - 4L) * (1 - G.genus[v]) - G.flag_count(v);
  }

  std::vector<SGammaItem> out;
  std::vector<long> pp(E, 0), bp(E, 0);
  auto flush = [&]() {
    std::vector<long> tot = base;
    for (int e = 0; e < E; ++e) {
      tot[edges[e].tail] += pp[e] + bp[e];
      tot[edges[e].head] += n - 2 - pp[e] - bp[e];
    }
    long ksum = 0;
    for (int v = 0; v < V; ++v) {
      if (tot[v] % n != 0) return;
      ksum += tot[v] / n;
    }
    if (ksum != d) return;
    std::vector<long> dv(V, 0);
    auto compose = [&](auto&& self, int v, long left) -> void {
      if (v == V - 1) {
        dv[v] = left;
        out.push_back({dv, pp, bp});
        return;
      }
      for (long x = 0; x <= left; ++x) {
        dv[v] = x;
        self(self, v + 1, left - x);
      }
    };
    compose(compose, 0, d);
  };
  auto rec_b = [&](auto&& self, int e, long left) -> void {
    if (e == E) {
      flush();
      return;
    }
    for (long x = 0; x <= left; ++x) {
      bp[e] = x;
      self(self, e + 1, left - x);
    }
    bp[e] = 0;
  };
  auto rec_p = [&](auto&& self, int e) -> void {
    if (e == E) {
      rec_b(rec_b, 0, btot);
      return;
    }
    for (long x = 0; x < n; ++x) {
      pp[e] = x;
      self(self, e + 1);
    }
    pp[e] = 0;
  };
  rec_p(rec_p, 0);
  return out;
}

inline std::vector<SGammaItem> index_set_SGamma(const MarkedGraph& G, int n,
                                                long d, const std::vector<long>& p,
                                                const std::vector<long>& b) {
  return index_set_SGamma(G, n, d, p, b, edge_list(G));
}

// Per-vertex slot data (b'', eps, Chern profile, Hodge index) subject to the
// budget |b''_v| + |eps_v| + sum_r r*c_{v,r} = 3(g_v-1) - ||I_v|| + |F-bar_v|.
// Slot order within a vertex: marks ascending, then edge flags in edge_list
// order ('-' before '+' for loops).
struct AstarItem {
  std::vector<std::vector<long>> bpp;
  std::vector<std::vector<long>> eps;
  std::vector<std::vector<long>> chern;
  std::vector<std::vector<long>> hodge;
};

namespace graph_detail {

struct VertexAstar {
  std::vector<long> bpp, eps, chern, hodge;
};

inline void chern_profiles(long w, std::vector<std::vector<long>>& out) {
  std::vector<long> cur;
  auto rec = [&](auto&& self, long rem, long r) -> void {
    if (rem == 0) {
      std::vector<long> c(cur);
      while (!c.empty() && c.back() == 0) c.pop_back();
      out.push_back(std::move(c));
      return;
    }
    if (r > rem) return;
    for (long k = 0; k * r <= rem; ++k) {
      cur.push_back(k);
      self(self, rem - k * r, r + 1);
      cur.pop_back();
    }
  };
  rec(rec, w, 1);
}

inline std::vector<VertexAstar> vertex_astar_items(int gv, long nflags) {
  std::vector<VertexAstar> items;
  std::vector<long> I(gv, 0);
  auto rec_I = [&](auto&& self, int k, long wsum) -> void {
    if (k == gv) {
      long budget = 3L * (gv - 1) - wsum + nflags;
      if (budget < 0) return;
      // split budget into |b''| + |eps| + ||c||
      std::vector<long> bpp(nflags, 0), eps(nflags, 0);
      auto rec_slots = [&](auto&& sself, std::vector<long>& slot, int i,
                           long left, auto&& cont) -> void {
        if (i == static_cast<int>(slot.size())) {
          cont(left);
          return;
        }
        for (long x = 0; x <= left; ++x) {
          slot[i] = x;
          sself(sself, slot, i + 1, left - x, cont);
        }
        slot[i] = 0;
      };
      rec_slots(rec_slots, bpp, 0, budget, [&](long after_b) {
        rec_slots(rec_slots, eps, 0, after_b, [&](long after_e) {
          std::vector<std::vector<long>> profiles;
          chern_profiles(after_e, profiles);
          for (auto& c : profiles) items.push_back({bpp, eps, c, I});
        });
      });
      return;
    }
    long room = 3L * (gv - 1) + nflags - wsum;
    for (long x = 0; (k + 1) * x <= room; ++x) {
      I[k] = x;
      self(self, k + 1, wsum + (k + 1) * x);
      I[k] = 0;
    }
  };
  rec_I(rec_I, 0, 0);
  return items;
}

}  // namespace graph_detail

inline std::vector<AstarItem> index_set_Astar(const MarkedGraph& G) {
  int V = G.num_vertices();
  std::vector<std::vector<graph_detail::VertexAstar>> per(V);
  for (int v = 0; v < V; ++v)
    per[v] = graph_detail::vertex_astar_items(G.genus[v], G.flag_count(v));
  std::vector<AstarItem> out;
  AstarItem cur;
  cur.bpp.resize(V);
  cur.eps.resize(V);
  cur.chern.resize(V);
  cur.hodge.resize(V);
  auto rec = [&](auto&& self, int v) -> void {
    if (v == V) {
      out.push_back(cur);
      return;
    }
    for (const auto& it : per[v]) {
      cur.bpp[v] = it.bpp;
      cur.eps[v] = it.eps;
      cur.chern[v] = it.chern;
      cur.hodge[v] = it.hodge;
      self(self, v + 1);
    }
  };
  rec(rec, 0);
  return out;
}

// a_{g,N}: weighted count over the (N+1)-marked classes, with the degenerate
// values a_{0,0} = 0 and a_{0,1} = 1 fixed by definition.  The sum collapses
// per weighted class: m_v does not depend on the mark placement and, by
// orbit-stabilizer, sum over placements of 1/|Aut| is
// (#placements)/(|VAut| * flag symmetries).
inline Rational weighted_count_a(int g, int N) {
  if (g == 0 && N == 0) return Rational(0);
  if (g == 0 && N == 1) return Rational(1);
  if (2 * g + N < 2) throw std::invalid_argument("weighted_count_a: need 2g+N >= 2");
  Rational total(0);
  graph_detail::for_each_weighted_class(
      g, N + 1,
      [&](const MarkedGraph& C, const std::vector<int>& cm,
          const std::vector<std::vector<int>>& auts, const Int& esym) {
        Int num = 1;
        std::vector<long> parts;
        for (int v = 0; v < C.num_vertices(); ++v) {
          num *= factorial(3L * (C.genus[v] - 1) + C.degree(v) + cm[v]);
          parts.push_back(cm[v]);
        }
        num *= multinomial(parts);
        total += make_rational(num, Int(auts.size()) * esym);
      });
  return total;
}

}  // namespace gwproj
