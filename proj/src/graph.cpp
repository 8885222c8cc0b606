#include "covertree/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace covertree {

PotentialGraph PotentialGraph::build(const std::vector<Edge>& edges,
                                     const std::vector<double>& potentials) {
  return build_impl(edges, potentials, true);
}

PotentialGraph PotentialGraph::build_allow_disconnected(
    const std::vector<Edge>& edges, const std::vector<double>& potentials) {
  return build_impl(edges, potentials, false);
}

PotentialGraph PotentialGraph::build_impl(const std::vector<Edge>& edges,
                                          const std::vector<double>& potentials,
                                          bool require_connected) {
  PotentialGraph g;
  g.n_ = static_cast<int>(potentials.size());
  if (g.n_ == 0) throw GraphError("malformed edge list: empty vertex set");
  for (double w : potentials) {
    if (!std::isfinite(w)) throw GraphError("malformed edge list: non-finite potential");
  }
  g.w_ = potentials;

  std::set<Edge> seen;
  g.edges_.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= g.n_ || v >= g.n_)
      throw GraphError("malformed edge list: vertex id out of range");
    if (u == v) throw GraphError("malformed edge list: self-loop");
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second)
      throw GraphError("malformed edge list: duplicate edge");
    g.edges_.push_back({u, v});
  }
  std::sort(g.edges_.begin(), g.edges_.end());

  // CSR adjacency, sorted neighbors.
  std::vector<int> deg(g.n_, 0);
  for (auto [u, v] : g.edges_) {
    ++deg[u];
    ++deg[v];
  }
  g.adj_offset_.assign(g.n_ + 1, 0);
  for (int v = 0; v < g.n_; ++v) g.adj_offset_[v + 1] = g.adj_offset_[v] + deg[v];
  g.adj_.assign(g.adj_offset_.back(), -1);
  {
    std::vector<int> cursor(g.adj_offset_.begin(), g.adj_offset_.end() - 1);
    for (auto [u, v] : g.edges_) {
      g.adj_[cursor[u]++] = v;
      g.adj_[cursor[v]++] = u;
    }
  }
  for (int v = 0; v < g.n_; ++v) {
    auto b = g.adj_.begin() + g.adj_offset_[v];
    auto e = g.adj_.begin() + g.adj_offset_[v + 1];
    std::sort(b, e);
  }

  g.min_deg_ = g.n_ > 0 ? *std::min_element(deg.begin(), deg.end()) : 0;
  g.max_deg_ = g.n_ > 0 ? *std::max_element(deg.begin(), deg.end()) : 0;

  // Connectivity.
  {
    auto dist = g.bfs_distances(0);
    g.connected_ = std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
  }
  if (require_connected && !g.connected_) throw GraphError("disconnected");

  g.is_cycle_ = g.connected_ && g.n_ >= 3 && g.min_deg_ == 2 && g.max_deg_ == 2;

  // Directed edges: id b has origin de_origin_[b], terminus adj_[b].
  int bcount = g.directed_edge_count();
  g.de_origin_.assign(bcount, 0);
  for (int v = 0; v < g.n_; ++v)
    for (int k = g.adj_offset_[v]; k < g.adj_offset_[v + 1]; ++k) g.de_origin_[k] = v;
  g.de_reverse_.assign(bcount, -1);
  for (int b = 0; b < bcount; ++b)
    g.de_reverse_[b] = g.de_index(g.adj_[b], g.de_origin_[b]);

  // Non-backtracking successors: out-edges of t(b) excluding the reversal.
  g.nb_offset_.assign(bcount + 1, 0);
  for (int b = 0; b < bcount; ++b)
    g.nb_offset_[b + 1] = g.nb_offset_[b] + (deg[g.adj_[b]] - 1);
  g.nb_succ_.assign(g.nb_offset_.back(), -1);
  for (int b = 0; b < bcount; ++b) {
    int t = g.adj_[b];
    int rev = g.de_reverse_[b];
    int at = g.nb_offset_[b];
    for (int k = g.adj_offset_[t]; k < g.adj_offset_[t + 1]; ++k)
      if (k != rev) g.nb_succ_[at++] = k;
  }
  return g;
}

int PotentialGraph::de_index(int from, int to) const {
  auto nb = neighbors(from);
  auto it = std::lower_bound(nb.begin(), nb.end(), to);
  if (it == nb.end() || *it != to) throw GraphError("de_index: vertices not adjacent");
  return adj_offset_[from] + static_cast<int>(it - nb.begin());
}

std::vector<int> PotentialGraph::bfs_distances(int source) const {
  std::vector<int> dist(n_, -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int u : neighbors(v))
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
  }
  return dist;
}

int PotentialGraph::diameter() const {
  int d = 0;
  for (int v = 0; v < n_; ++v) {
    auto dist = bfs_distances(v);
    for (int x : dist) d = std::max(d, x);
  }
  return d;
}

int ball_cyclomatic(const PotentialGraph& g, int center, int radius) {
  auto dist = g.bfs_distances(center);
  int verts = 0, edges = 0;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (dist[v] >= 0 && dist[v] <= radius) ++verts;
  for (auto [u, v] : g.edges())
    if (dist[u] >= 0 && dist[u] <= radius && dist[v] >= 0 && dist[v] <= radius) ++edges;
  // Induced balls around a vertex are connected.
  return edges - verts + 1;
}

namespace {

// Shortest path between the ends of edge e avoiding e itself, or -1.
int detour_distance(const PotentialGraph& g, int edge_idx) {
  auto [s, t] = g.edges()[edge_idx];
  std::vector<int> dist(g.vertex_count(), -1);
  std::queue<int> q;
  dist[s] = 0;
  q.push(s);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    if (v == t) return dist[t];
    for (int u : g.neighbors(v)) {
      if ((v == s && u == t) || (v == t && u == s)) continue;
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
    }
  }
  return -1;
}

}  // namespace

RadiiProfile radii(const PotentialGraph& g) {
  if (!g.connected()) throw GraphError("radii: graph must be connected");
  const int n = g.vertex_count();
  RadiiProfile r;
  r.diameter = g.diameter();
  r.rho_local.assign(n, r.diameter);
  r.ell_local.assign(n, r.diameter);
  const int global_cyclo = g.edge_count() - n + 1;
  r.rho_capped = global_cyclo == 0;
  r.ell_capped = global_cyclo <= 1;

  for (int x = 0; x < n; ++x) {
    auto dist = g.bfs_distances(x);
    // Vertices enter the ball at their distance, edges at max of endpoint
    // distances; cumulative counts give the cyclomatic number per radius.
    std::vector<int> vcount(r.diameter + 1, 0), ecount(r.diameter + 1, 0);
    for (int v = 0; v < n; ++v) ++vcount[dist[v]];
    for (auto [u, v] : g.edges()) ++ecount[std::max(dist[u], dist[v])];
    int verts = 0, edges = 0;
    bool rho_found = false, ell_found = false;
    for (int rad = 0; rad <= r.diameter; ++rad) {
      verts += vcount[rad];
      edges += ecount[rad];
      int cyclo = edges - verts + 1;
      if (!rho_found && cyclo >= 1) {
        r.rho_local[x] = rad - 1;
        rho_found = true;
      }
      if (!ell_found && cyclo >= 2) {
        r.ell_local[x] = rad - 1;
        ell_found = true;
      }
      if (rho_found && ell_found) break;
    }
  }
  r.rho = *std::min_element(r.rho_local.begin(), r.rho_local.end());
  r.ell = *std::min_element(r.ell_local.begin(), r.ell_local.end());

  // Girth: min over edges of (shortest detour around the edge) + 1. Exact.
  if (global_cyclo > 0) {
    int girth = -1;
    for (int e = 0; e < g.edge_count(); ++e) {
      int d = detour_distance(g, e);
      if (d > 0 && (girth < 0 || d + 1 < girth)) girth = d + 1;
    }
    if (girth > 0) r.girth = girth;
  }
  return r;
}

C1Report check_c1(const PotentialGraph& g) {
  C1Report rep;
  rep.min_degree_ok = g.min_degree() >= 2;
  rep.not_cycle = !g.is_cycle_graph();
  if (!rep.min_degree_ok || !rep.not_cycle) return rep;

  // Certify irreducibility of the non-backtracking matrix: strong
  // connectivity of the NB digraph (forward and backward reachability
  // from edge 0).
  const int bcount = g.directed_edge_count();
  auto reach = [&](bool forward) {
    std::vector<char> vis(bcount, 0);
    std::queue<int> q;
    vis[0] = 1;
    q.push(0);
    while (!q.empty()) {
      int b = q.front();
      q.pop();
      if (forward) {
        for (int s : g.nb_successors(b))
          if (!vis[s]) {
            vis[s] = 1;
            q.push(s);
          }
      } else {
        // predecessors of b: in-edges at o(b) except the reversal of b
        int o = g.de_origin(b);
        int rev = g.de_reverse(b);
        for (int u : g.neighbors(o)) {
          int p = g.de_index(u, o);
          if (p != rev && !vis[p]) {
            vis[p] = 1;
            q.push(p);
          }
        }
      }
    }
    return vis;
  };
  auto fwd = reach(true);
  auto bwd = reach(false);
  rep.nb_irreducible = true;
  for (int b = 0; b < bcount; ++b) {
    if (!fwd[b]) {
      rep.nb_irreducible = false;
      rep.witness = {0, b};
      break;
    }
    if (!bwd[b]) {
      rep.nb_irreducible = false;
      rep.witness = {b, 0};
      break;
    }
  }
  rep.ok = rep.min_degree_ok && rep.not_cycle && rep.nb_irreducible;
  return rep;
}

namespace {

// Seeded Fisher-Yates with explicit bounded sampling; std::shuffle's output
// is implementation-defined, this one is reproducible everywhere.
std::vector<int> random_permutation(int n, std::mt19937_64& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::uint64_t j = rng() % static_cast<std::uint64_t>(i + 1);
    std::swap(p[i], p[static_cast<int>(j)]);
  }
  return p;
}

LiftMap build_lift(const PotentialGraph& base, int copies,
                   std::vector<std::vector<int>> perms) {
  const int nb = base.vertex_count();
  const int ne = base.edge_count();
  if (static_cast<int>(perms.size()) != ne)
    throw GraphError("n_lift: one permutation per base edge required");
  for (const auto& p : perms) {
    if (static_cast<int>(p.size()) != copies)
      throw GraphError("n_lift: permutation size mismatch");
    std::vector<char> hit(copies, 0);
    for (int x : p) {
      if (x < 0 || x >= copies || hit[x]) throw GraphError("n_lift: not a permutation");
      hit[x] = 1;
    }
  }

  std::vector<PotentialGraph::Edge> edges;
  edges.reserve(static_cast<std::size_t>(ne) * copies);
  for (int e = 0; e < ne; ++e) {
    auto [u, v] = base.edges()[e];
    for (int i = 0; i < copies; ++i)
      edges.push_back({u * copies + i, v * copies + perms[e][i]});
  }
  std::vector<double> w(static_cast<std::size_t>(nb) * copies);
  std::vector<int> proj(static_cast<std::size_t>(nb) * copies);
  for (int v = 0; v < nb; ++v)
    for (int i = 0; i < copies; ++i) {
      w[v * copies + i] = base.potential(v);
      proj[v * copies + i] = v;
    }

  LiftMap lm;
  lm.base = base;
  lm.copies = copies;
  lm.permutations = std::move(perms);
  lm.projection = std::move(proj);
  lm.lift = PotentialGraph::build_allow_disconnected(edges, w);
  return lm;
}

}  // namespace

LiftMap n_lift(const PotentialGraph& base, int copies, std::uint64_t seed) {
  if (copies < 1) throw GraphError("n_lift: copies must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> perms;
  perms.reserve(base.edge_count());
  for (int e = 0; e < base.edge_count(); ++e)
    perms.push_back(random_permutation(copies, rng));
  return build_lift(base, copies, std::move(perms));
}

LiftMap n_lift(const PotentialGraph& base, int copies,
               const std::vector<std::vector<int>>& permutations) {
  if (copies < 1) throw GraphError("n_lift: copies must be >= 1");
  return build_lift(base, copies, permutations);
}

PotentialGraph cycle_graph(int n, const std::vector<double>& pattern) {
  if (n < 3) throw GraphError("cycle_graph: need n >= 3");
  if (pattern.empty()) throw GraphError("cycle_graph: empty potential pattern");
  std::vector<PotentialGraph::Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = pattern[i % pattern.size()];
  return PotentialGraph::build(edges, w);
}

PotentialGraph complete_graph(int n, double w) {
  std::vector<PotentialGraph::Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  return PotentialGraph::build(edges, std::vector<double>(n, w));
}

PotentialGraph path_graph(int n, double w) {
  std::vector<PotentialGraph::Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return PotentialGraph::build(edges, std::vector<double>(n, w));
}

PotentialGraph petersen_graph() {
  // Kneser graph K(5,2): vertices are 2-subsets of {0..4}, disjoint sets adjacent.
  std::vector<std::pair<int, int>> sets;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) sets.push_back({i, j});
  std::vector<PotentialGraph::Edge> edges;
  for (std::size_t a = 0; a < sets.size(); ++a)
    for (std::size_t b = a + 1; b < sets.size(); ++b) {
      auto [i, j] = sets[a];
      auto [k, l] = sets[b];
      if (i != k && i != l && j != k && j != l)
        edges.push_back({static_cast<int>(a), static_cast<int>(b)});
    }
  return PotentialGraph::build(edges, std::vector<double>(10, 0.0));
}

PotentialGraph heawood_graph() {
  // Incidence graph of the Fano plane, lines {i, i+1, i+3} mod 7.
  std::vector<PotentialGraph::Edge> edges;
  for (int l = 0; l < 7; ++l)
    for (int d : {0, 1, 3}) edges.push_back({(l + d) % 7, 7 + l});
  return PotentialGraph::build(edges, std::vector<double>(14, 0.0));
}

PotentialGraph tutte_coxeter_graph() {
  // Levi graph of the Cremona-Richmond configuration: points are the 15
  // 2-subsets of {0..5}, lines the 15 perfect matchings of K6; girth 8.
  std::map<std::pair<int, int>, int> pair_id;
  int next = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) pair_id[{i, j}] = next++;

  std::vector<std::array<int, 3>> matchings;
  // Partitions of {0..5} into three pairs: 0 pairs with a, then split the rest.
  for (int a = 1; a < 6; ++a) {
    std::vector<int> rest;
    for (int x = 1; x < 6; ++x)
      if (x != a) rest.push_back(x);
    for (int k = 1; k < 4; ++k) {
      int b = rest[0], c = rest[k];
      std::vector<int> last;
      for (int x : rest)
        if (x != b && x != c) last.push_back(x);
      matchings.push_back({pair_id[{0, a}], pair_id[{std::min(b, c), std::max(b, c)}],
                           pair_id[{std::min(last[0], last[1]), std::max(last[0], last[1])}]});
    }
  }
  std::vector<PotentialGraph::Edge> edges;
  for (std::size_t m = 0; m < matchings.size(); ++m)
    for (int p : matchings[m]) edges.push_back({p, 15 + static_cast<int>(m)});
  return PotentialGraph::build(edges, std::vector<double>(30, 0.0));
}

PotentialGraph dumbbell_graph(int cycle_len, int path_edges) {
  if (cycle_len < 3 || path_edges < 1) throw GraphError("dumbbell_graph: bad sizes");
  std::vector<PotentialGraph::Edge> edges;
  for (int i = 0; i < cycle_len; ++i) edges.push_back({i, (i + 1) % cycle_len});
  for (int i = 0; i < cycle_len; ++i)
    edges.push_back({cycle_len + i, cycle_len + (i + 1) % cycle_len});
  int n = 2 * cycle_len;
  int prev = 0;
  for (int i = 0; i + 1 < path_edges; ++i) {
    edges.push_back({prev, n});
    prev = n;
    ++n;
  }
  edges.push_back({prev, cycle_len});
  return PotentialGraph::build(edges, std::vector<double>(n, 0.0));
}

PotentialGraph localized_example(int m) {
  if (m < 2) throw GraphError("localized_example: need m >= 2");
  // x0..x5 are 0..5; y1..y_{3m-1} are 6..(3m+4).
  std::vector<PotentialGraph::Edge> edges;
  for (int i = 0; i < 6; ++i) edges.push_back({i, (i + 1) % 6});
  int seg = 3 * m - 1;
  for (int j = 0; j + 1 < seg; ++j) edges.push_back({6 + j, 7 + j});
  edges.push_back({2, 6});            // y1 ~ x2
  edges.push_back({5, 6 + seg - 1});  // y_{3m-1} ~ x5
  return PotentialGraph::build(edges, std::vector<double>(6 + seg, 0.0));
}

PotentialGraph parse_graph_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw GraphError(std::string("graph json: parse error: ") + e.what());
  }
  if (!j.contains("vertices") || !j.contains("edges"))
    throw GraphError("graph json: missing vertices/edges");
  std::vector<double> w;
  int expect = 0;
  for (const auto& v : j["vertices"]) {
    if (!v.contains("id") || !v.contains("w"))
      throw GraphError("graph json: vertex needs id and w");
    if (v["id"].get<int>() != expect++)
      throw GraphError("graph json: vertex ids must be dense 0..n-1 in order");
    w.push_back(v["w"].get<double>());
  }
  std::vector<PotentialGraph::Edge> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2) throw GraphError("graph json: bad edge");
    edges.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return PotentialGraph::build(edges, w);
}

std::string graph_to_json(const PotentialGraph& g) {
  nlohmann::ordered_json j;
  j["vertices"] = nlohmann::ordered_json::array();
  for (int v = 0; v < g.vertex_count(); ++v)
    j["vertices"].push_back({{"id", v}, {"w", g.potential(v)}});
  j["edges"] = nlohmann::ordered_json::array();
  for (auto [u, v] : g.edges()) j["edges"].push_back({u, v});
  return j.dump();
}

PotentialGraph load_graph_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open graph file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph_json(ss.str());
}

void save_graph_json(const PotentialGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write graph file: " + path);
  out << graph_to_json(g);
}

}  // namespace covertree
