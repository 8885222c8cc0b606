#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace covertree {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite simple connected graph with a real potential per vertex.
/// Directed-edge machinery (origin/terminus/reversal, non-backtracking
/// successors) is precomputed at construction and stored in CSR form.
/// Directed edges with origin v occupy a contiguous id range; the k-th
/// out-edge of v points to adj(v)[k].
class PotentialGraph {
 public:
  using Edge = std::pair<int, int>;

  PotentialGraph() = default;  // empty placeholder; use build()

  // Validating constructor: dense vertex ids, no loops/duplicates, connected.
  static PotentialGraph build(const std::vector<Edge>& edges,
                              const std::vector<double>& potentials);
  // Same validation except connectivity; disconnected graphs are flagged.
  static PotentialGraph build_allow_disconnected(const std::vector<Edge>& edges,
                                                 const std::vector<double>& potentials);

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int directed_edge_count() const { return 2 * edge_count(); }

  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const int> neighbors(int v) const {
    return {adj_.data() + adj_offset_[v], adj_.data() + adj_offset_[v + 1]};
  }
  double potential(int v) const { return w_[v]; }
  const std::vector<double>& potentials() const { return w_; }
  int degree(int v) const { return adj_offset_[v + 1] - adj_offset_[v]; }
  int min_degree() const { return min_deg_; }
  int max_degree() const { return max_deg_; }

  bool connected() const { return connected_; }
  bool is_cycle_graph() const { return is_cycle_; }
  // (C1): minimal degree >= 2 and not a cycle. Structural flag only;
  // check_c1() additionally certifies non-backtracking irreducibility.
  bool c1_flag() const { return min_deg_ >= 2 && !is_cycle_; }

  // Directed edges. Id layout: out-edges of vertex v are contiguous,
  // de_index(v, adj(v)[k]) == adj_offset_[v] + k.
  int de_origin(int b) const { return de_origin_[b]; }
  int de_terminus(int b) const { return adj_[b]; }
  int de_reverse(int b) const { return de_reverse_[b]; }
  int de_index(int from, int to) const;  // throws if not adjacent
  std::span<const int> nb_successors(int b) const {
    return {nb_succ_.data() + nb_offset_[b], nb_succ_.data() + nb_offset_[b + 1]};
  }

  std::vector<int> bfs_distances(int source) const;  // -1 for unreachable
  int diameter() const;

 private:
  static PotentialGraph build_impl(const std::vector<Edge>& edges,
                                   const std::vector<double>& potentials,
                                   bool require_connected);

  int n_ = 0;
  std::vector<Edge> edges_;        // canonical: u < v, sorted
  std::vector<double> w_;
  std::vector<int> adj_;           // CSR neighbor lists (sorted per vertex)
  std::vector<int> adj_offset_;
  std::vector<int> de_origin_;     // per directed edge
  std::vector<int> de_reverse_;
  std::vector<int> nb_succ_;       // CSR non-backtracking successors
  std::vector<int> nb_offset_;
  int min_deg_ = 0, max_deg_ = 0;
  bool connected_ = false, is_cycle_ = false;
};

/// Structural radii. rho: largest r such that every induced ball B(x,r) is a
/// tree; ell_local(x): largest r such that the induced B(x,r) has cyclomatic
/// number <= 1; ell = min over x. Balls are induced subgraphs on
/// {y : d(x,y) <= r}. Values are capped at diam(G) when unbounded
/// (cap flags set), since larger radii add nothing on a finite graph.
struct RadiiProfile {
  int rho = 0;
  int ell = 0;
  std::vector<int> rho_local;
  std::vector<int> ell_local;
  std::optional<int> girth;  // nullopt: acyclic
  int diameter = 0;
  bool rho_capped = false;
  bool ell_capped = false;
};

RadiiProfile radii(const PotentialGraph& g);

// Cyclomatic number (edges - vertices + components) of the induced ball.
int ball_cyclomatic(const PotentialGraph& g, int center, int radius);

struct C1Report {
  bool ok = false;
  bool min_degree_ok = false;
  bool not_cycle = false;
  bool nb_irreducible = false;
  // A pair of directed edges not connected by a non-backtracking path,
  // when irreducibility fails.
  std::optional<std::pair<int, int>> witness;
};

C1Report check_c1(const PotentialGraph& g);

/// Covering data of an N-lift. Lift vertex (v, i) has id v*N + i.
/// For base edge {u,v} (u < v) with permutation sigma, the lift contains
/// the edges {(u,i), (v, sigma[i])}.
struct LiftMap {
  PotentialGraph base;
  PotentialGraph lift;
  int copies = 1;
  std::vector<int> projection;                 // lift vertex -> base vertex
  std::vector<std::vector<int>> permutations;  // one per base edge, base order

  int project_vertex(int lv) const { return projection[lv]; }
  // Covering maps are graph homomorphisms, so directed edges project too.
  int project_edge(int lift_de) const {
    return base.de_index(projection[lift.de_origin(lift_de)],
                         projection[lift.de_terminus(lift_de)]);
  }
};

LiftMap n_lift(const PotentialGraph& base, int copies, std::uint64_t seed);
LiftMap n_lift(const PotentialGraph& base, int copies,
               const std::vector<std::vector<int>>& permutations);

// Named generators used across tests and the CLI.
PotentialGraph cycle_graph(int n, const std::vector<double>& potential_pattern = {0.0});
PotentialGraph complete_graph(int n, double w = 0.0);
PotentialGraph path_graph(int n, double w = 0.0);
PotentialGraph petersen_graph();
PotentialGraph heawood_graph();
PotentialGraph tutte_coxeter_graph();
// Two cycles of length `cycle_len` joined by a path with `path_edges` edges.
PotentialGraph dumbbell_graph(int cycle_len, int path_edges);
// 6-cycle x0..x5 plus a segment y1..y_{3m-1} glued with y1~x2, y_{3m-1}~x5,
// potential 0. Carries a (-1)-eigenvector supported on 4 cycle vertices.
PotentialGraph localized_example(int m);

// Graph file format: {"vertices":[{"id":0,"w":0.0},...],"edges":[[0,1],...]}.
// Emission is canonical (ids ascending, edges sorted, compact JSON) so that
// canonical files round-trip byte-identically.
PotentialGraph parse_graph_json(const std::string& text);
std::string graph_to_json(const PotentialGraph& g);
PotentialGraph load_graph_json(const std::string& path);
void save_graph_json(const PotentialGraph& g, const std::string& path);

}  // namespace covertree
