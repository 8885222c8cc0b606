#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "covertree/graph.hpp"
#include "covertree/metrics.hpp"
#include "covertree/zeta.hpp"

namespace covertree {

class VerifyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EigenPair {
  double lambda = 0.0;
  std::vector<double> psi;  // l2-normalized
  int cluster = 0;          // id of the near-degenerate cluster
};

struct EigenOptions {
  int size_cap = 4000;
  double eig_tol = 1e-8;
  double cluster_gap = 1e-8;
};

// Dense symmetric eigendecomposition of H_G = A + W, eigenvalues ascending,
// near-degenerate eigenvalues grouped into clusters.
std::vector<EigenPair> full_spectrum(const PotentialGraph& g, EigenOptions opt = {});

// max over x of |sum_j psi_j(x)^2 - 1|; the pairs must form a full basis.
double completeness_residual(const std::vector<EigenPair>& pairs);

/// Boundary-zeta source for verification. Tables are cached per energy; the
/// lift-aware implementation solves on the base graph (the covering tree and
/// hence all zeta values coincide) and pulls values back through the cover.
class ZetaProvider {
 public:
  virtual ~ZetaProvider() = default;
  virtual const BoundaryTable& at(double lambda) = 0;
  virtual const PotentialGraph& graph() const = 0;
};

class DirectZetaProvider final : public ZetaProvider {
 public:
  DirectZetaProvider(const PotentialGraph& g, LadderOptions ladder = {})
      : g_(&g), ladder_(ladder) {}
  const BoundaryTable& at(double lambda) override;
  const PotentialGraph& graph() const override { return *g_; }

 private:
  const PotentialGraph* g_;
  LadderOptions ladder_;
  std::map<double, BoundaryTable> cache_;
};

class LiftZetaProvider final : public ZetaProvider {
 public:
  explicit LiftZetaProvider(const LiftMap& lm, LadderOptions ladder = {});
  const BoundaryTable& at(double lambda) override;
  const PotentialGraph& graph() const override { return lm_->lift; }

 private:
  const LiftMap* lm_;
  LadderOptions ladder_;
  std::vector<int> edge_projection_;  // lift directed edge -> base directed edge
  std::map<double, BoundaryTable> cache_;
};

enum class PairClass { Bulk, Gap, ExceptionalAdjacent, Unclassified };
std::string to_string(PairClass c);

struct BoundCheck {
  std::string name;
  double lhs = 0.0, rhs = 0.0, margin = 0.0;
  bool pass = true;
  bool skipped = false;
  std::string reason;
};

struct PairReport {
  int index = 0;
  double lambda = 0.0;
  PairClass cls = PairClass::Unclassified;
  int band_index = -1;
  double delta = 0.0;  // dist(lambda, bands u F) for gap pairs
  double sup_norm = 0.0;
  std::map<int, double> p_norms;
  int support = 0;
  double z = 0.0, M = 0.0;
  std::vector<BoundCheck> checks;
  bool all_pass = true;
  std::string note;
};

struct EigenReport {
  std::vector<PairReport> pairs;
  int bulk_count = 0, gap_count = 0, exceptional_count = 0, unclassified_count = 0;
  int rotations_tested = 0;
  bool rotations_pass = true;
  double worst_rotation_margin = 0.0;
  std::vector<std::string> rotation_failures;  // names of failed checks
  bool all_pass = true;
  int max_degree = 0, min_degree = 0, ell = 0;
  double exceptional_window = 0.0;
};

struct VerifyOptions {
  std::vector<int> p_list{5, 6, 8};
  double support_rel_tol = 1e-7;  // |psi| > tol * sup counts as support
  int cluster_rotations = 20;
  std::uint64_t rotation_seed = 0x5eed5eedULL;
  double exceptional_window_floor = 1e-6;
};

// Per-eigenpair classification against the detected band structure plus the
// sup-norm / p-norm / support / non-localization bound checks. The bound
// margins are the verification payload: all classified pairs on graphs that
// meet each hypothesis must pass.
EigenReport classify_and_report(const PotentialGraph& g,
                                const std::vector<EigenPair>& pairs,
                                const BandStructure& bands,
                                const RadiiProfile& radii,
                                ZetaProvider& zeta,
                                VerifyOptions opt = {});

struct NBFunctions {
  std::vector<Complex> f, g;   // per directed edge
  double f_norm = 0.0;         // ||f||_2
  double f_norm_bound = 0.0;   // sqrt(D)(1 + 1/z)
  double f_identity_residual = 0.0;  // max_b |(B f)(b) - f(b)/zeta(b)|
  double g_identity_residual = 0.0;
};

// Non-backtracking lifts f(b) = psi(t(b)) - zeta(b) psi(o(b)) and the
// conjugate-zeta variant; requires boundary values at exactly pair.lambda,
// bulk-classified.
NBFunctions nb_lift(const PotentialGraph& g, const EigenPair& pair,
                    const BoundaryTable& bt);

struct RepresentationCheck {
  double max_deviation = 0.0;       // worst over x0, x1 and both formulas
  double max_out_deviation = 0.0;   // two-sided Green representation
  double max_bulk_deviation = 0.0;  // bulk Im-product representation
};

// Evaluates the finite-radius Green/zeta representations of an eigenvector
// by explicit non-backtracking path enumeration.
RepresentationCheck representation_check(const PotentialGraph& g,
                                         const EigenPair& pair,
                                         const BoundaryTable& bt,
                                         int r, int k,
                                         const RadiiProfile& radii);

// Paths from b1 up to length n embed into the cover without collision
// (the kernel mass identity = 1/n applies exactly in that case).
bool nb_tree_like(const PotentialGraph& g, int b1, int n);

struct KernelMassResult {
  double mass = 0.0;
  double bound = 0.0;  // 32 z^-4 / n
  bool tree_like = false;
  bool pass = false;
};

// Row mass sum_{b'} |M_{n,lambda}(b1, b')|^2 of the spectral-cluster kernel,
// accumulated by sparse non-backtracking DP (winding around a single cycle
// in the ball is handled by the amplitude sums automatically).
KernelMassResult kernel_mass(const PotentialGraph& g, const BoundaryTable& bt,
                             int b1, int n, int ell_G);

}  // namespace covertree
