#pragma once

#include <map>
#include <span>
#include <vector>

#include "covertree/zeta.hpp"

namespace covertree {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Minimal spectral density parameter: min over directed edges of |Im zeta|.
// Defined only for bulk tables.
double z_lambda(const PotentialGraph& g, const BoundaryTable& bt);

// Z_{s,lambda}: max over directed edges (x0,x1) of
//   sum_{x2 in N(x1)\{x0}} |zeta_{x0}(x1)|^{2s} |Im zeta_{x1}(x2)|^s / |Im zeta_{x0}(x1)|^s.
// Requires s > 1 (s = 1 is the conservation identity, see conservation_check).
double Z_s_lambda(const PotentialGraph& g, const BoundaryTable& bt, double s);

// script-Z: max over non-backtracking edge pairs of the single-step quotient.
double script_Z_lambda(const PotentialGraph& g, const BoundaryTable& bt);

struct ConservationReport {
  bool applicable = false;  // false at gap energies (Im zeta = 0)
  double max_residual = 0.0;      // |sum |Im zeta(b')| - |Im zeta(b)|/|zeta(b)|^2|
  double max_z1_deviation = 0.0;  // |Z_1-sum - 1|
};

// Kirchhoff-type current conservation over each directed edge.
ConservationReport conservation_check(const PotentialGraph& g, const BoundaryTable& bt);

struct CycleProductReport {
  double value = 0.0;  // |prod of zeta path factors around the directed cycle|
  bool covers_all_vertices = false;
  bool bound_applicable = false;  // bulk table and cycle does not cover G
  double bound = 0.0;             // 1 - z^2/4
  bool pass = true;
};

// `cycle` lists the vertices of a simple cycle (no repetition, closing edge
// implied). The contraction bound is asserted only when the cycle misses
// at least one vertex.
CycleProductReport cycle_product(const PotentialGraph& g, const BoundaryTable& bt,
                                 std::span<const int> cycle);

struct PathDecayRow {
  int r = 0;
  double forward_sum_max = 0.0;   // worst starting edge
  double forward_bound = 0.0;     // z^{-2s} Z_s^r
  double reversed_sum_max = 0.0;
  double reversed_bound = 0.0;    // z^{-6s} Z_s^r
  double single_path_max = 0.0;   // max |product|^2 over single paths
  double single_bound = 0.0;      // z^{-2} (Z_s^{1/s})^r
  bool pass = true;
};

struct PathDecayReport {
  double s = 0.0;
  int r_max = 0;
  std::vector<PathDecayRow> rows;  // r = 0..r_max
  // s == 1 mode: per-r max over starting edges of
  // |weighted path sum - |Im zeta(b1)||.
  std::vector<double> identity_residual;
  bool all_pass = true;
};

// Non-backtracking path-sum decay profile. For s > 1 checks the geometric
// bounds; for s == 1 checks the exact current-conservation path identity.
// r_max may not exceed ell_G (the path/cover correspondence breaks beyond).
PathDecayReport path_decay_profile(const PotentialGraph& g, const BoundaryTable& bt,
                                   double s, int r_max, int ell_G);

struct DelocalizationParams {
  double lambda = 0.0;
  double z = 0.0;
  std::map<double, double> Z_s;
  double script_Z = 0.0;
  double M = 0.0;  // Z_2^{-1/4}
  double conservation_residual = 0.0;
  // Float-honest strictness: Z < 1 flagged strict only with 10*tol headroom.
  bool Z_strictly_below_one = false;
  bool marginal = false;
};

DelocalizationParams delocalization_params(const PotentialGraph& g,
                                           const BoundaryTable& bt,
                                           std::vector<double> s_list,
                                           double tol = 1e-12);

}  // namespace covertree
