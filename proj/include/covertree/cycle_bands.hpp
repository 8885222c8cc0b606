#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covertree/eigen_verify.hpp"
#include "covertree/zeta.hpp"

namespace covertree {

/// Periodic Schrodinger operator on Z: (H psi)(j) = psi(j-1) + psi(j+1) + W_j psi(j)
/// with W m-periodic. The universal cover of every N-cycle carrying the same
/// periodic potential.
struct PeriodicZOperator {
  std::vector<double> w;  // one period
  int period() const { return static_cast<int>(w.size()); }
};

// Trace of the one-period transfer-matrix product at energy lambda.
double discriminant(const PeriodicZOperator& op, double lambda);

// Band structure {lambda : |discriminant| <= 2}: at most m disjoint closed
// intervals, endpoints refined by bisection. The independent oracle for
// band_scan on cycle graphs.
std::vector<Interval> monodromy_bands(const PeriodicZOperator& op,
                                      double grid_step = 1e-3);

struct CyclePairRow {
  int index = 0;
  double lambda = 0.0;
  std::string cls;             // "gap" | "bulk" | "band-edge"
  double n_sup2 = 0.0;         // N * ||psi||_inf^2
  double bound = 0.0;          // 16/delta^2 (gap) or C_{lambda,m} (bulk)
  double delta = 0.0;          // gap distance when cls == "gap"
  bool checked = false;
  bool pass = true;
};

struct CycleTheoremReport {
  int N = 0;
  int m = 0;
  std::vector<Interval> bands;
  std::vector<CyclePairRow> rows;
  bool bulk_checked = false;   // false when m does not divide N
  std::string bulk_skip_reason;
  // Support floor at the configured tolerance. Enforced in all_pass only
  // when m | N: a wrap seam can localize eigenvectors exponentially and
  // push exact-arithmetic-nonzero tails below any floating-point cut.
  bool support_pass = true;    // support >= ceil(N/2) for every eigenvector
  bool no_two_consecutive_zeros = true;
  int rotations_tested = 0;
  bool rotations_pass = true;
  bool all_pass = true;
};

struct CycleVerifyOptions {
  double band_edge_window = 1e-4;  // skip eigenvalues this close to endpoints
  int cluster_rotations = 20;
  std::uint64_t rotation_seed = 0xC1C1EULL;
  double support_rel_tol = 1e-7;
  LadderOptions ladder;  // for the period-m cover Green data
};

// Eigenvector sup-norm bounds on the N-cycle with potential pattern
// w (repeated; the pattern length is the period m). Gap eigenvalues use the
// monodromy distance, interior-band eigenvalues the constant assembled from
// the period-m cover Green data (requires m | N).
CycleTheoremReport verify_cycle_theorem(int N, const std::vector<double>& pattern,
                                        CycleVerifyOptions opt = {});

// The sup-norm bound constant for interior-band energies: assembled from
// |G(j,j)|^2 and the one-sided Im zeta ratios of the m-periodic cover, via
// the four-term Cauchy-Schwarz split of the Green representation.
double cycle_bulk_constant(const PeriodicZOperator& op, double lambda,
                           LadderOptions ladder = {});

// Residual of the scalar continued-fraction relation
// 1/zeta_{j-1}(j) = lambda - W_j - zeta_j(j+1) for the boundary solution of
// the generic solver on C_N; also enforces Im zeta < 0 (interior of a band).
double cross_validate_cycle_zeta(int N, const std::vector<double>& pattern,
                                 double lambda, LadderOptions ladder = {});

}  // namespace covertree
