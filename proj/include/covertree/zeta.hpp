#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covertree/graph.hpp"

namespace covertree {

using Complex = std::complex<double>;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpectralParam {
  double lambda = 0.0;
  double eta = 0.0;  // >= 0; 0 only as a boundary-value marker
  Complex gamma() const { return {lambda, eta}; }
};

/// Covering-tree Green values, one per directed edge. val[b] for b=(x,y)
/// stores zeta_x^gamma(y): the Green function at y of the subtree obtained by
/// cutting the branch back through x. Equivalently, the table value the
/// recursion attaches to traversing b; the value "at v with neighbor w
/// removed" is val[de_index(w, v)].
struct ZetaTable {
  SpectralParam gamma;
  std::vector<Complex> val;
  int sweeps = 0;
  double residual = 0.0;
  bool converged = false;

  Complex path_factor(int de) const { return val[de]; }
  // zeta_w(v): value at v of the subtree avoiding neighbor w.
  Complex zeta(const PotentialGraph& g, int v, int w) const {
    return val[g.de_index(w, v)];
  }
};

struct SolveOptions {
  double damping = 0.5;
  double tol = 1e-12;  // max-norm of the fixed-point residual
  int max_sweeps = 0;  // 0: auto, scales with |B(G)|
  int budget_factor = 1;
  // throw on non-convergence (the error carries the last residual); the
  // ladder turns this off and handles retries itself
  bool raise_on_nonconvergence = true;
};

// Damped fixed-point iteration of
//   zeta[(v,w)] <- -1 / (W(v) - gamma + sum_{u in N(v)\{w}} zeta[(u,v)]),
// started from -i (or init), Herglotz sign (Im < 0) enforced each sweep.
ZetaTable solve_zeta(const PotentialGraph& g, SpectralParam gamma,
                     const ZetaTable* init = nullptr, SolveOptions opt = {});

// Fixed-point residual max_b |zeta[b] * denom[b] + 1| for a given table.
double zeta_residual(const PotentialGraph& g, SpectralParam gamma,
                     std::span<const Complex> val);

enum class BoundaryClass { Bulk, Gap, Pole, Undetermined };
std::string to_string(BoundaryClass c);

struct LadderOptions {
  double eta_start = 1e-1;
  double eta_min = 1e-9;
  double eps_band = 1e-4;   // bulk: min |Im zeta| above this
  double eps_gap = 1e-6;    // gap: max |Im zeta| below this
  double pole_threshold = 0.1;  // |zeta|*eta above this on two rungs
  SolveOptions solve;
};

/// Boundary values zeta^{lambda+i0}: eta ladder eta_k = eta_start * 2^-k,
/// each rung warm-started from the previous, linear extrapolation to eta=0
/// from the last two rungs.
struct BoundaryTable {
  double lambda = 0.0;
  BoundaryClass cls = BoundaryClass::Undetermined;
  std::vector<Complex> val;  // extrapolated boundary values (path convention)
  double min_abs_im = 0.0, max_abs_im = 0.0, max_abs = 0.0;
  double pole_strength = 0.0;  // ~ mass of the pole when cls == Pole
  double eta_last = 0.0;
  bool converged = false;
  std::string diagnostic;

  Complex path_factor(int de) const { return val[de]; }
  Complex zeta(const PotentialGraph& g, int v, int w) const {
    return val[g.de_index(w, v)];
  }
  bool bulk() const { return cls == BoundaryClass::Bulk; }
};

BoundaryTable boundary_zeta(const PotentialGraph& g, double lambda,
                            LadderOptions opt = {},
                            const ZetaTable* warm_start = nullptr);

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct BandStructure {
  std::vector<Interval> bands;       // numerical approximations of the open J_r
  std::vector<double> exceptional;   // pole energies (F candidates)
  std::vector<double> endpoints;     // band endpoints (F')
  double grid_lo = 0.0, grid_hi = 0.0, grid_step = 0.0;
  double eta_min = 0.0;

  // Distance to the detected spectrum sigma(H_cover) ~ bands u exceptional.
  double distance(double lambda) const;
  std::optional<int> band_containing(double lambda) const;
  // Distance to F u F' (pole energies and band endpoints).
  double distance_to_exceptional_set(double lambda) const;
};

struct BandScanOptions {
  double grid_step = 0.005;
  // Grid enclosure defaults to [-D-||W||-1, D+||W||+1].
  std::optional<double> grid_lo, grid_hi;
  LadderOptions ladder;
  int bisection_iterations = 20;
  int workers = 0;       // 0: COVERTREE_WORKERS or hardware
  int block_size = 64;   // warm-start forwarding block (fixed for determinism)
};

BandStructure band_scan(const PotentialGraph& g, BandScanOptions opt = {});

// Diagonal Green function of the cover, G(v,v) = 1/(W(v) - gamma + sum_u zeta_v(u)).
Complex green_diag(const PotentialGraph& g, std::span<const Complex> val,
                   Complex gamma, int v);
Complex green_diag(const PotentialGraph& g, const ZetaTable& zt, int v);
Complex green_diag(const PotentialGraph& g, const BoundaryTable& bt, int v);

// Path Green function along a non-backtracking path (v0..vk) through the cover:
// G(v0,v0) * prod of path factors. Throws on backtracking input.
Complex green_path(const PotentialGraph& g, std::span<const Complex> val,
                   Complex gdiag, std::span<const int> path);

struct CombesThomasRow {
  int n = 0;
  double max_sphere_sum = 0.0;  // max over roots of S_n
  double bound = 0.0;           // (4/delta^2) (1+delta/2D)^{-2n}
  double min_margin = 0.0;      // bound - S_n, worst root
  bool pass = false;
};

struct CombesThomasReport {
  double lambda = 0.0, delta = 0.0;
  std::vector<CombesThomasRow> rows;  // n = 0..n_max
  bool all_pass = false;
};

// Sphere sums S_n = sum_{y: d_cover(x,y)=n} |G(x,y)|^2 via non-backtracking
// DP over directed edges (cone types); never materializes the tree.
CombesThomasReport combes_thomas_check(const PotentialGraph& g,
                                       const BoundaryTable& gap_table,
                                       double delta, int n_max);

}  // namespace covertree
