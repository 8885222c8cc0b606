#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covertree/cycle_bands.hpp"
#include "covertree/eigen_verify.hpp"
#include "covertree/metrics.hpp"
#include "covertree/zeta.hpp"

namespace covertree {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exit-code contract shared by the CLI: 0 all assertions passed,
// 1 assertion failure (machine-readable failure list emitted),
// 2 schema/usage violation.
inline constexpr int kExitPass = 0;
inline constexpr int kExitAssertionFailed = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string command;

  // graph sources (exactly one per command that needs a graph)
  std::string graph_path;
  int localized_m = 0;
  std::string lift_base_path;
  int lift_n = 0;
  std::vector<int> lift_n_list;
  std::uint64_t seed = 0;

  // cycle command
  int cycle_n = 0;
  std::vector<double> cycle_w;

  // solver / scan configuration
  double grid_step = 0.005;
  double eta_min = 1e-9;
  std::optional<double> grid_lo, grid_hi;
  double solver_tol = 1e-12;
  int workers = 0;  // 0: COVERTREE_WORKERS env or hardware

  std::vector<int> p_list{5, 6, 8};
  std::vector<double> s_list{1.25, 1.5, 2.0, 3.0};
  std::vector<double> lambdas;  // metrics / ct-check energies
  bool kernel = false;          // verify: add a kernel-mass sweep
  std::optional<double> kernel_lambda;
  int n_max = 10;  // ct-check radius

  std::string report_path;  // JSON artifact
  std::string out_path;     // plot table / csv artifact
  bool summary = false;     // verify: CSV summary on stdout

  // emit-plot
  std::string plot_kind;

  void validate() const;  // throws ConfigError on schema violations
};

// Executes the configured pipeline, writes artifacts, returns the exit code.
int run_command(const RunConfig& cfg);

// JSON serializers (stable key order, used by run_command and tests).
std::string band_structure_json(const BandStructure& bs);
std::string metrics_json(const DelocalizationParams& p);
std::string eigen_report_json(const EigenReport& rep);
std::string cycle_report_json(const CycleTheoremReport& rep);
std::string ct_report_json(const CombesThomasReport& rep);

// Whitespace-delimited plot tables with a header comment naming the
// inequality; kinds: supnorm-vs-ell, ct-decay, kernel-mass.
void emit_plotdata(const std::string& report_json, const std::string& kind,
                   const std::string& out_path);

}  // namespace covertree
