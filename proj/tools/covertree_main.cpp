// Command-line surface for covering-tree Green functions, band structures,
// delocalization metrics and eigenvector bound verification.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covertree/report.hpp"

namespace {

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(csv);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> out;
  for (double v : parse_doubles(csv)) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covertree: covering-tree Green functions and eigenvector "
               "delocalization bounds on finite graphs"};
  app.require_subcommand(1);

  covertree::RunConfig cfg;
  std::string p_csv, s_csv, w_csv, n_csv, lambda_csv;
  double kernel_lambda = std::numeric_limits<double>::quiet_NaN();

  auto add_common = [&](CLI::App* c) {
    c->add_option("--grid-step", cfg.grid_step, "band scan grid step");
    c->add_option("--eta-min", cfg.eta_min, "eta ladder floor");
    c->add_option("--tol", cfg.solver_tol, "fixed-point residual tolerance");
    c->add_option("--workers", cfg.workers,
                  "worker threads (default: COVERTREE_WORKERS or hardware)");
    c->add_option("--report", cfg.report_path, "write JSON report here");
  };
  auto add_graph_source = [&](CLI::App* c) {
    c->add_option("--graph", cfg.graph_path, "graph JSON file");
    c->add_option("--localized", cfg.localized_m, "localized example parameter m");
    c->add_option("--lift-base", cfg.lift_base_path, "base graph for a random lift");
    c->add_option("--lift-n", cfg.lift_n, "number of lift copies");
    c->add_option("--lift-seed", cfg.seed, "lift permutation seed");
  };

  auto* bands = app.add_subcommand("bands", "detect the cover band structure");
  add_graph_source(bands);
  add_common(bands);
  bands->add_option("--grid-lo", [&cfg](const CLI::results_t& r) {
    cfg.grid_lo = std::stod(r[0]);
    return true;
  }, "grid lower end");
  bands->add_option("--grid-hi", [&cfg](const CLI::results_t& r) {
    cfg.grid_hi = std::stod(r[0]);
    return true;
  }, "grid upper end");

  auto* metrics = app.add_subcommand("metrics", "delocalization parameters at bulk energies");
  add_graph_source(metrics);
  add_common(metrics);
  metrics->add_option("--lambda", lambda_csv, "energies, comma separated")->required();
  metrics->add_option("--s", s_csv, "s exponents, comma separated");

  auto* verify = app.add_subcommand("verify", "eigenvector bound verification");
  add_graph_source(verify);
  add_common(verify);
  verify->add_option("--p", p_csv, "p-norm exponents, comma separated");
  verify->add_flag("--summary", cfg.summary, "CSV summary on stdout");
  verify->add_flag("--kernel", cfg.kernel, "include a kernel-mass sweep");
  verify->add_option("--kernel-lambda", kernel_lambda, "kernel sweep energy");

  auto* cycle = app.add_subcommand("cycle", "N-cycle sup-norm bounds");
  add_common(cycle);
  cycle->add_option("--n", cfg.cycle_n, "cycle length")->required();
  cycle->add_option("--w", w_csv, "potential pattern, comma separated")->required();

  auto* sweep = app.add_subcommand("lift-sweep", "bound margins across lift sizes");
  add_common(sweep);
  sweep->add_option("--base", cfg.lift_base_path, "base graph JSON")->required();
  sweep->add_option("--n", n_csv, "lift sizes, comma separated")->required();
  sweep->add_option("--seed", cfg.seed, "seed");
  sweep->add_option("--csv", cfg.out_path, "CSV output path (default stdout)");
  sweep->add_option("--p", p_csv, "p-norm exponents");

  auto* ct = app.add_subcommand("ct-check", "combes-thomas sphere-sum decay");
  add_graph_source(ct);
  add_common(ct);
  ct->add_option("--lambda", lambda_csv, "gap energies (default: auto-picked)");
  ct->add_option("--n-max", cfg.n_max, "largest sphere radius");

  auto* plot = app.add_subcommand("emit-plot", "tabular plot data from a report");
  plot->add_option("--report", cfg.report_path, "input report JSON")->required();
  plot->add_option("--kind", cfg.plot_kind,
                   "supnorm-vs-ell | ct-decay | kernel-mass")->required();
  plot->add_option("--out", cfg.out_path, "output table path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : covertree::kExitUsage;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  if (!p_csv.empty()) cfg.p_list = parse_ints(p_csv);
  if (!s_csv.empty()) cfg.s_list = parse_doubles(s_csv);
  if (!w_csv.empty()) cfg.cycle_w = parse_doubles(w_csv);
  if (!n_csv.empty()) cfg.lift_n_list = parse_ints(n_csv);
  if (!lambda_csv.empty()) cfg.lambdas = parse_doubles(lambda_csv);
  if (!std::isnan(kernel_lambda)) cfg.kernel_lambda = kernel_lambda;

  try {
    return covertree::run_command(cfg);
  } catch (const covertree::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return covertree::kExitUsage;
  } catch (const covertree::GraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return covertree::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return covertree::kExitAssertionFailed;
  }
}
