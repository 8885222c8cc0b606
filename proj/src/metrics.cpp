#include "covertree/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace covertree {

namespace {

void require_bulk(const BoundaryTable& bt, const char* what) {
  if (bt.cls != BoundaryClass::Bulk)
    throw MetricsError(std::string(what) + " undefined outside bulk");
}

}  // namespace

double z_lambda(const PotentialGraph& g, const BoundaryTable& bt) {
  if (bt.cls != BoundaryClass::Bulk) throw MetricsError("z_lambda undefined outside bulk");
  double z = 1e300;
  for (int b = 0; b < g.directed_edge_count(); ++b)
    z = std::min(z, std::abs(bt.val[b].imag()));
  return z;
}

double Z_s_lambda(const PotentialGraph& g, const BoundaryTable& bt, double s) {
  require_bulk(bt, "Z_s_lambda");
  if (!(s > 1.0))
    throw MetricsError("Z_s_lambda requires s > 1 (s = 1 is the conservation identity)");
  double best = 0.0;
  for (int b = 0; b < g.directed_edge_count(); ++b) {
    const double zb2 = std::norm(bt.val[b]);
    const double imb = std::abs(bt.val[b].imag());
    double acc = 0.0;
    for (int nxt : g.nb_successors(b))
      acc += std::pow(zb2, s) *
             std::pow(std::abs(bt.val[nxt].imag()) / imb, s);
    best = std::max(best, acc);
  }
  return best;
}

double script_Z_lambda(const PotentialGraph& g, const BoundaryTable& bt) {
  require_bulk(bt, "script_Z");
  double best = 0.0;
  for (int b = 0; b < g.directed_edge_count(); ++b) {
    const double zb2 = std::norm(bt.val[b]);
    const double imb = std::abs(bt.val[b].imag());
    for (int nxt : g.nb_successors(b))
      best = std::max(best, zb2 * std::abs(bt.val[nxt].imag()) / imb);
  }
  return best;
}

ConservationReport conservation_check(const PotentialGraph& g, const BoundaryTable& bt) {
  ConservationReport rep;
  if (bt.cls != BoundaryClass::Bulk) {
    rep.applicable = false;  // Im zeta vanishes in gaps, nothing to conserve
    return rep;
  }
  rep.applicable = true;
  for (int b = 0; b < g.directed_edge_count(); ++b) {
    double out = 0.0;
    for (int nxt : g.nb_successors(b)) out += std::abs(bt.val[nxt].imag());
    const double in = std::abs(bt.val[b].imag()) / std::norm(bt.val[b]);
    rep.max_residual = std::max(rep.max_residual, std::abs(out - in));
    rep.max_z1_deviation = std::max(rep.max_z1_deviation, std::abs(out / in - 1.0));
  }
  return rep;
}

CycleProductReport cycle_product(const PotentialGraph& g, const BoundaryTable& bt,
                                 std::span<const int> cycle) {
  const int m = static_cast<int>(cycle.size());
  if (m < 3) throw MetricsError("cycle_product: need at least 3 vertices");
  std::vector<char> seen(g.vertex_count(), 0);
  for (int v : cycle) {
    if (v < 0 || v >= g.vertex_count() || seen[v])
      throw MetricsError("cycle_product: not a simple cycle");
    seen[v] = 1;
  }
  CycleProductReport rep;
  rep.covers_all_vertices = m == g.vertex_count();
  Complex prod = 1.0;
  for (int k = 0; k < m; ++k)
    prod *= bt.val[g.de_index(cycle[k], cycle[(k + 1) % m])];
  rep.value = std::abs(prod);
  rep.bound_applicable = bt.cls == BoundaryClass::Bulk && !rep.covers_all_vertices;
  if (rep.bound_applicable) {
    double z = z_lambda(g, bt);
    rep.bound = 1.0 - z * z / 4.0;
    rep.pass = rep.value <= rep.bound + 1e-8;
  }
  return rep;
}

PathDecayReport path_decay_profile(const PotentialGraph& g, const BoundaryTable& bt,
                                   double s, int r_max, int ell_G) {
  require_bulk(bt, "path_decay_profile");
  if (s < 1.0) throw MetricsError("path_decay_profile: need s >= 1");
  if (r_max > ell_G)
    throw MetricsError("path_decay_profile: r_max exceeds ell_G");

  const int bcount = g.directed_edge_count();
  PathDecayReport rep;
  rep.s = s;
  rep.r_max = r_max;

  std::vector<double> fanout(bcount);
  for (int b = 0; b < bcount; ++b)
    fanout[b] = static_cast<double>(g.nb_successors(b).size());

  if (s == 1.0) {
    // Exact identity: sum over paths of |prod zeta|^2 |Im zeta(last)| equals
    // |Im zeta(b1)| at every length.
    rep.identity_residual.assign(r_max + 1, 0.0);
    std::vector<double> cur(bcount), nxt(bcount);
    for (int b1 = 0; b1 < bcount; ++b1) {
      std::fill(cur.begin(), cur.end(), 0.0);
      cur[b1] = std::norm(bt.val[b1]);
      const double target = std::abs(bt.val[b1].imag());
      for (int r = 1; r <= r_max; ++r) {
        if (r > 1) {
          std::fill(nxt.begin(), nxt.end(), 0.0);
          for (int b = 0; b < bcount; ++b) {
            if (cur[b] == 0.0) continue;
            for (int t : g.nb_successors(b)) nxt[t] += cur[b] * std::norm(bt.val[t]);
          }
          cur.swap(nxt);
        }
        double total = 0.0;
        for (int b = 0; b < bcount; ++b) {
          if (cur[b] == 0.0) continue;
          double fan = 0.0;
          for (int t : g.nb_successors(b)) fan += std::abs(bt.val[t].imag());
          total += cur[b] * fan;
        }
        rep.identity_residual[r] = std::max(rep.identity_residual[r],
                                            std::abs(total - target));
      }
    }
    return rep;
  }

  const double z = z_lambda(g, bt);
  const double Zs = Z_s_lambda(g, bt, s);
  rep.rows.resize(r_max + 1);
  for (int r = 0; r <= r_max; ++r) {
    auto& row = rep.rows[r];
    row.r = r;
    row.forward_bound = std::pow(z, -2.0 * s) * std::pow(Zs, r);
    row.reversed_bound = std::pow(z, -6.0 * s) * std::pow(Zs, r);
    row.single_bound = std::pow(z, -2.0) * std::pow(std::pow(Zs, 1.0 / s), r);
  }
  rep.rows[0].forward_sum_max = 1.0;
  rep.rows[0].reversed_sum_max = 1.0;
  rep.rows[0].single_path_max = 1.0;

  std::vector<double> fw(bcount), rv(bcount), mx(bcount), scratch(bcount);
  for (int b1 = 0; b1 < bcount; ++b1) {
    const double wf1 = std::pow(std::norm(bt.val[b1]), s);
    const double wr1 = std::pow(std::norm(bt.val[g.de_reverse(b1)]), s);
    const double wm1 = std::norm(bt.val[b1]);
    std::fill(fw.begin(), fw.end(), 0.0);
    std::fill(rv.begin(), rv.end(), 0.0);
    std::fill(mx.begin(), mx.end(), 0.0);
    fw[b1] = wf1;
    rv[b1] = wr1;
    mx[b1] = wm1;
    for (int r = 1; r <= r_max; ++r) {
      if (r > 1) {
        // advance all three DP layers by one non-backtracking step
        std::fill(scratch.begin(), scratch.end(), 0.0);
        for (int b = 0; b < bcount; ++b) {
          if (fw[b] == 0.0) continue;
          for (int t : g.nb_successors(b))
            scratch[t] += fw[b] * std::pow(std::norm(bt.val[t]), s);
        }
        fw.swap(scratch);
        std::fill(scratch.begin(), scratch.end(), 0.0);
        for (int b = 0; b < bcount; ++b) {
          if (rv[b] == 0.0) continue;
          for (int t : g.nb_successors(b))
            scratch[t] += rv[b] * std::pow(std::norm(bt.val[g.de_reverse(t)]), s);
        }
        rv.swap(scratch);
        std::fill(scratch.begin(), scratch.end(), 0.0);
        for (int b = 0; b < bcount; ++b) {
          if (mx[b] == 0.0) continue;
          for (int t : g.nb_successors(b))
            scratch[t] = std::max(scratch[t], mx[b] * std::norm(bt.val[t]));
        }
        mx.swap(scratch);
      }
      double fsum = 0.0, rsum = 0.0, mmax = 0.0;
      for (int b = 0; b < bcount; ++b) {
        fsum += fw[b] * fanout[b];
        rsum += rv[b] * fanout[b];
        mmax = std::max(mmax, mx[b]);
      }
      auto& row = rep.rows[r];
      row.forward_sum_max = std::max(row.forward_sum_max, fsum);
      row.reversed_sum_max = std::max(row.reversed_sum_max, rsum);
      row.single_path_max = std::max(row.single_path_max, mmax);
    }
  }
  const double slack = 1e-9;
  for (auto& row : rep.rows) {
    row.pass = row.forward_sum_max <= row.forward_bound + slack &&
               row.reversed_sum_max <= row.reversed_bound + slack &&
               row.single_path_max <= row.single_bound + slack;
    rep.all_pass = rep.all_pass && row.pass;
  }
  return rep;
}

DelocalizationParams delocalization_params(const PotentialGraph& g,
                                           const BoundaryTable& bt,
                                           std::vector<double> s_list,
                                           double tol) {
  require_bulk(bt, "delocalization_params");
  DelocalizationParams p;
  p.lambda = bt.lambda;
  p.z = z_lambda(g, bt);
  p.script_Z = script_Z_lambda(g, bt);
  std::sort(s_list.begin(), s_list.end());
  s_list.erase(std::unique(s_list.begin(), s_list.end()), s_list.end());
  bool has2 = false;
  for (double s : s_list) {
    if (s <= 1.0) continue;
    p.Z_s[s] = Z_s_lambda(g, bt, s);
    if (s == 2.0) has2 = true;
  }
  double Z2 = has2 ? p.Z_s[2.0] : Z_s_lambda(g, bt, 2.0);
  if (!has2) p.Z_s[2.0] = Z2;
  p.M = std::pow(Z2, -0.25);
  p.conservation_residual = conservation_check(g, bt).max_residual;

  p.Z_strictly_below_one = true;
  for (auto& [s, Z] : p.Z_s) {
    if (!(Z <= 1.0 - 10.0 * tol)) {
      p.Z_strictly_below_one = false;
      p.marginal = Z <= 1.0 + 10.0 * tol;
    }
  }
  return p;
}

}  // namespace covertree
