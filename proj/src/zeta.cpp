#include "covertree/zeta.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "covertree/parallel.hpp"

namespace covertree {

namespace {

int auto_sweeps(const PotentialGraph& g, const SolveOptions& opt) {
  int base = opt.max_sweeps > 0 ? opt.max_sweeps
                                : std::max(2000, 20 * g.directed_edge_count());
  return base * std::max(1, opt.budget_factor);
}

double potential_sup(const PotentialGraph& g) {
  double s = 0;
  for (int v = 0; v < g.vertex_count(); ++v)
    s = std::max(s, std::abs(g.potential(v)));
  return s;
}

}  // namespace

ZetaTable solve_zeta(const PotentialGraph& g, SpectralParam gamma,
                     const ZetaTable* init, SolveOptions opt) {
  if (!g.connected()) throw SolverError("solve_zeta: graph must be connected");
  if (g.min_degree() < 2) throw SolverError("solve_zeta: minimal degree must be >= 2");
  if (!(gamma.eta > 0)) throw SolverError("solve_zeta: need Im gamma > 0");

  const int bcount = g.directed_edge_count();
  ZetaTable zt;
  zt.gamma = gamma;
  if (init) {
    if (static_cast<int>(init->val.size()) != bcount)
      throw SolverError("solve_zeta: init size mismatch");
    for (const Complex& z : init->val)
      if (!(z.imag() < 0)) throw SolverError("solve_zeta: init must have Im < 0");
    zt.val = init->val;
  } else {
    zt.val.assign(bcount, Complex(0.0, -1.0));
  }

  const Complex cg = gamma.gamma();
  const double alpha = opt.damping;
  const int max_sweeps = auto_sweeps(g, opt);
  const int n = g.vertex_count();
  std::vector<Complex> denom(bcount), vertex_sum(n);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // sum over N(v)\{w} = (sum over all out-edges of v) - reversal term
    for (int v = 0; v < n; ++v) vertex_sum[v] = g.potential(v) - cg;
    for (int b = 0; b < bcount; ++b) vertex_sum[g.de_origin(b)] += zt.val[b];
    double res = 0.0;
    for (int b = 0; b < bcount; ++b) {
      Complex d = vertex_sum[g.de_terminus(b)] - zt.val[g.de_reverse(b)];
      denom[b] = d;
      res = std::max(res, std::abs(zt.val[b] * d + 1.0));
    }
    zt.sweeps = sweep;
    zt.residual = res;
    if (res <= opt.tol) {
      zt.converged = true;
      return zt;
    }
    for (int b = 0; b < bcount; ++b) {
      zt.val[b] = (1.0 - alpha) * zt.val[b] + alpha * (-1.0 / denom[b]);
      if (!(zt.val[b].imag() < 0)) throw SolverError("Herglotz sign lost");
    }
  }
  zt.residual = zeta_residual(g, gamma, zt.val);
  zt.converged = zt.residual <= opt.tol;
  if (!zt.converged && opt.raise_on_nonconvergence) {
    std::ostringstream os;
    os << "solve_zeta: no convergence within " << max_sweeps
       << " sweeps (residual " << zt.residual << ")";
    throw SolverError(os.str());
  }
  return zt;
}

double zeta_residual(const PotentialGraph& g, SpectralParam gamma,
                     std::span<const Complex> val) {
  const Complex cg = gamma.gamma();
  double res = 0.0;
  for (int b = 0; b < g.directed_edge_count(); ++b) {
    Complex d = g.potential(g.de_terminus(b)) - cg;
    for (int s : g.nb_successors(b)) d += val[s];
    res = std::max(res, std::abs(val[b] * d + 1.0));
  }
  return res;
}

std::string to_string(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::Bulk: return "bulk";
    case BoundaryClass::Gap: return "gap";
    case BoundaryClass::Pole: return "pole";
    default: return "undetermined";
  }
}

BoundaryTable boundary_zeta(const PotentialGraph& g, double lambda,
                            LadderOptions opt, const ZetaTable* warm_start) {
  BoundaryTable bt;
  bt.lambda = lambda;

  ZetaTable cur, prev;
  bool have_prev = false;
  int pole_hits = 0;
  double prev_max_abs = 0.0;
  double eta = opt.eta_start;
  bool all_converged = true;
  std::ostringstream diag;

  SolveOptions rung_solve = opt.solve;
  rung_solve.raise_on_nonconvergence = false;  // the ladder retries itself
  const ZetaTable* init = warm_start;
  for (bool last = false; !last; eta *= 0.5) {
    last = eta * 0.5 < opt.eta_min;
    SpectralParam sp{lambda, eta};
    ZetaTable next;
    try {
      next = solve_zeta(g, sp, init, rung_solve);
    } catch (const SolverError&) {
      // A poisoned warm start (e.g. forwarded across a band edge) can lose
      // the Herglotz sign; retry cold before giving up on the rung.
      next = solve_zeta(g, sp, nullptr, rung_solve);
    }
    if (!next.converged) {
      SolveOptions retry = rung_solve;
      retry.budget_factor = std::max(10, rung_solve.budget_factor);
      next = solve_zeta(g, sp, &next, retry);
    }
    if (!next.converged) {
      all_converged = false;
      diag << "rung eta=" << eta << " residual=" << next.residual << "; ";
      bt.cls = BoundaryClass::Undetermined;
      bt.val = next.val;
      bt.eta_last = eta;
      bt.converged = false;
      bt.diagnostic = diag.str() + "non-convergence";
      return bt;
    }
    prev = std::move(cur);
    have_prev = have_prev || prev.converged;
    cur = std::move(next);
    init = &cur;

    double max_abs = 0.0;
    for (const Complex& z : cur.val) max_abs = std::max(max_abs, std::abs(z));
    // A pole scales like mass/eta down the ladder; a bulk or gap table
    // saturates. Require the 1/eta growth signature, not just magnitude,
    // and ignore the large-eta rungs where |zeta| > 1 is routine.
    bool growing = prev_max_abs > 0.0 && max_abs >= 1.5 * prev_max_abs;
    if (eta <= 1e-2 && max_abs * eta > opt.pole_threshold && growing) {
      if (++pole_hits >= 2) {
        bt.cls = BoundaryClass::Pole;
        bt.val = cur.val;
        bt.pole_strength = max_abs * eta;
        bt.max_abs = max_abs;
        bt.eta_last = eta;
        bt.converged = true;
        bt.diagnostic = "pole detected on successive rungs";
        return bt;
      }
    } else {
      pole_hits = 0;
    }
    prev_max_abs = max_abs;
  }

  bt.eta_last = cur.gamma.eta;
  bt.converged = all_converged;

  // Linear extrapolation to eta = 0 using the last two rungs (eta, 2 eta).
  const int bcount = g.directed_edge_count();
  bt.val.resize(bcount);
  double step = 0.0;
  if (have_prev) {
    for (int b = 0; b < bcount; ++b) {
      bt.val[b] = 2.0 * cur.val[b] - prev.val[b];
      step = std::max(step, std::abs(cur.val[b] - prev.val[b]));
    }
  } else {
    bt.val = cur.val;
  }

  bt.min_abs_im = 1e300;
  for (const Complex& z : bt.val) {
    bt.min_abs_im = std::min(bt.min_abs_im, std::abs(z.imag()));
    bt.max_abs_im = std::max(bt.max_abs_im, std::abs(z.imag()));
    bt.max_abs = std::max(bt.max_abs, std::abs(z));
  }

  // Empirical Lipschitz guard: successive rungs must be Cauchy before the
  // extrapolation is trusted.
  if (have_prev && step > 0.2 * (1.0 + bt.max_abs)) {
    bt.cls = BoundaryClass::Undetermined;
    bt.diagnostic = "extrapolation guard tripped";
    return bt;
  }

  if (bt.min_abs_im > opt.eps_band) {
    // In the bulk, min |Im zeta| * max |zeta| <= 1; a blow-up with large
    // imaginary part is a pole under the detection threshold, not a band.
    if (bt.min_abs_im * bt.max_abs > 50.0) {
      bt.cls = BoundaryClass::Undetermined;
      bt.diagnostic = "inconsistent bulk signature (|zeta| blow-up)";
      return bt;
    }
    bt.cls = BoundaryClass::Bulk;
  } else if (bt.max_abs_im < opt.eps_gap && bt.max_abs < 1e6) {
    bt.cls = BoundaryClass::Gap;
  } else {
    bt.cls = BoundaryClass::Undetermined;
    bt.diagnostic = "between band and gap thresholds";
  }
  return bt;
}

double BandStructure::distance(double lambda) const {
  double d = 1e300;
  for (const auto& b : bands) {
    if (b.contains(lambda)) return 0.0;
    d = std::min(d, std::min(std::abs(lambda - b.lo), std::abs(lambda - b.hi)));
  }
  for (double f : exceptional) d = std::min(d, std::abs(lambda - f));
  return d;
}

std::optional<int> BandStructure::band_containing(double lambda) const {
  for (std::size_t i = 0; i < bands.size(); ++i)
    if (bands[i].contains(lambda)) return static_cast<int>(i);
  return std::nullopt;
}

double BandStructure::distance_to_exceptional_set(double lambda) const {
  double d = 1e300;
  for (double f : exceptional) d = std::min(d, std::abs(lambda - f));
  for (double e : endpoints) d = std::min(d, std::abs(lambda - e));
  return d;
}

BandStructure band_scan(const PotentialGraph& g, BandScanOptions opt) {
  if (!(opt.grid_step > 0)) throw SolverError("band_scan: grid step must be > 0");
  const double enclosure = g.max_degree() + potential_sup(g) + 1.0;
  const double lo = opt.grid_lo.value_or(-enclosure);
  const double hi = opt.grid_hi.value_or(enclosure);
  if (!(hi > lo)) throw SolverError("band_scan: empty grid");
  const double h = opt.grid_step;
  const int m = static_cast<int>(std::ceil((hi - lo) / h - 1e-12));

  BandStructure bs;
  bs.grid_lo = lo;
  bs.grid_hi = hi;
  bs.grid_step = h;
  bs.eta_min = opt.ladder.eta_min;

  std::vector<BoundaryClass> cls(m + 1, BoundaryClass::Undetermined);
  std::vector<double> strength(m + 1, 0.0);

  parallel_blocks(
      m + 1, opt.block_size,
      [&](int begin, int end) {
        // Warm-start forwarding along this contiguous sub-grid: the previous
        // point's first-rung solve seeds the next one.
        ZetaTable forward;
        bool have_forward = false;
        SolveOptions rung_solve = opt.ladder.solve;
        rung_solve.raise_on_nonconvergence = false;
        for (int i = begin; i < end; ++i) {
          double lam = lo + i * h;
          ZetaTable rung0;
          const ZetaTable* ws = nullptr;
          if (have_forward && forward.converged) {
            forward.gamma = SpectralParam{lam, opt.ladder.eta_start};
            ws = &forward;
          }
          try {
            rung0 = solve_zeta(g, SpectralParam{lam, opt.ladder.eta_start}, ws,
                               rung_solve);
          } catch (const SolverError&) {
            rung0 = solve_zeta(g, SpectralParam{lam, opt.ladder.eta_start},
                               nullptr, rung_solve);
          }
          forward = rung0;
          have_forward = true;
          auto bt = boundary_zeta(g, lam, opt.ladder,
                                  rung0.converged ? &rung0 : nullptr);
          cls[i] = bt.cls;
          strength[i] = bt.pole_strength;
        }
      },
      opt.workers);

  // Pole energies.
  for (int i = 0; i <= m; ++i)
    if (cls[i] == BoundaryClass::Pole) {
      double lam = lo + i * h;
      if (!bs.exceptional.empty() && lam - bs.exceptional.back() < 1.5 * h) continue;
      bs.exceptional.push_back(lam);
    }

  // Maximal bulk runs become bands; endpoints refined by bisection on the
  // bulk indicator with a 10x iteration budget (solves are slow near F').
  LadderOptions refine = opt.ladder;
  refine.solve.budget_factor = std::max(10, refine.solve.budget_factor);
  auto is_bulk = [&](double lam) {
    return boundary_zeta(g, lam, refine).cls == BoundaryClass::Bulk;
  };
  int i = 0;
  while (i <= m) {
    if (cls[i] != BoundaryClass::Bulk) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 <= m && cls[j + 1] == BoundaryClass::Bulk) ++j;
    Interval band{lo + i * h, lo + j * h};
    if (i > 0) {
      double a = lo + (i - 1) * h, b = band.lo;
      for (int it = 0; it < opt.bisection_iterations; ++it) {
        double mid = 0.5 * (a + b);
        (is_bulk(mid) ? b : a) = mid;
      }
      band.lo = b;
    }
    if (j < m) {
      double a = band.hi, b = lo + (j + 1) * h;
      for (int it = 0; it < opt.bisection_iterations; ++it) {
        double mid = 0.5 * (a + b);
        (is_bulk(mid) ? a : b) = mid;
      }
      band.hi = a;
    }
    bs.bands.push_back(band);
    bs.endpoints.push_back(band.lo);
    bs.endpoints.push_back(band.hi);
    i = j + 1;
  }

  if (bs.bands.empty() && check_c1(g).ok)
    throw SolverError("band detection failed");
  return bs;
}

Complex green_diag(const PotentialGraph& g, std::span<const Complex> val,
                   Complex gamma, int v) {
  Complex d = g.potential(v) - gamma;
  auto nb = g.neighbors(v);
  for (std::size_t k = 0; k < nb.size(); ++k) {
    // out-edges of v are contiguous and aligned with neighbors(v)
    d += val[g.de_index(v, nb[k])];
  }
  if (std::abs(d) < 1e-14) throw SolverError("diagonal Green pole");
  return 1.0 / d;
}

Complex green_diag(const PotentialGraph& g, const ZetaTable& zt, int v) {
  return green_diag(g, zt.val, zt.gamma.gamma(), v);
}

Complex green_diag(const PotentialGraph& g, const BoundaryTable& bt, int v) {
  return green_diag(g, bt.val, Complex(bt.lambda, 0.0), v);
}

Complex green_path(const PotentialGraph& g, std::span<const Complex> val,
                   Complex gdiag, std::span<const int> path) {
  if (path.size() < 1) throw SolverError("green_path: empty vertex sequence");
  Complex acc = gdiag;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (k >= 1 && path[k + 1] == path[k - 1])
      throw SolverError("green_path: backtracking path");
    acc *= val[g.de_index(path[k], path[k + 1])];
  }
  return acc;
}

CombesThomasReport combes_thomas_check(const PotentialGraph& g,
                                       const BoundaryTable& gap_table,
                                       double delta, int n_max) {
  if (gap_table.cls != BoundaryClass::Gap)
    throw SolverError("combes_thomas_check: lambda must be classified gap");
  if (!(delta > 0)) throw SolverError("combes_thomas_check: need delta > 0");

  const int n = g.vertex_count();
  const int bcount = g.directed_edge_count();
  const double D = g.max_degree();
  CombesThomasReport rep;
  rep.lambda = gap_table.lambda;
  rep.delta = delta;
  rep.rows.resize(n_max + 1);
  for (int r = 0; r <= n_max; ++r) {
    rep.rows[r].n = r;
    rep.rows[r].bound = 4.0 / (delta * delta) *
                        std::pow(1.0 + delta / (2.0 * D), -2.0 * r);
    rep.rows[r].min_margin = 1e300;
  }

  std::vector<double> w2(bcount);
  for (int b = 0; b < bcount; ++b) {
    double a = std::abs(gap_table.val[b]);
    w2[b] = a * a;
  }

  std::vector<double> curw(bcount), nextw(bcount);
  for (int x = 0; x < n; ++x) {
    double g2 = std::norm(green_diag(g, gap_table, x));
    std::fill(curw.begin(), curw.end(), 0.0);
    for (int u : g.neighbors(x)) {
      int b = g.de_index(x, u);
      curw[b] = w2[b];
    }
    for (int r = 0; r <= n_max; ++r) {
      double s;
      if (r == 0) {
        s = g2;
      } else {
        if (r > 1) {
          std::fill(nextw.begin(), nextw.end(), 0.0);
          for (int b = 0; b < bcount; ++b) {
            if (curw[b] == 0.0) continue;
            for (int sidx : g.nb_successors(b)) nextw[sidx] += curw[b] * w2[sidx];
          }
          curw.swap(nextw);
        }
        double total = 0.0;
        for (double v : curw) total += v;
        s = g2 * total;
      }
      auto& row = rep.rows[r];
      row.max_sphere_sum = std::max(row.max_sphere_sum, s);
      row.min_margin = std::min(row.min_margin, row.bound - s);
    }
  }
  rep.all_pass = true;
  for (auto& row : rep.rows) {
    row.pass = row.min_margin >= 0.0;
    rep.all_pass = rep.all_pass && row.pass;
  }
  return rep;
}

}  // namespace covertree
