#include <doctest.h>

#include <cmath>

#include "covertree/graph.hpp"
#include "covertree/zeta.hpp"
#include "oracles.hpp"

using namespace covertree;

TEST_CASE("regular tree closed form at finite eta") {
  // 3-regular (q=2), W=0, gamma close to the real axis
  auto k4 = complete_graph(4);
  SpectralParam sp{0.0, 1e-8};
  auto zt = solve_zeta(k4, sp);
  CHECK(zt.converged);
  Complex expect = oracles::regular_tree_zeta(2, sp.gamma());
  for (const auto& z : zt.val) {
    CHECK(std::abs(z - expect) < 1e-9);
    CHECK(z.imag() < 0);
  }
  // reference value -i/sqrt(2) at lambda = 0
  CHECK(std::abs(expect - Complex(0, -1.0 / std::sqrt(2.0))) < 1e-7);
}

TEST_CASE("large Im gamma asymptotics") {
  auto g = localized_example(3);
  double T = 50.0;
  auto zt = solve_zeta(g, {0.7, T});
  CHECK(zt.converged);
  for (int b = 0; b < g.directed_edge_count(); ++b) {
    Complex lead = -1.0 / (g.potential(g.de_terminus(b)) - Complex(0.7, T));
    CHECK(std::abs(zt.val[b] - lead) < 10.0 * 3.0 / (T * T));
    CHECK(std::abs(zt.val[b]) <= 2.0 / T);
  }
}

TEST_CASE("lift invariance of zeta, solved independently") {
  auto base = PotentialGraph::build({{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}},
                                    {0.0, 1.0, -1.0, 2.0});
  auto lm = n_lift(base, 2, 20240701ull);
  REQUIRE(lm.lift.connected());
  SpectralParam sp{0.7, 1e-6};
  auto zb = solve_zeta(base, sp);
  auto zl = solve_zeta(lm.lift, sp);
  CHECK(zb.converged);
  CHECK(zl.converged);
  for (int b = 0; b < lm.lift.directed_edge_count(); ++b)
    CHECK(std::abs(zl.val[b] - zb.val[lm.project_edge(b)]) < 1e-9);
}

TEST_CASE("shift covariance: (W+c, lambda+c) gives the same table") {
  auto g = localized_example(2);
  double c = 3.25;
  std::vector<double> shifted(g.potentials());
  for (double& w : shifted) w += c;
  auto gs = PotentialGraph::build(g.edges(), shifted);
  SpectralParam sp{0.4, 1e-7};
  SpectralParam sps{0.4 + c, 1e-7};
  auto a = solve_zeta(g, sp);
  auto b = solve_zeta(gs, sps);
  for (int i = 0; i < g.directed_edge_count(); ++i)
    CHECK(std::abs(a.val[i] - b.val[i]) < 1e-11);
}

TEST_CASE("boundary classification on the 3-regular tree") {
  auto k4 = complete_graph(4);

  SUBCASE("bulk at lambda = 0") {
    auto bt = boundary_zeta(k4, 0.0);
    CHECK(bt.cls == BoundaryClass::Bulk);
    Complex expect = oracles::regular_tree_zeta_boundary(2, 0.0);
    for (const auto& z : bt.val) CHECK(std::abs(z - expect) < 1e-10);
    CHECK(bt.min_abs_im == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  }

  SUBCASE("gap at lambda = 3.5") {
    auto bt = boundary_zeta(k4, 3.5);
    CHECK(bt.cls == BoundaryClass::Gap);
    CHECK(bt.max_abs_im < 1e-6);
    // real root of 2 z^2 - 3.5 z + 1 = 0 with |z| < 1/sqrt(2)
    double root = (3.5 - std::sqrt(3.5 * 3.5 - 8.0)) / 4.0;
    for (const auto& z : bt.val) CHECK(std::abs(z.real() - root) < 1e-9);
  }

  SUBCASE("pole at lambda = -1 for the localized example") {
    auto g = localized_example(2);
    auto bt = boundary_zeta(g, -1.0);
    CHECK(bt.cls == BoundaryClass::Pole);
    CHECK(bt.pole_strength > 0.1);
  }
}

TEST_CASE("identity 1/zeta_w(v) - zeta_v(w) = -1/G(v,v)") {
  auto g = localized_example(2);
  auto bt = boundary_zeta(g, 0.35);
  REQUIRE(bt.cls == BoundaryClass::Bulk);
  for (int b = 0; b < g.directed_edge_count(); ++b) {
    int v = g.de_terminus(b);
    Complex lhs = 1.0 / bt.val[b] - bt.val[g.de_reverse(b)];
    Complex rhs = -1.0 / green_diag(g, bt, v);
    CHECK(std::abs(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("band_scan on reference graphs") {
  SUBCASE("3-regular: single band [-2 sqrt 2, 2 sqrt 2], no poles") {
    auto bs = band_scan(complete_graph(4), {});
    REQUIRE(bs.bands.size() == 1);
    CHECK(bs.bands[0].lo == doctest::Approx(-2.0 * std::sqrt(2.0)).epsilon(5e-3));
    CHECK(bs.bands[0].hi == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(5e-3));
    CHECK(bs.exceptional.empty());
    CHECK(bs.endpoints.size() == 2);
  }

  SUBCASE("localized example flags -1 as exceptional") {
    BandScanOptions opt;
    opt.grid_step = 0.01;
    auto bs = band_scan(localized_example(2), opt);
    bool found = false;
    for (double f : bs.exceptional)
      if (std::abs(f + 1.0) < 0.011) found = true;
    CHECK(found);
  }

  SUBCASE("constant potential shifts the band structure") {
    auto base = band_scan(complete_graph(4), {});
    BandScanOptions opt;
    opt.grid_lo = -4.0 + 10.0;
    opt.grid_hi = 4.0 + 10.0;
    auto shifted = band_scan(complete_graph(4, 10.0), opt);
    REQUIRE(shifted.bands.size() == base.bands.size());
    for (std::size_t i = 0; i < base.bands.size(); ++i) {
      CHECK(std::abs(shifted.bands[i].lo - 10.0 - base.bands[i].lo) < 2.0 * 0.005);
      CHECK(std::abs(shifted.bands[i].hi - 10.0 - base.bands[i].hi) < 2.0 * 0.005);
    }
  }
}

TEST_CASE("green_diag and green_path") {
  auto k4 = complete_graph(4);
  auto bt = boundary_zeta(k4, 0.0);
  REQUIRE(bt.cls == BoundaryClass::Bulk);

  Complex gd = green_diag(k4, bt, 0);
  CHECK(std::abs(gd - Complex(0, std::sqrt(2.0) / 3.0)) < 1e-10);

  SUBCASE("resolvent norm bound at large eta") {
    auto zt = solve_zeta(k4, {0.3, 10.0});
    for (int v = 0; v < 4; ++v) CHECK(std::abs(green_diag(k4, zt, v)) <= 0.1 + 1e-12);
  }

  SUBCASE("bulk Im G > 0 on a random 2-lift") {
    auto lm = n_lift(complete_graph(4), 2, 5);
    if (lm.lift.connected()) {
      auto btl = boundary_zeta(lm.lift, 0.6);
      REQUIRE(btl.cls == BoundaryClass::Bulk);
      for (int v = 0; v < lm.lift.vertex_count(); ++v)
        CHECK(green_diag(lm.lift, btl, v).imag() > 0);
    }
  }

  SUBCASE("path product: exponential decay on the regular tree") {
    // length-r non-backtracking path in K4 wraps around; the cover value
    // only depends on the path length
    std::vector<int> path{0, 1, 2, 0, 1};  // NB in K4 (no immediate reversal)
    Complex gp = green_path(k4, bt.val, gd, path);
    CHECK(std::abs(gp) ==
          doctest::Approx(std::abs(gd) * std::pow(1.0 / std::sqrt(2.0), 4)).epsilon(1e-9));
    // length 0
    CHECK(green_path(k4, bt.val, gd, std::vector<int>{2}) == gd);
    // backtracking rejected
    CHECK_THROWS_AS(green_path(k4, bt.val, gd, std::vector<int>{0, 1, 0}),
                    SolverError);
  }

  SUBCASE("reversal symmetry G(v,w) = G(w,v) on an irregular graph") {
    auto g = localized_example(2);
    auto btg = boundary_zeta(g, 0.35);
    REQUIRE(btg.cls == BoundaryClass::Bulk);
    std::vector<int> fwd{0, 1, 2, 6};
    std::vector<int> bwd{6, 2, 1, 0};
    Complex a = green_path(g, btg.val, green_diag(g, btg, 0), fwd);
    Complex b = green_path(g, btg.val, green_diag(g, btg, 6), bwd);
    CHECK(std::abs(a - b) < 1e-9);
  }
}

TEST_CASE("truncated-tree oracle agrees with green_diag") {
  auto g = localized_example(2);

  SUBCASE("gap energies: exponential convergence in depth") {
    auto bt = boundary_zeta(g, 4.1);  // above the spectrum enclosure edge
    REQUIRE(bt.cls == BoundaryClass::Gap);
    Complex gd = green_diag(g, bt, 0);
    double err_prev = 1e300;
    for (int R : {6, 10, 14}) {
      Complex tr = oracles::truncated_tree_green(g, 0, Complex(4.1, 0.0), R);
      double err = std::abs(tr - gd);
      CHECK(err < err_prev);
      err_prev = err;
    }
    CHECK(err_prev < 1e-6);
  }

  SUBCASE("complex gamma") {
    Complex gamma(0.3, 0.6);
    auto zt = solve_zeta(g, {0.3, 0.6});
    Complex gd = green_diag(g, zt, 5);
    Complex tr = oracles::truncated_tree_green(g, 5, gamma, 16);
    CHECK(std::abs(tr - gd) < 1e-4);
  }
}

TEST_CASE("combes-thomas sphere sums") {
  auto k4 = complete_graph(4);
  auto bs = band_scan(k4, {});
  double lam = 3.0;  // delta = 3 - 2 sqrt 2
  auto bt = boundary_zeta(k4, lam);
  REQUIRE(bt.cls == BoundaryClass::Gap);
  double delta = bs.distance(lam);
  CHECK(delta == doctest::Approx(3.0 - 2.0 * std::sqrt(2.0)).epsilon(0.02));
  auto rep = combes_thomas_check(k4, bt, delta, 10);
  CHECK(rep.all_pass);
  // n = 0 row is the squared resolvent bound
  CHECK(rep.rows[0].max_sphere_sum <= 4.0 / (delta * delta));
  // margins strictly positive
  for (const auto& row : rep.rows) CHECK(row.min_margin > 0.0);
}

TEST_CASE("combes-thomas in an internal impurity gap") {
  auto g = PotentialGraph::build(complete_graph(4).edges(), {0, 0, 0, 5});
  BandScanOptions opt;
  opt.grid_step = 0.01;
  opt.ladder.eta_min = 1e-5;
  auto bs = band_scan(g, opt);
  REQUIRE(bs.bands.size() >= 2);
  double mid = 0.5 * (bs.bands[0].hi + bs.bands[1].lo);
  auto bt = boundary_zeta(g, mid);
  REQUIRE(bt.cls == BoundaryClass::Gap);
  auto rep = combes_thomas_check(g, bt, bs.distance(mid), 8);
  CHECK(rep.all_pass);
  for (const auto& row : rep.rows) CHECK(row.min_margin > 0.0);
}

TEST_CASE("eta-Lipschitz consistency of the ladder rungs") {
  auto g = localized_example(2);
  ZetaTable prev;
  bool have_prev = false;
  double eta = 1e-3;
  for (int k = 0; k < 6; ++k, eta *= 0.5) {
    auto zt = solve_zeta(g, {0.35, eta});
    if (have_prev) {
      double step = 0;
      for (int b = 0; b < g.directed_edge_count(); ++b)
        step = std::max(step, std::abs(zt.val[b] - prev.val[b]));
      CHECK(step <= 10.0 * 2.0 * eta);  // |zeta(2 eta) - zeta(eta)| <= C eta
    }
    prev = zt;
    have_prev = true;
  }
}

TEST_CASE("non-convergence carries the residual") {
  auto k4 = complete_graph(4);
  SolveOptions opt;
  opt.max_sweeps = 2;  // cannot converge from cold start
  opt.tol = 1e-14;
  CHECK_THROWS_AS(solve_zeta(k4, {0.3, 1e-6}, nullptr, opt), SolverError);
  opt.raise_on_nonconvergence = false;
  auto zt = solve_zeta(k4, {0.3, 1e-6}, nullptr, opt);
  CHECK_FALSE(zt.converged);
  CHECK(zt.residual > 0);
}

TEST_CASE("solver error paths") {
  auto p5 = path_graph(5);
  CHECK_THROWS_AS(solve_zeta(p5, {0.0, 0.1}), SolverError);  // degree-1 ends
  auto k4 = complete_graph(4);
  CHECK_THROWS_AS(solve_zeta(k4, {0.0, 0.0}), SolverError);  // eta must be > 0
}
