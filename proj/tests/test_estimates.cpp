#include <doctest.h>

#include "homog/estimates.hpp"
#include "support/dense_torus.hpp"

using namespace homog;

namespace {

EstimatesContext layered_ctx() {
  return make_context(FiberBundle::from_example(make_example("layered-real-1d")), 48);
}

EstimatesContext weighted_layered_ctx() {
  ExampleCase ex = make_example("layered-real-1d");
  FieldFlags qf;
  qf.hermitian = qf.positive = qf.real_entries = qf.band_limited = true;
  ex.Q = CoefficientField::from_closure(
      1, 1, 1,
      [](const VectorXd& frac) {
        MatrixXcd m(1, 1);
        m(0, 0) = 1.0 + 0.5 * std::cos(2 * M_PI * frac(0));
        return m;
      },
      32, qf);
  return make_context(FiberBundle::from_example(ex), 48);
}

TorusData single_mode_datum(int dim) {
  TorusData data;
  FreqVec mode(dim, 0);
  mode[0] = 1;
  data.phi[mode] = VectorXcd::Ones(1);
  return data;
}

}  // namespace

TEST_SUITE_BEGIN("estimates");

TEST_CASE("fiber error fundamentals") {
  SUBCASE("constant coefficients give zero discrepancy") {
    MatrixXcd g0(2, 2);
    g0 << 2.0, 0.4, 0.4, 1.3;
    FiberBundle bundle{Lattice::cubic(2), symbol_gradient(2),
                       CoefficientField::constant(2, g0), std::nullopt, std::nullopt};
    EstimatesContext ctx = make_context(bundle, 8);
    VectorXd k(2);
    k << 0.2, -0.3;
    CHECK(fiber_error(ctx, k, 0.05, 1.7, 2.0, 6).fiber_error < 1e-10);
  }
  SUBCASE("tau = 0 gives exactly zero") {
    EstimatesContext ctx = layered_ctx();
    VectorXd k(1);
    k << 0.3;
    CHECK(fiber_error(ctx, k, 0.1, 0.0, 2.0, 16).fiber_error == 0.0);
  }
  SUBCASE("frozen regression value for the layered medium") {
    // Established by a cutoff-doubling oracle run (stable through cutoff 64).
    EstimatesContext ctx = layered_ctx();
    VectorXd k(1);
    k << 0.25;
    double e = fiber_error(ctx, k, 0.1, 1.0, 2.0, 32).fiber_error;
    CHECK(e == doctest::Approx(6.513368798e-03).epsilon(1e-9));
  }
  SUBCASE("contraction bound and tau symmetry") {
    EstimatesContext ctx = layered_ctx();
    VectorXd k(1);
    k << 0.17;
    for (double eps : {0.3, 0.05}) {
      ErrorSample plus = fiber_error(ctx, k, eps, 2.3, 1.5, 16);
      ErrorSample minus = fiber_error(ctx, k, eps, -2.3, 1.5, 16);
      CHECK(plus.fiber_error == minus.fiber_error);  // cosine is even
      // || R^{s/2} || is the largest smoothing weight over the blocks
      FiberOperator op = assemble(ctx.bundle, k, 16);
      double wmax = 0;
      for (const auto& blk : op.blocks)
        wmax = std::max(wmax, smoothing_weights(blk, 1, eps, 1.5).maxCoeff());
      CHECK(plus.fiber_error <= 2.0 * wmax + 1e-10);
      CHECK(plus.fiber_error >= 0.0);
    }
  }
  SUBCASE("monotone in the smoothing order s") {
    EstimatesContext ctx = layered_ctx();
    VectorXd k(1);
    k << 0.21;
    double prev = 1e300;
    for (double s : {0.0, 1.0, 1.5, 2.0}) {
      double e = fiber_error(ctx, k, 0.08, 1.0, s, 16).fiber_error;
      CHECK(e <= prev + 1e-12);
      prev = e;
    }
  }
  SUBCASE("sandwiched variant needs sandwich data") {
    EstimatesContext ctx = layered_ctx();
    VectorXd k(1);
    k << 0.2;
    CHECK_THROWS_AS(fiber_error(ctx, k, 0.1, 1.0, 2.0, 8, true), Error);
  }
}

TEST_CASE("phase resolution validation") {
  EstimatesContext ctx = layered_ctx();
  VectorXd k(1);
  k << 0.25;
  CHECK_NOTHROW(validate_phase_resolution(ctx, k, 0.05, 1.0, 2.0, 16));
  // cutoff 1 cannot carry eps^{-1} tau ~ 400 phases on this medium
  CHECK_THROWS_AS(validate_phase_resolution(ctx, k, 0.0025, 1.0, 2.0, 1), Error);
}

TEST_CASE("global error") {
  SUBCASE("constant coefficients give zero") {
    MatrixXcd g0 = MatrixXcd::Identity(1, 1) * 1.4;
    FiberBundle bundle{Lattice::cubic(1), symbol_gradient(1),
                       CoefficientField::constant(1, g0), std::nullopt, std::nullopt};
    EstimatesContext ctx = make_context(bundle, 8);
    KGrid grid = brillouin_grid(ctx.bundle.lattice, 9);
    CHECK(global_error(ctx, grid, 0.1, 1.0, 2.0, 8).value < 1e-10);
  }
  SUBCASE("grid refinement never loses the max") {
    EstimatesContext ctx = layered_ctx();
    KGrid coarse = brillouin_grid(ctx.bundle.lattice, 9);
    KGrid fine = brillouin_grid(ctx.bundle.lattice, 17);
    double e9 = global_error(ctx, coarse, 0.05, 1.0, 2.0, 24).value;
    double e17 = global_error(ctx, fine, 0.05, 1.0, 2.0, 24).value;
    CHECK(e17 >= e9 - 1e-12);
  }
}

TEST_CASE("rate experiments match the predicted regimes") {
  // Smaller grids than the acceptance runs; the slopes are robust.
  std::vector<double> eps = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  SUBCASE("layered real medium at s = 3/2 is first order") {
    EstimatesContext ctx = layered_ctx();
    KGrid grid = brillouin_grid(ctx.bundle.lattice, 17);
    RateReport r = rate_experiment(ctx, 1.5, 1.0, eps, grid, 32);
    CHECK(r.slope >= 0.95);
  }
  SUBCASE("complex acoustics at s = 2 is first order, s = 1 is not") {
    EstimatesContext ctx =
        make_context(FiberBundle::from_example(make_example("acoustics-complex-0.2")), 48);
    KGrid grid = brillouin_grid(ctx.bundle.lattice, 9);
    VectorXd e2(2);
    e2 << 0, 1;
    RateReport r2 = rate_experiment(ctx, 2.0, 1.0, eps, grid, 8, false, {e2});
    CHECK(r2.slope >= 0.95);
    RateReport r1 = rate_experiment(ctx, 1.0, 1.0, eps, grid, 8, false, {e2});
    CHECK(r1.slope <= 0.7);
  }
  SUBCASE("input validation") {
    EstimatesContext ctx = layered_ctx();
    KGrid grid = brillouin_grid(ctx.bundle.lattice, 5);
    CHECK_THROWS_AS(rate_experiment(ctx, 2.0, 1.0, {0.1, 0.09, 0.08}, grid, 8), Error);
    CHECK_THROWS_AS(rate_experiment(ctx, 2.0, 1.0, {0.1, 0.09, 0.08, 0.07}, grid, 8), Error);
  }
}

TEST_CASE("sharpness probe") {
  SUBCASE("complex acoustics: growth below s = 2, bounded at s = 2") {
    EstimatesContext ctx =
        make_context(FiberBundle::from_example(make_example("acoustics-complex-0.2")), 48);
    CellSolution cell = solve_cell(ctx.bundle.g, ctx.bundle.b, ctx.bundle.lattice, 48);
    GermOptions opts;
    opts.c_star = ctx.bundle.c_star();
    VectorXd e2(2);
    e2 << 0, 1;
    GermPackage pkg = germ_package(cell, ctx.bundle.b, e2, std::nullopt, opts);
    SharpnessProbe low = sharpness_probe(ctx, pkg, 1.0, 1.5, {2, 4, 8}, 16);
    CHECK(low.growth_ratio >= 2.0);
    CHECK(std::is_sorted(low.q.begin(), low.q.end()));
    SharpnessProbe flat = sharpness_probe(ctx, pkg, 1.0, 2.0, {2, 4, 8}, 16);
    CHECK(flat.growth_ratio <= 1.5);
    // every probe point stays inside the zone
    for (double t : low.t) CHECK(t <= ctx.bundle.lattice.r0() + 1e-12);
  }
  SUBCASE("refused when mu vanishes") {
    EstimatesContext ctx = layered_ctx();
    CellSolution cell = solve_cell(ctx.bundle.g, ctx.bundle.b, ctx.bundle.lattice, 48);
    GermOptions opts;
    opts.c_star = ctx.bundle.c_star();
    VectorXd th(1);
    th << 1.0;
    GermPackage pkg = germ_package(cell, ctx.bundle.b, th, std::nullopt, opts);
    CHECK_THROWS_AS(sharpness_probe(ctx, pkg, 1.0, 1.5, {2, 4, 8}, 16), Error);
  }
}

TEST_CASE("cauchy evolution") {
  SUBCASE("constant coefficients: single mode evolves exactly") {
    MatrixXcd g0 = MatrixXcd::Identity(1, 1) * 2.0;
    FiberBundle bundle{Lattice::cubic(1), symbol_gradient(1),
                       CoefficientField::constant(1, g0), std::nullopt, std::nullopt};
    EstimatesContext ctx = make_context(bundle, 8);
    CauchyResult r = cauchy_error(ctx, single_mode_datum(1), 1.3, 8, 2.0, 8);
    CHECK(r.error_l2 < 1e-12);
  }
  SUBCASE("homogeneous layered problem: first-order rate in eps = 1/M") {
    EstimatesContext ctx = layered_ctx();
    TorusData data = single_mode_datum(1);
    std::vector<double> eps, err;
    for (int M : {8, 16, 32, 64}) {
      CauchyResult r = cauchy_error(ctx, data, 1.0, M, 1.5, 24);
      eps.push_back(1.0 / M);
      err.push_back(r.normalized);
    }
    CHECK(loglog_slope(eps, err) >= 0.95);
  }
  SUBCASE("nonhomogeneous problem keeps the rate at s = 2") {
    EstimatesContext ctx = layered_ctx();
    TorusData data = single_mode_datum(1);
    data.psi[{1}] = VectorXcd::Ones(1) * 0.7;
    data.psi[{2}] = VectorXcd::Ones(1) * 0.3;
    TorusData::ForcePiece p1{0.0, 0.5, {{FreqVec{1}, VectorXcd::Ones(1) * 0.5}}};
    TorusData::ForcePiece p2{0.5, 1.0, {{FreqVec{3}, VectorXcd::Ones(1) * 0.4}}};
    data.force = {p1, p2};
    std::vector<double> eps, err;
    for (int M : {8, 16, 32, 64}) {
      CauchyResult r = cauchy_error(ctx, data, 1.0, M, 2.0, 24);
      eps.push_back(1.0 / M);
      err.push_back(r.normalized);
    }
    CHECK(loglog_slope(eps, err) >= 0.95);
  }
  SUBCASE("weighted medium converges at s = 2") {
    EstimatesContext ctx = weighted_layered_ctx();
    TorusData data = single_mode_datum(1);
    std::vector<double> eps, err;
    for (int M : {64, 128, 256, 512}) {
      CauchyResult r = cauchy_error(ctx, data, 1.0, M, 2.0, 24);
      eps.push_back(1.0 / M);
      err.push_back(r.normalized);
    }
    CHECK(err.back() < err.front());
    CHECK(loglog_slope(eps, err) >= 0.95);
  }
  SUBCASE("bloch blocks agree with the dense torus oracle") {
    EstimatesContext ctx = layered_ctx();
    TorusData data = single_mode_datum(1);
    data.psi[{1}] = VectorXcd::Ones(1) * 0.4;
    TorusData::ForcePiece p{0.0, 0.8, {{FreqVec{1}, VectorXcd::Ones(1) * 0.6}}};
    data.force = {p};
    CauchyResult a = cauchy_error(ctx, data, 1.0, 4, 2.0, 8);
    CauchyResult b = testing::dense_torus_cauchy(ctx, data, 1.0, 4, 2.0, 8);
    CHECK(std::abs(a.error_l2 - b.error_l2) < 1e-8);

    EstimatesContext wctx = weighted_layered_ctx();
    CauchyResult wa = cauchy_error(wctx, single_mode_datum(1), 1.0, 4, 2.0, 8);
    CauchyResult wb = testing::dense_torus_cauchy(wctx, single_mode_datum(1), 1.0, 4, 2.0, 8);
    CHECK(std::abs(wa.error_l2 - wb.error_l2) < 1e-8);
  }
  SUBCASE("input validation") {
    EstimatesContext ctx = layered_ctx();
    TorusData empty;
    CHECK_THROWS_AS(cauchy_error(ctx, empty, 1.0, 8, 2.0, 8), Error);
    TorusData far;
    far.phi[{100}] = VectorXcd::Ones(1);
    CHECK_THROWS_AS(cauchy_error(ctx, far, 1.0, 4, 2.0, 4), Error);
    CHECK_THROWS_AS(cauchy_error(ctx, single_mode_datum(1), 1.0, 0, 2.0, 8), Error);
  }
}

TEST_CASE("large-time scaling on the complex acoustics medium") {
  // tau = eps^{-1/2} at s = 2: the bound's tau-term dominates once eps is
  // deep enough, and the measured sup scales like eps^{1/2}.
  EstimatesContext ctx =
      make_context(FiberBundle::from_example(make_example("acoustics-complex-0.2")), 48);
  KGrid grid = brillouin_grid(ctx.bundle.lattice, 9);
  VectorXd e2(2);
  e2 << 0, 1;
  std::vector<double> eps, err;
  for (double e : {std::pow(2.0, -10), std::pow(2.0, -12), std::pow(2.0, -14),
                   std::pow(2.0, -16)}) {
    err.push_back(global_error(ctx, grid, e, 1.0 / std::sqrt(e), 2.0, 16, false, {e2}).value);
    eps.push_back(e);
  }
  double slope = loglog_slope(eps, err);
  CHECK(slope >= 0.4);
  CHECK(slope <= 0.6);
}

TEST_SUITE_END();
