#include "cdch/errors.hpp"
#include "cdch/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace cdch;

namespace {

MeasureSpec unit_load() { return MeasureSpec::density(Density::constant(1.0)); }

DomainSpec koch(int level) {
  DomainSpec d;
  d.kind = DomainKind::koch_prefractal;
  d.level = level;
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// radial example

TEST(Radial, ReferenceCaseMatchesClosedForms) {
  const RadialReport rep = radial_example(3, 0.5, 0.5);
  EXPECT_NEAR(rep.energy, 0.5, 1e-12);
  EXPECT_NEAR(rep.energy_quadrature, 0.5, 1e-9);
  EXPECT_NEAR(rep.c_alpha_norm, 1.0, 1e-6);
  EXPECT_NEAR(rep.dirichlet_energy, 2.0 * std::numbers::pi, 1e-12);
}

TEST(Radial, ParameterLatticeSatisfiesIdentities) {
  int checked = 0;
  for (int n = 3; n <= 7; ++n) {
    for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      for (double R : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const RadialReport rep = radial_example(n, alpha, R, 512);
        SCOPED_TRACE(testing::Message() << "n=" << n << " alpha=" << alpha << " R=" << R);
        EXPECT_NEAR(rep.c_alpha_norm, 1.0, 1e-9);
        EXPECT_NEAR(rep.energy_quadrature / rep.energy, 1.0, 1e-8);
        EXPECT_NEAR(rep.u.front(), std::pow(1.0 - R, alpha), 1e-14);
        EXPECT_NEAR(rep.u.back(), 0.0, 1e-14);
        // sup |u| + 2^alpha [u] dominates the weighted sup
        EXPECT_GT(rep.full_norm, rep.c_alpha_norm);
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 125);
}

TEST(Radial, EnergyBlowsUpNearTheBoundaryOnlyForSmallAlpha) {
  double rough = 0.0, smooth = INFINITY;
  for (double R : {0.9, 0.99, 0.999}) {
    const double e_rough = radial_example(3, 0.25, R, 64).energy;
    const double e_smooth = radial_example(3, 0.75, R, 64).energy;
    EXPECT_GT(e_rough, rough);
    EXPECT_LT(e_smooth, smooth);
    rough = e_rough;
    smooth = e_smooth;
  }
}

TEST(Radial, SphereAreas) {
  EXPECT_NEAR(sphere_area(2), 2 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(sphere_area(3), 4 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(sphere_area(4), 2 * std::numbers::pi * std::numbers::pi, 1e-12);
}

TEST(Radial, RejectsBadParameters) {
  EXPECT_THROW(radial_example(2, 0.5, 0.5), InvalidParams);
  EXPECT_THROW(radial_example(3, 1.0, 0.5), InvalidParams);
  EXPECT_THROW(radial_example(3, 0.5, 1.0), InvalidParams);
  EXPECT_THROW(radial_example(3, 0.5, 0.0), InvalidParams);
}

// ---------------------------------------------------------------------------
// Hoelder estimate study

TEST(HoelderStudy, SeminormScalesInverselyWithTheCoefficient) {
  const DomainGrid grid = build_grid(koch(2), 64);
  const auto id = CoefficientField::identity(grid.nx, grid.ny);
  const auto scaled = CoefficientField::constant(grid.nx, grid.ny, 5.0 * Eigen::Matrix2d::Identity());
  const auto base = hoelder_estimate_study(grid, id, unit_load(), 0.5, {0.25, 0.5});
  const auto five = hoelder_estimate_study(grid, scaled, unit_load(), 0.5, {0.25, 0.5});
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(5.0 * five.ladder[k].seminorm / base.ladder[k].seminorm, 1.0, 1e-10);
    EXPECT_NEAR(five.ratios[k] / base.ratios[k], 1.0, 1e-10);
  }
}

TEST(HoelderStudy, LinearInTheMeasure) {
  const DomainGrid grid = build_grid(DomainSpec{}, 64);
  const auto id = CoefficientField::identity(grid.nx, grid.ny);
  const auto one = hoelder_estimate_study(grid, id, unit_load(), 0.5, {0.5});
  const auto three = hoelder_estimate_study(grid, id, unit_load().scaled(3.0), 0.5, {0.5});
  EXPECT_NEAR(three.ladder[0].seminorm / one.ladder[0].seminorm, 3.0, 1e-8);
  EXPECT_NEAR(three.ratios[0], one.ratios[0], 1e-8);
}

TEST(HoelderStudy, PointMassIsRejected) {
  // three dyadic bands are needed to see the growth
  const DomainGrid grid = build_grid(DomainSpec{}, 64);
  EXPECT_THROW(hoelder_estimate_study(grid, CoefficientField::identity(grid.nx, grid.ny),
                                      MeasureSpec::point_mass(Point(0.5, 0.5), 1.0), 0.5, {0.5}),
               InvalidParams);
}

TEST(HoelderStudy, FractalExponentIsStableUnderRefinement) {
  double fitted[2];
  int k = 0;
  for (int res : {128, 256}) {
    const DomainGrid grid = build_grid(koch(3), res);
    const auto u = solve_dirichlet(grid, CoefficientField::identity(grid.nx, grid.ny), unit_load());
    fitted[k++] = hoelder_seminorm(u, grid, 0.5).fitted_alpha;
  }
  EXPECT_GT(fitted[0], 0.0);
  EXPECT_NEAR(fitted[0], fitted[1], 0.05);
}

// ---------------------------------------------------------------------------
// homogenization studies

TEST(Sampling, BilinearFieldsAreReproduced) {
  const DomainGrid grid = build_grid(DomainSpec{}, 16);
  Eigen::VectorXd u(grid.node_count());
  for (int k = 0; k < grid.node_count(); ++k) {
    const Point p = grid.node(k);
    u[k] = 1.0 + 2.0 * p.x() - p.y() + 3.0 * p.x() * p.y();
  }
  for (const Point p : {Point(0.3, 0.7), Point(0.01, 0.99), Point(1.0, 1.0)}) {
    EXPECT_NEAR(sample_field(grid, u, p), 1.0 + 2.0 * p.x() - p.y() + 3.0 * p.x() * p.y(), 1e-12);
  }
  EXPECT_EQ(sample_field(grid, u, Point(1.5, 0.5)), 0.0);
}

TEST(Expansion, CorrectorRemovesTheOscillatingGradient) {
  const DomainSpec square;
  const auto a = make_periodic({PeriodicSpec::Kind::layered, 128});
  const CellSolution cell = solve_cell(a, {1e-11}, false);
  double previous = INFINITY;
  for (const auto [eps, res] : {std::pair{0.125, 128}, std::pair{0.0625, 256}}) {
    const DomainGrid grid = build_grid(square, res);
    const auto ue = solve_dirichlet(grid, oscillating_coefficient(a, eps, grid), unit_load());
    const auto u0 =
        solve_dirichlet(grid, CoefficientField::constant(grid.nx, grid.ny, cell.A0), unit_load());
    const ExpansionReport rep = first_order_expansion(ue, u0, cell, eps, grid);
    EXPECT_NEAR(rep.R, std::sqrt(eps), 1e-15);
    EXPECT_LT(rep.grad_w_inner, 0.5 * rep.grad_diff_inner);
    EXPECT_LT(rep.grad_w_inner, previous);
    previous = rep.grad_w_inner;
    if (eps < 0.1) EXPECT_LT(rep.grad_w_inner, 0.25 * rep.grad_diff_inner);
    EXPECT_THROW(first_order_expansion(ue, u0, cell, 0.0, grid), InvalidParams);
  }
}

TEST(Convergence, SmallSweepDecreases) {
  ConvergenceOptions opt;
  opt.cells_per_period = 8;
  const auto a = make_periodic({PeriodicSpec::Kind::layered, 64});
  const RateReport rep =
      convergence_study(DomainSpec{}, a, unit_load(), {0.25, 0.5, 0.125, 0.0625}, opt);
  ASSERT_EQ(rep.epsilons.size(), 4u);
  EXPECT_EQ(rep.epsilons.front(), 0.5);
  EXPECT_EQ(rep.resolutions.front(), 16);
  EXPECT_EQ(rep.resolutions.back(), 128);
  EXPECT_TRUE(rep.strictly_decreasing);
  EXPECT_GT(rep.fitted_rate, 0.5);
  EXPECT_NEAR(rep.A0(0, 0), std::sqrt(3.0), 1e-3);
  EXPECT_NEAR(rep.A0(1, 1), 2.0, 1e-3);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(rep.sup_errors[k], std::max(rep.inner_errors[k], rep.outer_errors[k]));
  }
}

TEST(Convergence, RejectsBadSweeps) {
  const auto a = make_periodic({PeriodicSpec::Kind::layered, 32});
  EXPECT_THROW(convergence_study(DomainSpec{}, a, unit_load(), {0.5, 0.25, 0.125}), InvalidParams);
  EXPECT_THROW(convergence_study(DomainSpec{}, a, unit_load(), {2.0, 0.5, 0.25, 0.125}),
               InvalidParams);
  ConvergenceOptions capped;
  capped.max_resolution = 256;
  EXPECT_THROW(convergence_study(DomainSpec{}, a, unit_load(), {0.5, 0.25, 0.125, 0.015625}, capped),
               UnderResolved);
}

TEST(Convergence, ResolutionKeepsCellsPerPeriod) {
  ConvergenceOptions opt;
  EXPECT_EQ(resolution_for(DomainSpec{}, 0.125, opt), 128);
  EXPECT_EQ(resolution_for(DomainSpec{}, 1.0 / 64, opt), 1024);
  const int koch_res = resolution_for(koch(2), 0.125, opt);
  const DomainGrid g = build_grid(koch(2), koch_res);
  EXPECT_LE(g.h, 0.125 / 16 + 1e-12);
}
