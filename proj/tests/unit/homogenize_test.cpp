#include "cdch/errors.hpp"
#include "cdch/homogenize.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace cdch;

namespace {

constexpr double kPi = std::numbers::pi;

PeriodicCoefficient layered(int n) { return make_periodic({PeriodicSpec::Kind::layered, n}); }
PeriodicCoefficient smooth(int n) { return make_periodic({PeriodicSpec::Kind::smooth, n}); }
PeriodicCoefficient checker(int n, double a, double b) {
  PeriodicSpec s;
  s.kind = PeriodicSpec::Kind::checkerboard;
  s.n = n;
  s.a = a;
  s.b = b;
  return make_periodic(s);
}

}  // namespace

TEST(CellProblem, ConstantCoefficientHasNoCorrector) {
  Eigen::Matrix2d a;
  a << 3.0, 0.5, 0.5, 1.5;
  const CellSolution sol = solve_cell(PeriodicCoefficient::constant(32, a));
  for (int i = 0; i < 2; ++i) {
    EXPECT_LT(sol.chi[i].lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LT(sol.potentials[i].sup, 1e-12);
  }
  EXPECT_LT((sol.A0 - a).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CellProblem, LayeredMatchesOneDimensionalOracle) {
  const int n = 128;
  const PeriodicCoefficient a = layered(n);
  const Eigen::VectorXd chi1 = solve_cell_problem(a, 0, {1e-12});
  const Eigen::VectorXd chi2 = solve_cell_problem(a, 1, {1e-12});
  EXPECT_LT(chi2.lpNorm<Eigen::Infinity>(), 1e-10);

  // chi_1' = a_harm / a - 1, integrated with a fine midpoint rule
  const int m = 64;
  const double harm = std::sqrt(3.0);
  std::vector<double> oracle(n, 0.0);
  for (int i = 1; i < n; ++i) {
    double acc = 0.0;
    for (int q = 0; q < m; ++q) {
      const double t = (i - 1 + (q + 0.5) / m) / n;
      acc += (harm / (2.0 + std::sin(2 * kPi * t)) - 1.0) / (m * n);
    }
    oracle[i] = oracle[i - 1] + acc;
  }
  double mean = 0.0;
  for (double v : oracle) mean += v / n;
  for (int j = 0; j < n; j += 17) {
    for (int i = 0; i < n; ++i) {
      ASSERT_NEAR(chi1[j * n + i], oracle[i] - mean, 2e-5) << i << "," << j;
    }
  }
}

TEST(CellProblem, CheckerboardReflectionAntisymmetry) {
  const int n = 64;
  const double tol = 1e-10;
  const Eigen::VectorXd chi = solve_cell_problem(checker(n, 1, 4), 0, {tol});
  const double scale = chi.lpNorm<Eigen::Infinity>();
  ASSERT_GT(scale, 1e-3);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int mirror = j * n + (n - i) % n;
      ASSERT_NEAR(chi[j * n + i], -chi[mirror], 10 * tol * n * scale);
      // and even under y2 -> 1 - y2
      ASSERT_NEAR(chi[j * n + i], chi[((n - j) % n) * n + i], 10 * tol * n * scale);
    }
  }
}

TEST(CellProblem, CorrectorsAreMeanFree) {
  for (const auto& a : {layered(32), smooth(32), checker(32, 1, 9)}) {
    const CellSolution sol = solve_cell(a, {}, false);
    for (int i = 0; i < 2; ++i) EXPECT_LT(std::abs(sol.chi[i].mean()), 1e-12);
  }
}

TEST(CellProblem, NonsymmetricCoefficientConverges) {
  const PeriodicCoefficient a = PeriodicCoefficient::sample(32, [](const Point& y) -> Eigen::Matrix2d {
    Eigen::Matrix2d m;
    const double s = std::sin(2 * kPi * y.x());
    m << 2.0 + s, 0.3, -0.3, 2.0 - 0.5 * s;
    return m;
  });
  ASSERT_FALSE(a.field.symmetric);
  const CellSolution sol = solve_cell(a, {1e-10}, false);
  EXPECT_LT(std::abs(sol.chi[0].mean()), 1e-12);
  // the skew part is divergence-free on the torus and passes to A0 unchanged
  EXPECT_NEAR(sol.A0(0, 1) - sol.A0(1, 0), 0.6, 1e-6);
}

TEST(HomogenizedMatrix, LayeredHarmonicAndArithmeticMeans) {
  const CellSolution sol = solve_cell(layered(128), {}, false);
  EXPECT_NEAR(sol.A0(0, 0), std::sqrt(3.0), 0.01 * std::sqrt(3.0));
  EXPECT_NEAR(sol.A0(1, 1), 2.0, 0.02);
  EXPECT_NEAR(sol.A0(0, 1), 0.0, 1e-9);
  EXPECT_NEAR(sol.A0(1, 0), 0.0, 1e-9);
}

TEST(HomogenizedMatrix, CheckerboardGeometricMean) {
  const CellSolution sol = solve_cell(checker(128, 1, 4), {}, false);
  EXPECT_NEAR(sol.A0(0, 0), 2.0, 0.1);
  EXPECT_NEAR(sol.A0(1, 1), 2.0, 0.1);
  EXPECT_NEAR(sol.A0(0, 1), sol.A0(1, 0), 1e-8);
}

TEST(HomogenizedProperties, EnvelopeSymmetryAndBracketing) {
  for (const auto& a : {layered(64), smooth(64), checker(64, 1, 4), checker(64, 1, 25)}) {
    const CellSolution sol = solve_cell(a, {1e-11}, false);
    EXPECT_NEAR(sol.A0(0, 1), sol.A0(1, 0), 1e-9);
    const auto [lo, hi] = envelope_probe(sol.A0);
    EXPECT_GE(lo, a.field.lambda * (1 - 1e-12));
    EXPECT_LE(hi, a.field.L * (1 + 1e-12));

    // Reuss <= eig(A0) <= Voigt for scalar coefficients
    double arith = 0.0, harm = 0.0;
    for (const auto& c : a.field.cells) {
      arith += c(0, 0);
      harm += 1.0 / c(0, 0);
    }
    arith /= static_cast<double>(a.field.cells.size());
    harm = static_cast<double>(a.field.cells.size()) / harm;
    const Eigen::Vector2d eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sol.A0).eigenvalues();
    EXPECT_GE(eig.minCoeff(), harm * (1 - 0.01));
    EXPECT_LE(eig.maxCoeff(), arith * (1 + 0.01));
  }
}

TEST(HomogenizedProperties, KellerDuality) {
  // the checkerboard dual swaps the phases: A0(a, b) A0(b, a) = a b I
  const CellSolution ab = solve_cell(checker(128, 1, 4), {}, false);
  const CellSolution ba = solve_cell(keller_dual(checker(128, 1, 4), 4.0), {}, false);
  const Eigen::Matrix2d prod = ab.A0 * ba.A0;
  EXPECT_LT((prod - 4.0 * Eigen::Matrix2d::Identity()).norm(), 0.05 * 4.0);

  // anisotropic case: A0 of the dual is A0^T / det A0
  const CellSolution l = solve_cell(layered(128), {}, false);
  const CellSolution ld = solve_cell(keller_dual(layered(128)), {}, false);
  const Eigen::Matrix2d expected = l.A0.transpose() / l.A0.determinant();
  EXPECT_LT((ld.A0 - expected).norm(), 0.01 * expected.norm());
}

TEST(FluxCorrector, SkewSymmetryIsExact) {
  const CellSolution sol = solve_cell(smooth(32));
  for (int i = 0; i < 2; ++i) {
    for (int node = 0; node < 32 * 32; ++node) {
      ASSERT_EQ(sol.V(i, 0, 1, node), -sol.V(i, 1, 0, node));
      ASSERT_EQ(sol.V(i, 0, 0, node), 0.0);
      ASSERT_EQ(sol.V(i, 1, 1, node), 0.0);
    }
  }
}

TEST(FluxCorrector, LayeredAntiderivativeOracle) {
  const int n = 128;
  const CellSolution sol = solve_cell(layered(n), {1e-12});
  EXPECT_LT(sol.potentials[0].sup, 1e-8);
  EXPECT_EQ(sol.potentials[0].divergence_error, 0.0);
  // d_22 = a - 2, phi_22'' = d_22, V_{2,12} = -phi_22' = cos(2 pi y1) / (2 pi)
  for (int i = 0; i < n; ++i) {
    const double y = static_cast<double>(i) / n;
    ASSERT_NEAR(sol.potentials[1].v[5 * n + i], std::cos(2 * kPi * y) / (2 * kPi), 1e-3);
  }
  EXPECT_LT(sol.potentials[1].divergence_error, 0.01);
}

TEST(FluxCorrector, DivergenceIdentityConvergesForSmoothCoefficient) {
  const double e64 = solve_cell(smooth(64)).potentials[0].divergence_error;
  const double e128 = solve_cell(smooth(128)).potentials[0].divergence_error;
  EXPECT_LT(e64, 0.01);
  EXPECT_LT(e128, e64 / 3);  // second order
}

TEST(FluxCorrector, CheckerboardBoundIsStable) {
  std::vector<double> ratios;
  for (int n : {64, 128}) {
    const PeriodicCoefficient a = checker(n, 1, 4);
    const CellSolution sol = solve_cell(a);
    ratios.push_back(std::max(sol.potentials[0].sup, sol.potentials[1].sup) / a.field.L);
  }
  EXPECT_GT(ratios[0], 0.0);
  EXPECT_NEAR(ratios[1], ratios[0], 0.2 * ratios[0]);
}

TEST(CorrectorRegularity, Examples) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(32 * 32);
  for (double alpha : {0.25, 0.5, 1.0}) EXPECT_EQ(corrector_regularity(zero, 32, alpha).seminorm, 0.0);

  const CellSolution s = solve_cell(smooth(128), {}, false);
  EXPECT_NEAR(corrector_regularity(s.chi[0], 128, 1.0).fitted_alpha, 1.0, 0.05);

  const double low = corrector_regularity(solve_cell(checker(128, 1, 4), {}, false).chi[0], 128, 0.5)
                         .fitted_alpha;
  const double high =
      corrector_regularity(solve_cell(checker(128, 1, 100), {}, false).chi[0], 128, 0.5)
          .fitted_alpha;
  EXPECT_GT(high, 0.0);
  EXPECT_LT(low, 1.0);
  EXPECT_LT(high, low);
}

TEST(OscillatingCoefficient, Examples) {
  DomainGrid g = build_grid(DomainSpec{}, 64);
  const PeriodicCoefficient a = smooth(64);
  const CoefficientField same = oscillating_coefficient(a, 1.0, g);
  ASSERT_EQ(same.cells.size(), a.field.cells.size());
  for (std::size_t c = 0; c < same.cells.size(); ++c) ASSERT_EQ(same.cells[c], a.field.cells[c]);

  const PeriodicCoefficient k = PeriodicCoefficient::constant(16, 3.0 * Eigen::Matrix2d::Identity());
  const CoefficientField flat = oscillating_coefficient(k, 0.01, g);
  ASSERT_EQ(flat.cells.size(), 1u);
  EXPECT_EQ(flat.cells[0], 3.0 * Eigen::Matrix2d::Identity());

  g = build_grid(DomainSpec{}, 256);
  const PeriodicCoefficient lay = layered(256);
  const CoefficientField osc = oscillating_coefficient(lay, 1.0 / 8, g);
  EXPECT_EQ(osc.lambda, lay.field.lambda);
  EXPECT_EQ(osc.L, lay.field.L);
  EXPECT_NO_THROW(osc.check_envelope());
  for (int row : {0, 100, 255}) {
    int changes = 0;
    for (int ci = 0; ci < g.nx; ++ci) {
      const double s0 = osc.at(ci, row)(0, 0) - 2.0;
      const double s1 = osc.at((ci + 1) % g.nx, row)(0, 0) - 2.0;
      if ((s0 > 0) != (s1 > 0)) ++changes;
    }
    EXPECT_EQ(changes, 16);  // two per period
  }
  EXPECT_THROW(oscillating_coefficient(lay, 0.0, g), InvalidParams);
  EXPECT_THROW(oscillating_coefficient(lay, 1.5, g), InvalidParams);
}

TEST(TorusInterpolate, ReproducesNodesAndWraps) {
  const int n = 16;
  Eigen::VectorXd u(n * n);
  for (int k = 0; k < n * n; ++k) u[k] = std::sin(0.3 * k);
  EXPECT_DOUBLE_EQ(torus_interpolate(u, n, Point(3.0 / n, 5.0 / n)), u[5 * n + 3]);
  EXPECT_NEAR(torus_interpolate(u, n, Point(1 + 3.0 / n, -1 + 5.0 / n)), u[5 * n + 3], 1e-12);
  const double mid = torus_interpolate(u, n, Point((n - 0.5) / n, 0.0));
  EXPECT_NEAR(mid, 0.5 * (u[n - 1] + u[0]), 1e-12);
}
