#include "cdch/errors.hpp"
#include "cdch/geometry.hpp"
#include "cdch/measures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace cdch;

namespace {

constexpr double kPi = std::numbers::pi;

DomainGrid unit_square(int resolution = 64) { return build_grid(DomainSpec{}, resolution); }

DomainGrid unit_disk(int resolution = 64) {
  DomainSpec s;
  s.kind = DomainKind::disk;
  return build_grid(s, resolution);
}

int support_cells(const DiscreteMeasure& dm) {
  return static_cast<int>((dm.cell_density.array() != 0.0).count());
}

}  // namespace

TEST(BallMass, LebesgueDensityGivesDiskArea) {
  const DomainGrid g = unit_square();
  const double m = ball_mass(MeasureSpec::density(Density::constant(1.0)), g, Point(0.5, 0.5), 0.2);
  EXPECT_NEAR(m, kPi * 0.04, 2 * kPi * 0.2 * g.h);
}

TEST(BallMass, PointMassContainment) {
  const DomainGrid g = unit_square();
  const MeasureSpec mu = MeasureSpec::point_mass(Point(0.5, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(ball_mass(mu, g, Point(0.5, 0.5), 0.1), 3.0);
  EXPECT_DOUBLE_EQ(ball_mass(mu, g, Point(0.7, 0.5), 0.1), 0.0);
  // |mu| ignores the sign
  EXPECT_DOUBLE_EQ(ball_mass(MeasureSpec::point_mass(Point(0.5, 0.5), 3.0, -1), g,
                             Point(0.5, 0.5), 0.1),
                   3.0);
}

TEST(BallMass, CircleArcMatchesChordAngleOracle) {
  const DomainGrid g = unit_disk(128);
  const MeasureSpec mu = MeasureSpec::circle(Point(0, 0), 0.5, 1.0);
  const double oracle = 4 * 0.5 * std::asin(0.1 / (2 * 0.5));
  EXPECT_NEAR(ball_mass(mu, g, Point(0.5, 0.0), 0.1), oracle, 1e-12);
  EXPECT_NEAR(oracle, 0.2, 1e-3);
  // whole circle inside the ball, ball inside the disc of the circle
  EXPECT_NEAR(circle_ball_arc(Point(0, 0), 0.5, Point(0, 0), 0.9), kPi, 1e-15);
  EXPECT_EQ(circle_ball_arc(Point(0, 0), 0.5, Point(0, 0), 0.2), 0.0);
}

TEST(BallMass, NondecreasingInRadius) {
  const DomainGrid g = unit_disk(64);
  MeasureSpec mu = MeasureSpec::density(Density::sin_product(1.0));
  mu.add(MeasureSpec::point_mass(Point(0.1, 0.2), 0.5));
  mu.add(MeasureSpec::circle(Point(0, 0), 0.4, 2.0));
  for (const Point& x : {Point(0, 0), Point(0.3, -0.2), Point(-0.5, 0.1)}) {
    double prev = 0.0;
    for (double r = 0.01; r < 0.5; r += 0.01) {
      const double m = ball_mass(mu, g, x, r);
      ASSERT_GE(m, prev);
      prev = m;
    }
  }
}

TEST(MorreyNorm, LebesgueOnSquare) {
  const DomainGrid g = unit_square();
  const MorreyReport rep = morrey_norm(MeasureSpec::density(Density::constant(1.0)), g, 1.0);
  EXPECT_FALSE(rep.divergent);
  EXPECT_NEAR(rep.norm, kPi / 4, 0.05 * kPi / 4);
  EXPECT_NEAR(rep.argmax_center.x(), 0.5, 1e-12);
  EXPECT_NEAR(rep.argmax_center.y(), 0.5, 1e-12);
  EXPECT_LT(rep.argmax_radius, g.distance_at(rep.argmax_center) / 2);
}

TEST(MorreyNorm, ZeroMeasure) {
  const MorreyReport rep = morrey_norm(MeasureSpec::zero(), unit_square(), 0.5);
  EXPECT_EQ(rep.norm, 0.0);
  EXPECT_FALSE(rep.divergent);
}

TEST(MorreyNorm, PointMassIsDivergent) {
  const DomainGrid g = unit_square();
  for (double alpha : {0.25, 0.5, 1.0}) {
    const MorreyReport rep = morrey_norm(MeasureSpec::point_mass(Point(0.5, 0.5), 1.0), g, alpha);
    EXPECT_TRUE(rep.divergent) << alpha;
    EXPECT_TRUE(std::isinf(rep.norm));
  }
}

TEST(MorreyNorm, RejectsBadAlpha) {
  EXPECT_THROW(morrey_norm(MeasureSpec::zero(), unit_square(), 0.0), InvalidParams);
  EXPECT_THROW(morrey_norm(MeasureSpec::zero(), unit_square(), 1.5), InvalidParams);
}

TEST(Truncate, UnitSquareExamples) {
  const DomainGrid g = unit_square();
  const MeasureSpec mu = MeasureSpec::density(Density::constant(1.0));

  const DiscreteMeasure k1 = discretize(truncate(mu, 1), g);
  EXPECT_EQ(support_cells(k1), 0);
  EXPECT_EQ(morrey_norm(truncate(mu, 1), g, 1.0).norm, 0.0);

  // cells whose midpoint lies in Omega_4 = centred square of side 1/2
  const DiscreteMeasure k4 = discretize(truncate(mu, 4), g);
  int expected = 0;
  for (int cj = 0; cj < g.ny; ++cj) {
    for (int ci = 0; ci < g.nx; ++ci) {
      const Point m = g.cell_midpoint(ci, cj);
      if (std::abs(m.x() - 0.5) < 0.25 && std::abs(m.y() - 0.5) < 0.25) ++expected;
    }
  }
  EXPECT_EQ(expected, 32 * 32);
  EXPECT_EQ(support_cells(k4), expected);
  EXPECT_THROW(truncate(mu, 0), InvalidParams);
}

TEST(Truncate, DeepCircleIsUnchanged) {
  const DomainGrid g = unit_disk(128);
  const MeasureSpec mu = MeasureSpec::circle(Point(0, 0), 0.9, 1.0);
  const auto full = circle_atoms(mu.terms[0], g);
  const auto cut = circle_atoms(truncate(mu, 20).terms[0], g);
  EXPECT_EQ(full.size(), cut.size());
  EXPECT_TRUE(circle_atoms(truncation_remainder(mu, 20).terms[0], g).empty());
}

TEST(MorreyFromDensity, Examples) {
  const DomainGrid g = unit_square();
  const MorreyReport one = morrey_from_density(Density::constant(1.0), g, INFINITY, 1.0);
  EXPECT_NEAR(one.norm, 0.25, 0.05 * 0.25);
  EXPECT_EQ(morrey_from_density(Density::constant(0.0), g, 2.0, 0.5).norm, 0.0);

  // delta^{-1/2}: r^{2 - alpha} sup_B f stays bounded for both exponents
  const Density inv_sqrt = Density::delta_power(1.0, -0.5);
  const MorreyReport half = morrey_from_density(inv_sqrt, g, INFINITY, 0.5);
  EXPECT_FALSE(half.divergent);
  EXPECT_TRUE(std::isfinite(half.norm));
  const MorreyReport full = morrey_from_density(inv_sqrt, g, INFINITY, 1.0);
  EXPECT_FALSE(full.divergent);
  // radial oracle along the inradius direction: r (delta - r)^{-1/2} at r = delta / 2
  EXPECT_NEAR(full.norm, std::sqrt(0.25), 0.05 * 0.5);

  // a strong enough boundary singularity does blow up
  const MorreyReport blow = morrey_from_density(Density::delta_power(1.0, -2.0), g, INFINITY, 1.0);
  EXPECT_TRUE(blow.divergent);
}

TEST(MorreyProperties, HolderDomination) {
  const DomainGrid g = unit_square(64);
  const std::vector<Density> densities = {Density::constant(1.0), Density::sin_product(3.0),
                                          Density::delta_power(1.0, -0.5)};
  for (const auto& f : densities) {
    for (double q : {1.0, 2.0, 4.0, double(INFINITY)}) {
      for (double alpha : {0.5, 1.0}) {
        const double m = morrey_norm(MeasureSpec::density(f), g, alpha).norm;
        const double bound = morrey_from_density(f, g, q, alpha).norm;
        // |B_r| = pi r^2 enters through Hoelder's inequality
        const double ball_factor = std::pow(kPi, 1.0 - 1.0 / q);
        EXPECT_LE(m, 1.05 * ball_factor * bound) << "q=" << q << " alpha=" << alpha;
      }
    }
  }
}

TEST(MorreyProperties, TruncationDecay) {
  struct Case {
    DomainGrid grid;
    MeasureSpec mu;
  };
  const std::vector<Case> cases = {
      {unit_square(64), MeasureSpec::density(Density::constant(1.0))},
      {unit_square(64), MeasureSpec::density(Density::sin_product(2.0))},
      {unit_disk(64), MeasureSpec::circle(Point(0, 0), 0.5, 1.0)},
      {unit_disk(64), MeasureSpec::circle(Point(0, 0), 0.9, 1.0)},
  };
  for (const auto& c : cases) {
    for (double alpha : {0.5, 1.0}) {
      const MorreyReport full = morrey_norm(c.mu, c.grid, alpha);
      ASSERT_FALSE(full.divergent);
      for (int k : {2, 4, 8, 16}) {
        const double rest = morrey_norm(truncation_remainder(c.mu, k), c.grid, alpha / 2).norm;
        EXPECT_LE(rest, full.norm * std::pow(k, -alpha / 2) * (1 + 1e-12))
            << "k=" << k << " alpha=" << alpha;
      }
    }
  }
}

TEST(MeasureSpec, ValidateRejectsOutOfBox) {
  const DomainGrid g = unit_square();
  EXPECT_THROW(discretize(MeasureSpec::point_mass(Point(2, 2), 1.0), g), InvalidSpec);
  EXPECT_THROW(discretize(MeasureSpec::circle(Point(0.5, 0.5), 0.0, 1.0), g), InvalidSpec);
  EXPECT_THROW(discretize(MeasureSpec::circle(Point(0.5, 0.5), 0.6, 1.0), g), InvalidSpec);
}

TEST(MeasureSpec, SignedCombinationNetsDensities) {
  const DomainGrid g = unit_square();
  MeasureSpec mu = MeasureSpec::density(Density::constant(2.0));
  mu.add(MeasureSpec::density(Density::constant(2.0), -1));
  EXPECT_EQ(support_cells(discretize(mu, g)), 0);
  EXPECT_EQ(morrey_norm(mu, g, 1.0).norm, 0.0);
  const MeasureSpec doubled = MeasureSpec::density(Density::constant(1.0)).scaled(2.0);
  EXPECT_NEAR(ball_mass(doubled, g, Point(0.5, 0.5), 0.2),
              2 * ball_mass(MeasureSpec::density(Density::constant(1.0)), g, Point(0.5, 0.5), 0.2),
              1e-12);
}
