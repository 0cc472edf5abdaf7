#ifndef CDCH_EXPERIMENTS_HPP
#define CDCH_EXPERIMENTS_HPP

#include "cdch/elliptic.hpp"
#include "cdch/hoelder.hpp"
#include "cdch/homogenize.hpp"
#include "cdch/measures.hpp"

#include <Eigen/Core>

#include <vector>

namespace cdch {

// ---------------------------------------------------------------------------
// Hoelder seminorms of solutions

/// Pair-sampled [u]_alpha over the nodes of the closed domain (interior and
/// boundary nodes).
HoelderReport hoelder_seminorm(const FieldSolution& u, const DomainGrid& grid, double alpha,
                               const HoelderOptions& options = {});
HoelderReport hoelder_seminorm(const Eigen::VectorXd& u, const DomainGrid& grid, double alpha,
                               const HoelderOptions& options = {});

struct HoelderStudy {
  FieldSolution solution;
  MorreyReport morrey;
  double lambda = 0.0;
  std::vector<HoelderReport> ladder;  // one per alpha0
  /// [u]_{alpha0} / (morrey / lambda), one per alpha0.
  std::vector<double> ratios;
};

/// Solves -div(A grad u) = mu with zero boundary values, then measures
/// [u]_{alpha0} for every alpha0 against the Morrey norm of mu at `alpha`.
/// Throws InvalidParams when the Morrey norm is divergent.
HoelderStudy hoelder_estimate_study(const DomainGrid& grid, const CoefficientField& a,
                                    const MeasureSpec& mu, double alpha,
                                    const std::vector<double>& alpha0s,
                                    const SolverSettings& settings = {});

// ---------------------------------------------------------------------------
// Radial example on the unit ball of R^n

/// u_R(r): (1 - R)^alpha on [0, R], then (1 - R)^alpha (r^{2-n} - 1) / (R^{2-n} - 1).
double radial_profile(int n, double alpha, double R, double r);

struct RadialReport {
  int n = 3;
  double alpha = 0.5;
  double R = 0.5;
  /// sup u_R / (1 - |x|)^alpha, equal to 1 for every parameter choice.
  double c_alpha_norm = 0.0;
  /// Grid estimate of [u_R]_alpha on the closed ball.
  double seminorm = 0.0;
  /// sup |u_R| + diam^alpha [u_R]_alpha with diam = 2.
  double full_norm = 0.0;
  /// (n - 2) (1 - R)^{2 alpha} / (R^{2-n} - 1): energy per unit solid angle.
  double energy = 0.0;
  /// Composite Gauss-Legendre value of int_R^1 |u_R'|^2 r^{n-1} dr.
  double energy_quadrature = 0.0;
  /// |S^{n-1}| * energy, the full Dirichlet integral over the ball.
  double dirichlet_energy = 0.0;
  std::vector<double> r;  // sampled profile
  std::vector<double> u;
};

/// Requires n >= 3, alpha in (0, 1), R in (0, 1); throws InvalidParams.
RadialReport radial_example(int n, double alpha, double R, int samples = 2048);

/// |S^{n-1}|.
double sphere_area(int n);

// ---------------------------------------------------------------------------
// Homogenization studies

/// Bilinear interpolation of a nodal field at p; zero outside the box.
double sample_field(const DomainGrid& grid, const Eigen::VectorXd& u, const Point& p);

struct ExpansionReport {
  Eigen::VectorXd w;          // u_eps - u0 - eps sum_i chi_i(x / eps) d_i u0, zero off the interior
  double R = 0.0;             // sqrt(eps)
  double w_inner = 0.0;       // max |w| where delta > R
  double diff_inner = 0.0;    // max |u_eps - u0| where delta > R
  double w_outer = 0.0;       // the same on the boundary layer
  double diff_outer = 0.0;
  /// max of the centered-difference gradient where delta > R. The corrector
  /// removes the O(1) oscillating part of grad(u_eps - u0), so grad_w_inner
  /// is much smaller than grad_diff_inner even though both sups are O(eps).
  double grad_w_inner = 0.0;
  double grad_diff_inner = 0.0;
};

/// u_eps and u0 live on `grid`; d_i u0 by centered differences.
ExpansionReport first_order_expansion(const FieldSolution& u_eps, const FieldSolution& u0,
                                      const CellSolution& cell, double epsilon,
                                      const DomainGrid& grid);

struct ConvergenceOptions {
  int cells_per_period = 16;     // h <= eps / cells_per_period
  int min_cells_per_period = 8;  // below this the study throws UnderResolved
  int max_resolution = 4096;
  SolverSettings solver{1e-10};
  bool with_expansion = false;   // also solve u0 on every eps grid and build w_eps
};

struct RateReport {
  std::vector<double> epsilons;
  std::vector<double> sup_errors;     // max |u_eps - u0| on the comparison nodes
  std::vector<double> inner_errors;   // restricted to delta > sqrt(eps)
  std::vector<double> outer_errors;   // restricted to delta <= sqrt(eps)
  std::vector<double> expansion_inner;  // max |w_eps| where delta > sqrt(eps), if requested
  std::vector<int> resolutions;       // grid used for each eps
  double fitted_rate = 0.0;
  double constant = 0.0;
  bool dropped_first = false;         // first point pre-asymptotic and left out of the fit
  double discretization_floor = 0.0;  // max |u0_h - u0_{h/2}| of the reference pair
  bool monotone = false;              // each error below the previous one times 1.1
  bool strictly_decreasing = false;
  Eigen::Matrix2d A0 = Eigen::Matrix2d::Zero();
  int comparison_resolution = 0;
  int reference_resolution = 0;
};

/// u_eps for every eps against the homogenized u0, which is a Richardson
/// extrapolation of two solves at twice and four times the comparison
/// resolution. Comparison nodes are those of the coarsest eps grid.
RateReport convergence_study(const DomainSpec& domain, const PeriodicCoefficient& a,
                             const MeasureSpec& mu, const std::vector<double>& epsilons,
                             const ConvergenceOptions& options = {});

/// Grid resolution used for a given eps.
int resolution_for(const DomainSpec& domain, double epsilon, const ConvergenceOptions& options);

}  // namespace cdch

#endif  // CDCH_EXPERIMENTS_HPP
