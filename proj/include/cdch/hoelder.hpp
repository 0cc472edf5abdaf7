#ifndef CDCH_HOELDER_HPP
#define CDCH_HOELDER_HPP

#include "cdch/geometry.hpp"

#include <Eigen/Core>

#include <vector>

namespace cdch {

/// Discrete Hoelder data of a nodal field.
struct HoelderReport {
  double alpha = 0.0;
  double seminorm = 0.0;      // max |u(x) - u(y)| / |x - y|^alpha over the pair sample
  double fitted_alpha = 0.0;  // slope of log M(s) against log s
  double fit_constant = 0.0;  // M(s) ~ fit_constant * s^fitted_alpha
  Point witness_x = Point::Zero();
  Point witness_y = Point::Zero();
  /// (s, M(s)): largest oscillation over sampled pairs at separation s.
  std::vector<std::pair<double, double>> modulus;
};

/// A nodal field on an (nx + 1) x (ny + 1) lattice, or an n x n torus
/// lattice when `periodic` is set (then nx = ny = n and there is no
/// duplicated seam node).
struct LatticeField {
  int nx = 0;
  int ny = 0;
  double h = 1.0;
  Point origin = Point::Zero();
  bool periodic = false;
  Eigen::VectorXd values;
  std::vector<char> valid;  // empty: every node counts

  int columns() const { return periodic ? nx : nx + 1; }
  int rows() const { return periodic ? ny : ny + 1; }
};

struct HoelderOptions {
  /// Largest separation used by the fit, as a fraction of the lattice extent.
  double fit_fraction = 0.125;
  /// Smallest separation used by the fit, in lattice cells.
  int fit_min_cells = 1;
};

/// Pairs at dyadic separations 2^k h along both axes and both diagonals.
HoelderReport lattice_hoelder(const LatticeField& field, double alpha,
                              const HoelderOptions& options = {});

/// Least-squares slope and intercept of y against x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cdch

#endif  // CDCH_HOELDER_HPP
