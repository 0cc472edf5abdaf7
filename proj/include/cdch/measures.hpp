#ifndef CDCH_MEASURES_HPP
#define CDCH_MEASURES_HPP

#include "cdch/geometry.hpp"

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <vector>

namespace cdch {

/// Keeps the part of a term where lower < delta <= upper.
struct Restriction {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool admits(double delta) const { return delta > lower && delta <= upper; }
  bool trivial() const { return lower == -std::numeric_limits<double>::infinity() &&
                                upper == std::numeric_limits<double>::infinity(); }
};

/// Density of an absolutely continuous term, evaluated at cell midpoints.
struct Density {
  enum class Kind { constant, sin_product, delta_power, cells, custom };
  Kind kind = Kind::constant;
  double amplitude = 1.0;
  double exponent = 0.0;                 // delta_power: amplitude * delta^exponent
  std::vector<double> cells;             // cells: row-major nx * ny values
  std::function<double(const Point&, double)> custom;  // (x, delta) -> f

  static Density constant(double value);
  /// amplitude * sin(pi x) sin(pi y)
  static Density sin_product(double amplitude);
  static Density delta_power(double amplitude, double exponent);
  static Density from_function(std::function<double(const Point&, double)> f);

  double operator()(const Point& x, double delta) const;
};

enum class TermKind { grid_density, point_mass, circle_surface };

struct MeasureTerm {
  TermKind kind = TermKind::grid_density;
  int sign = 1;
  Density density;               // grid_density
  Point location = Point::Zero();  // point mass location, circle centre
  double weight = 1.0;           // point mass; constant surface density on the circle
  double radius = 0.0;           // circle_surface
  Restriction restriction;
};

/// Signed Radon measure as a finite list of terms.
struct MeasureSpec {
  std::vector<MeasureTerm> terms;

  static MeasureSpec zero() { return {}; }
  static MeasureSpec density(Density f, int sign = 1);
  static MeasureSpec point_mass(const Point& at, double weight, int sign = 1);
  static MeasureSpec circle(const Point& center, double radius, double weight, int sign = 1);
  MeasureSpec& add(const MeasureSpec& other);
  MeasureSpec scaled(double factor) const;

  /// Throws InvalidSpec when a term leaves the bounding box of `grid`.
  void validate(const DomainGrid& grid) const;
};

/// Weighted point used for quadrature of singular terms.
struct Atom {
  Point at;
  double mass;
};

/// Grid realization of a measure: net signed cell density (zero outside the
/// domain and the restrictions), point atoms, and the circle terms.
struct DiscreteMeasure {
  Eigen::VectorXd cell_density;  // nx * ny, row-major
  std::vector<Atom> points;
  std::vector<MeasureTerm> circles;
};

DiscreteMeasure discretize(const MeasureSpec& mu, const DomainGrid& grid);

/// Arc samples of a circle term with count max(64, 8 R / h), restricted.
std::vector<Atom> circle_atoms(const MeasureTerm& circle, const DomainGrid& grid);

/// Length of the part of the circle |y - c| = R lying in the open ball B(x, r).
double circle_ball_arc(const Point& c, double R, const Point& x, double r);

/// |mu|(B(center, r)): cell-area quadrature for densities, exact membership
/// for point masses, arc length for circle terms.
double ball_mass(const MeasureSpec& mu, const DomainGrid& grid, const Point& center, double r);

struct MorreyReport {
  double alpha = 1.0;
  double norm = 0.0;  // +inf when divergent
  bool divergent = false;
  Point argmax_center = Point::Zero();
  double argmax_radius = 0.0;
  /// Sup of the sampled quantity per dyadic radius band, largest radii first.
  std::vector<double> band_radius;
  std::vector<double> band_sup;
};

struct MorreyOptions {
  double min_radius_cells = 2.0;  // radii sampled down to this many h
};

/// sup over interior nodes x and r = delta(x)/2 * 2^-j of r^{-alpha} |mu|(B(x, r)).
/// Flags divergence when the band sups grow by more than 2^{alpha/2} per level
/// through the three smallest bands and the sup sits in the smallest one.
MorreyReport morrey_norm(const MeasureSpec& mu, const DomainGrid& grid, double alpha,
                         const MorreyOptions& options = {});

/// mu restricted to Omega_k = {delta > 1/k}.
MeasureSpec truncate(const MeasureSpec& mu, int k);
/// mu - truncate(mu, k), i.e. mu restricted to {delta <= 1/k}.
MeasureSpec truncation_remainder(const MeasureSpec& mu, int k);

Eigen::VectorXd cell_values(const Density& f, const DomainGrid& grid);

/// Same sampling as morrey_norm applied to r^{2 - alpha - 2/q} ||f||_{L^q(B(x, r))}.
/// q = +inf selects the sup norm.
MorreyReport morrey_from_density(const Eigen::VectorXd& cell_f, const DomainGrid& grid, double q,
                                 double alpha, const MorreyOptions& options = {});
MorreyReport morrey_from_density(const Density& f, const DomainGrid& grid, double q, double alpha,
                                 const MorreyOptions& options = {});

}  // namespace cdch

#endif  // CDCH_MEASURES_HPP
