#ifndef CDCH_GEOMETRY_HPP
#define CDCH_GEOMETRY_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace cdch {

using Point = Eigen::Vector2d;

struct Box {
  Point lo;
  Point hi;
};

/// An open planar set described by membership and the unsigned distance
/// to its boundary. Implementations are immutable.
class Shape {
 public:
  virtual ~Shape() = default;
  virtual bool contains(const Point& p) const = 0;
  /// Euclidean distance from p to the boundary, for p on either side.
  virtual double boundary_distance(const Point& p) const = 0;
  virtual Box bounds() const = 0;
};

enum class DomainKind {
  unit_square,
  rectangle,
  disk,
  annulus,
  koch_prefractal,
  slit,
  punctured_disk,
  condenser,
};

std::string_view to_string(DomainKind kind);
/// Inverse of to_string; empty when `name` is not a domain kind.
std::optional<DomainKind> domain_kind_from_string(std::string_view name);

/// Parameters of the domain zoo. Only the fields relevant to `kind` are read.
struct DomainSpec {
  DomainKind kind = DomainKind::unit_square;
  Point center = Point::Zero();
  double radius = 1.0;        // disk, punctured disk, slit ball, condenser U
  double inner_radius = 0.5;  // annulus hole, condenser K
  Point inner_center = Point::Zero();  // condenser K
  double width = 1.0;         // rectangle
  double height = 1.0;        // rectangle
  int level = 0;              // koch
  double side = 1.0;          // koch base triangle
  /// Slit openings D: the slit is {(x, 0) : |x| <= radius, x not in D}.
  std::vector<std::pair<double, double>> openings;

  void validate() const;  // throws InvalidSpec
};

enum class NodeKind : std::uint8_t { interior = 0, boundary = 1, exterior = 2 };

/// Uniform node grid over a box. Node (i, j) sits at origin + h (i, j) for
/// 0 <= i <= nx, 0 <= j <= ny; nodes are stored row-major in j.
struct DomainGrid {
  Point origin = Point::Zero();
  double h = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<NodeKind> mask;
  Eigen::VectorXd delta;
  std::shared_ptr<const Shape> shape;

  int row() const { return nx + 1; }
  int node_count() const { return (nx + 1) * (ny + 1); }
  int index(int i, int j) const { return j * (nx + 1) + i; }
  int i_of(int k) const { return k % (nx + 1); }
  int j_of(int k) const { return k / (nx + 1); }
  bool in_range(int i, int j) const { return i >= 0 && j >= 0 && i <= nx && j <= ny; }
  Point node(int i, int j) const { return origin + h * Point(i, j); }
  Point node(int k) const { return node(i_of(k), j_of(k)); }
  Point cell_midpoint(int ci, int cj) const {
    return origin + h * Point(ci + 0.5, cj + 0.5);
  }
  bool interior(int k) const { return mask[k] == NodeKind::interior; }
  /// Nodes outside the index range count as exterior.
  NodeKind kind_at(int i, int j) const {
    return in_range(i, j) ? mask[index(i, j)] : NodeKind::exterior;
  }
  /// Side of the bounding box; sets the length scale of scans.
  double extent() const { return h * std::max(nx, ny); }
  /// Distance to the boundary at an arbitrary point: exact when the grid
  /// carries its shape, bilinear interpolation of `delta` otherwise.
  double distance_at(const Point& p) const;
};

std::shared_ptr<const Shape> make_shape(const DomainSpec& spec);

/// Rasterizes `spec` with h = (longest bounding-box side) / resolution.
DomainGrid build_grid(const DomainSpec& spec, int resolution);
/// Rasterizes an arbitrary shape.
DomainGrid build_grid(std::shared_ptr<const Shape> shape, int resolution);

/// Per-node distance to the boundary, zero off the interior. Exact when the
/// grid has a shape; otherwise falls back to `sweep_distance`.
Eigen::VectorXd distance_field(const DomainGrid& grid);

/// Two-pass nearest-seed propagation from the non-interior nodes. Error is
/// O(h) against the exact distance.
Eigen::VectorXd sweep_distance(const DomainGrid& grid);

/// Indices of the nodes with delta > R.
std::vector<int> interior_subdomain(const DomainGrid& grid, double R);

std::vector<int> boundary_nodes(const DomainGrid& grid);

/// Lattice estimate of |Omega|: interior nodes count h^2, nodes lying exactly
/// on the boundary count h^2 / 2.
double interior_area(const DomainGrid& grid);

/// Counter-clockwise vertices of the level-`level` Koch snowflake built on an
/// equilateral triangle of side `side` centred at `center`.
std::vector<Point> koch_polygon(int level, double side, const Point& center = Point::Zero());

/// Shoelace area (positive for counter-clockwise input).
double polygon_area(std::span<const Point> vertices);

double segment_distance(const Point& p, const Point& a, const Point& b);

}  // namespace cdch

#endif  // CDCH_GEOMETRY_HPP
