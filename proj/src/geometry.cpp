#include "cdch/geometry.hpp"

#include "cdch/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cdch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class RectangleShape final : public Shape {
 public:
  RectangleShape(Point lo, Point hi) : lo_(std::move(lo)), hi_(std::move(hi)) {}
  bool contains(const Point& p) const override {
    return p.x() > lo_.x() && p.x() < hi_.x() && p.y() > lo_.y() && p.y() < hi_.y();
  }
  double boundary_distance(const Point& p) const override {
    if (contains(p)) {
      return std::min({p.x() - lo_.x(), hi_.x() - p.x(), p.y() - lo_.y(), hi_.y() - p.y()});
    }
    const double dx = std::max({lo_.x() - p.x(), 0.0, p.x() - hi_.x()});
    const double dy = std::max({lo_.y() - p.y(), 0.0, p.y() - hi_.y()});
    if (dx == 0.0 && dy == 0.0) {
      // on the boundary itself
      return 0.0;
    }
    return std::hypot(dx, dy);
  }
  Box bounds() const override { return {lo_, hi_}; }

 private:
  Point lo_, hi_;
};

class DiskShape final : public Shape {
 public:
  DiskShape(Point c, double r) : c_(std::move(c)), r_(r) {}
  bool contains(const Point& p) const override { return (p - c_).norm() < r_; }
  double boundary_distance(const Point& p) const override {
    return std::abs(r_ - (p - c_).norm());
  }
  Box bounds() const override {
    return {c_ - Point::Constant(r_), c_ + Point::Constant(r_)};
  }

 private:
  Point c_;
  double r_;
};

class AnnulusShape final : public Shape {
 public:
  AnnulusShape(Point c, double r_in, double r_out) : c_(std::move(c)), r_in_(r_in), r_out_(r_out) {}
  bool contains(const Point& p) const override {
    const double r = (p - c_).norm();
    return r > r_in_ && r < r_out_;
  }
  double boundary_distance(const Point& p) const override {
    const double r = (p - c_).norm();
    return std::min(std::abs(r - r_in_), std::abs(r_out_ - r));
  }
  Box bounds() const override {
    return {c_ - Point::Constant(r_out_), c_ + Point::Constant(r_out_)};
  }

 private:
  Point c_;
  double r_in_, r_out_;
};

/// Open ball U minus the closed ball K.
class CondenserShape final : public Shape {
 public:
  CondenserShape(Point cu, double ru, Point ck, double rk)
      : cu_(std::move(cu)), ru_(ru), ck_(std::move(ck)), rk_(rk) {}
  bool contains(const Point& p) const override {
    return (p - cu_).norm() < ru_ && (p - ck_).norm() > rk_;
  }
  double boundary_distance(const Point& p) const override {
    return std::min(std::abs(ru_ - (p - cu_).norm()), std::abs((p - ck_).norm() - rk_));
  }
  Box bounds() const override {
    return {cu_ - Point::Constant(ru_), cu_ + Point::Constant(ru_)};
  }

 private:
  Point cu_;
  double ru_;
  Point ck_;
  double rk_;
};

class PuncturedDiskShape final : public Shape {
 public:
  PuncturedDiskShape(Point c, double r, Point puncture)
      : c_(std::move(c)), r_(r), puncture_(std::move(puncture)) {}
  bool contains(const Point& p) const override {
    return (p - c_).norm() < r_ && p != puncture_;
  }
  double boundary_distance(const Point& p) const override {
    return std::min(std::abs(r_ - (p - c_).norm()), (p - puncture_).norm());
  }
  Box bounds() const override {
    return {c_ - Point::Constant(r_), c_ + Point::Constant(r_)};
  }

 private:
  Point c_;
  double r_;
  Point puncture_;
};

/// Ball of radius r about c with the slit {(c.x + t, c.y) : |t| <= r, t not in D}
/// removed. `slit_` holds the closure of the removed parameter set.
class SlitShape final : public Shape {
 public:
  SlitShape(Point c, double r, const std::vector<std::pair<double, double>>& openings)
      : c_(std::move(c)), r_(r) {
    auto d = openings;
    std::sort(d.begin(), d.end());
    double cursor = -r_;
    for (const auto& [a, b] : d) {
      const double lo = std::max(a, -r_);
      const double hi = std::min(b, r_);
      if (hi < lo) continue;
      if (lo > cursor) slit_.emplace_back(cursor, lo);
      cursor = std::max(cursor, hi);
    }
    if (cursor < r_) slit_.emplace_back(cursor, r_);
  }
  bool contains(const Point& p) const override {
    const Point q = p - c_;
    if (q.norm() >= r_) return false;
    if (q.y() != 0.0) return true;
    return line_distance(q.x()) > 0.0;
  }
  double boundary_distance(const Point& p) const override {
    const Point q = p - c_;
    const double to_circle = std::abs(r_ - q.norm());
    if (slit_.empty()) return to_circle;
    return std::min(to_circle, std::hypot(line_distance(q.x()), q.y()));
  }
  Box bounds() const override {
    return {c_ - Point::Constant(r_), c_ + Point::Constant(r_)};
  }

 private:
  double line_distance(double t) const {
    double best = kInf;
    for (const auto& [a, b] : slit_) {
      if (t >= a && t <= b) return 0.0;
      best = std::min({best, std::abs(t - a), std::abs(t - b)});
    }
    return best;
  }

  Point c_;
  double r_;
  std::vector<std::pair<double, double>> slit_;
};

class PolygonShape final : public Shape {
 public:
  explicit PolygonShape(std::vector<Point> v) : v_(std::move(v)) {
    box_.lo = box_.hi = v_.front();
    for (const auto& p : v_) {
      box_.lo = box_.lo.cwiseMin(p);
      box_.hi = box_.hi.cwiseMax(p);
    }
  }
  bool contains(const Point& p) const override {
    bool inside = false;
    const std::size_t n = v_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = v_[i];
      const Point& b = v_[j];
      if ((a.y() > p.y()) != (b.y() > p.y())) {
        const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
        if (p.x() < x) inside = !inside;
      }
    }
    return inside;
  }
  double boundary_distance(const Point& p) const override {
    double best = kInf;
    const std::size_t n = v_.size();
    for (std::size_t i = 0; i < n; ++i) {
      best = std::min(best, segment_distance(p, v_[i], v_[(i + 1) % n]));
    }
    return best;
  }
  Box bounds() const override { return box_; }

 private:
  std::vector<Point> v_;
  Box box_;
};

Point rotate(const Point& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

/// Snaps to the node of a `resolution` grid over `box` closest to p.
Point snap_to_node(const Box& box, int resolution, const Point& p) {
  const double side = (box.hi - box.lo).maxCoeff();
  const double h = side / resolution;
  const Point rel = (p - box.lo) / h;
  return box.lo + h * Point(std::round(rel.x()), std::round(rel.y()));
}

}  // namespace

namespace {

constexpr std::pair<DomainKind, std::string_view> kKindNames[] = {
    {DomainKind::unit_square, "unit_square"},
    {DomainKind::rectangle, "rectangle"},
    {DomainKind::disk, "disk"},
    {DomainKind::annulus, "annulus"},
    {DomainKind::koch_prefractal, "koch_prefractal"},
    {DomainKind::slit, "slit"},
    {DomainKind::punctured_disk, "punctured_disk"},
    {DomainKind::condenser, "condenser"},
};

}  // namespace

std::string_view to_string(DomainKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<DomainKind> domain_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

void DomainSpec::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidSpec(msg); };
  switch (kind) {
    case DomainKind::unit_square:
      break;
    case DomainKind::rectangle:
      if (!(width > 0.0 && height > 0.0)) fail("rectangle sides must be positive");
      break;
    case DomainKind::disk:
    case DomainKind::punctured_disk:
      if (!(radius > 0.0)) fail("disk radius must be positive");
      break;
    case DomainKind::annulus:
      if (!(inner_radius > 0.0 && inner_radius < radius)) fail("annulus needs 0 < inner < outer radius");
      break;
    case DomainKind::koch_prefractal:
      if (level < 0) fail("koch level must be >= 0");
      if (!(side > 0.0)) fail("koch side must be positive");
      break;
    case DomainKind::slit:
      if (!(radius > 0.0)) fail("slit ball radius must be positive");
      for (const auto& [a, b] : openings) {
        if (!(a <= b)) fail("slit opening intervals must satisfy a <= b");
      }
      break;
    case DomainKind::condenser:
      if (!(inner_radius > 0.0 && radius > 0.0)) fail("condenser radii must be positive");
      if ((inner_center - center).norm() + inner_radius >= radius) {
        fail("condenser K must be compactly contained in U");
      }
      break;
  }
}

std::shared_ptr<const Shape> make_shape(const DomainSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case DomainKind::unit_square:
      return std::make_shared<RectangleShape>(Point(0, 0), Point(1, 1));
    case DomainKind::rectangle:
      return std::make_shared<RectangleShape>(
          spec.center - 0.5 * Point(spec.width, spec.height),
          spec.center + 0.5 * Point(spec.width, spec.height));
    case DomainKind::disk:
      return std::make_shared<DiskShape>(spec.center, spec.radius);
    case DomainKind::annulus:
      return std::make_shared<AnnulusShape>(spec.center, spec.inner_radius, spec.radius);
    case DomainKind::koch_prefractal:
      return std::make_shared<PolygonShape>(koch_polygon(spec.level, spec.side, spec.center));
    case DomainKind::slit:
      return std::make_shared<SlitShape>(spec.center, spec.radius, spec.openings);
    case DomainKind::punctured_disk:
      return std::make_shared<PuncturedDiskShape>(spec.center, spec.radius, spec.center);
    case DomainKind::condenser:
      return std::make_shared<CondenserShape>(spec.center, spec.radius, spec.inner_center,
                                              spec.inner_radius);
  }
  throw InvalidSpec("unknown domain kind");
}

DomainGrid build_grid(const DomainSpec& spec, int resolution) {
  if (resolution < 8) throw InvalidSpec("resolution must be >= 8");
  auto shape = make_shape(spec);
  if (spec.kind == DomainKind::punctured_disk) {
    // The puncture becomes the node nearest the centre.
    const Point puncture = snap_to_node(shape->bounds(), resolution, spec.center);
    shape = std::make_shared<PuncturedDiskShape>(spec.center, spec.radius, puncture);
  }
  return build_grid(std::move(shape), resolution);
}

DomainGrid build_grid(std::shared_ptr<const Shape> shape, int resolution) {
  if (resolution < 8) throw InvalidSpec("resolution must be >= 8");
  const Box box = shape->bounds();
  const Point size = box.hi - box.lo;
  const double side = size.maxCoeff();
  if (!(side > 0.0)) throw InvalidSpec("shape has an empty bounding box");

  DomainGrid grid;
  grid.h = side / resolution;
  grid.nx = std::max(1, static_cast<int>(std::ceil(size.x() / grid.h - 1e-9)));
  grid.ny = std::max(1, static_cast<int>(std::ceil(size.y() / grid.h - 1e-9)));
  grid.origin = box.lo - 0.5 * (Point(grid.nx, grid.ny) * grid.h - size);
  grid.shape = std::move(shape);

  const int n = grid.node_count();
  const double on_boundary_tol = 1e-12 * side;
  std::vector<char> inside(n, 0);
  grid.delta = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    const Point p = grid.node(k);
    if (!grid.shape->contains(p)) continue;
    const double d = grid.shape->boundary_distance(p);
    if (d > on_boundary_tol) {
      inside[k] = 1;
      grid.delta[k] = d;
    }
  }

  grid.mask.assign(n, NodeKind::exterior);
  bool any_interior = false;
  for (int j = 0; j <= grid.ny; ++j) {
    for (int i = 0; i <= grid.nx; ++i) {
      const int k = grid.index(i, j);
      if (inside[k]) {
        grid.mask[k] = NodeKind::interior;
        any_interior = true;
        continue;
      }
      for (int dj = -1; dj <= 1 && grid.mask[k] != NodeKind::boundary; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (grid.in_range(i + di, j + dj) && inside[grid.index(i + di, j + dj)]) {
            grid.mask[k] = NodeKind::boundary;
            break;
          }
        }
      }
    }
  }
  if (!any_interior) {
    throw EmptyInterior("no interior node at resolution " + std::to_string(resolution));
  }
  return grid;
}

double DomainGrid::distance_at(const Point& p) const {
  if (shape) return shape->contains(p) ? shape->boundary_distance(p) : 0.0;
  const Point rel = (p - origin) / h;
  const int i = std::clamp(static_cast<int>(std::floor(rel.x())), 0, nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor(rel.y())), 0, ny - 1);
  const double s = std::clamp(rel.x() - i, 0.0, 1.0);
  const double t = std::clamp(rel.y() - j, 0.0, 1.0);
  return (1 - s) * (1 - t) * delta[index(i, j)] + s * (1 - t) * delta[index(i + 1, j)] +
         (1 - s) * t * delta[index(i, j + 1)] + s * t * delta[index(i + 1, j + 1)];
}

Eigen::VectorXd distance_field(const DomainGrid& grid) {
  if (!grid.shape) return sweep_distance(grid);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(grid.node_count());
  for (int k = 0; k < grid.node_count(); ++k) {
    if (grid.interior(k)) d[k] = grid.shape->boundary_distance(grid.node(k));
  }
  return d;
}

Eigen::VectorXd sweep_distance(const DomainGrid& grid) {
  const int n = grid.node_count();
  constexpr int kNone = -1;
  std::vector<int> seed(n, kNone);
  for (int k = 0; k < n; ++k) {
    if (!grid.interior(k)) seed[k] = k;
  }
  auto dist2 = [&](int k, int s) {
    const double di = grid.i_of(k) - grid.i_of(s);
    const double dj = grid.j_of(k) - grid.j_of(s);
    return di * di + dj * dj;
  };
  auto relax = [&](int k, int i, int j) {
    if (!grid.in_range(i, j)) return;
    const int s = seed[grid.index(i, j)];
    if (s == kNone) return;
    if (seed[k] == kNone || dist2(k, s) < dist2(k, seed[k])) seed[k] = s;
  };
  for (int j = 0; j <= grid.ny; ++j) {
    for (int i = 0; i <= grid.nx; ++i) {
      const int k = grid.index(i, j);
      relax(k, i - 1, j);
      relax(k, i - 1, j - 1);
      relax(k, i, j - 1);
      relax(k, i + 1, j - 1);
    }
    for (int i = grid.nx; i >= 0; --i) relax(grid.index(i, j), i + 1, j);
  }
  for (int j = grid.ny; j >= 0; --j) {
    for (int i = grid.nx; i >= 0; --i) {
      const int k = grid.index(i, j);
      relax(k, i + 1, j);
      relax(k, i + 1, j + 1);
      relax(k, i, j + 1);
      relax(k, i - 1, j + 1);
    }
    for (int i = 0; i <= grid.nx; ++i) relax(grid.index(i, j), i - 1, j);
  }
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    if (grid.interior(k) && seed[k] != kNone) d[k] = grid.h * std::sqrt(dist2(k, seed[k]));
  }
  return d;
}

std::vector<int> interior_subdomain(const DomainGrid& grid, double R) {
  std::vector<int> nodes;
  for (int k = 0; k < grid.node_count(); ++k) {
    if (grid.interior(k) && grid.delta[k] > R) nodes.push_back(k);
  }
  return nodes;
}

std::vector<int> boundary_nodes(const DomainGrid& grid) {
  std::vector<int> nodes;
  for (int k = 0; k < grid.node_count(); ++k) {
    if (grid.mask[k] == NodeKind::boundary) nodes.push_back(k);
  }
  return nodes;
}

double interior_area(const DomainGrid& grid) {
  const double tol = 1e-12 * grid.extent();
  double count = 0.0;
  for (int k = 0; k < grid.node_count(); ++k) {
    if (grid.interior(k)) {
      count += 1.0;
    } else if (grid.mask[k] == NodeKind::boundary && grid.shape &&
               grid.shape->boundary_distance(grid.node(k)) <= tol) {
      count += 0.5;
    }
  }
  return count * grid.h * grid.h;
}

std::vector<Point> koch_polygon(int level, double side, const Point& center) {
  if (level < 0) throw InvalidSpec("koch level must be >= 0");
  const double circumradius = side / std::sqrt(3.0);
  std::vector<Point> v;
  for (int k = 0; k < 3; ++k) {
    const double angle = std::numbers::pi / 2 + 2 * std::numbers::pi * k / 3;
    v.push_back(center + circumradius * Point(std::cos(angle), std::sin(angle)));
  }
  for (int l = 0; l < level; ++l) {
    std::vector<Point> next;
    next.reserve(4 * v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point& p = v[i];
      const Point& q = v[(i + 1) % v.size()];
      const Point third = (q - p) / 3.0;
      const Point a = p + third;
      const Point b = p + 2.0 * third;
      // outward is to the right of a counter-clockwise edge
      const Point peak = a + rotate(third, -std::numbers::pi / 3);
      next.insert(next.end(), {p, a, peak, b});
    }
    v = std::move(next);
  }
  return v;
}

double polygon_area(std::span<const Point> vertices) {
  double twice = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vertices[i];
    const Point& b = vertices[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

}  // namespace cdch
