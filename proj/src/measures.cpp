#include "cdch/measures.hpp"

#include "cdch/errors.hpp"
#include "cdch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cdch {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Cell-index range [lo, hi] along one row whose midpoints fall strictly
/// inside the chord |t - c| < w.
std::pair<int, int> chord_cells(double c, double w, double origin, double h, int n) {
  const double a = (c - w - origin) / h - 0.5;
  const double b = (c + w - origin) / h - 0.5;
  int lo = static_cast<int>(std::floor(a)) + 1;
  int hi = static_cast<int>(std::ceil(b)) - 1;
  return {std::max(lo, 0), std::min(hi, n - 1)};
}

/// Row-wise prefix sums of a per-cell field for disc sums in O(r / h).
class RowPrefix {
 public:
  RowPrefix(const DomainGrid& grid, const Eigen::VectorXd& cells) : grid_(grid) {
    sums_.resize(static_cast<std::size_t>(grid.ny) * (grid.nx + 1));
    for (int cj = 0; cj < grid.ny; ++cj) {
      double acc = 0.0;
      sums_[offset(cj, 0)] = 0.0;
      for (int ci = 0; ci < grid.nx; ++ci) {
        acc += cells[cj * grid.nx + ci];
        sums_[offset(cj, ci + 1)] = acc;
      }
    }
  }

  /// Sum of cell values over cells whose midpoint lies in the open ball.
  double disc_sum(const Point& x, double r) const {
    const double h = grid_.h;
    const auto [row_lo, row_hi] = chord_cells(x.y(), r, grid_.origin.y(), h, grid_.ny);
    double total = 0.0;
    for (int cj = row_lo; cj <= row_hi; ++cj) {
      const double dy = grid_.origin.y() + (cj + 0.5) * h - x.y();
      const double w2 = r * r - dy * dy;
      if (w2 <= 0.0) continue;
      const auto [lo, hi] = chord_cells(x.x(), std::sqrt(w2), grid_.origin.x(), h, grid_.nx);
      if (hi >= lo) total += sums_[offset(cj, hi + 1)] - sums_[offset(cj, lo)];
    }
    return total;
  }

 private:
  std::size_t offset(int cj, int i) const {
    return static_cast<std::size_t>(cj) * (grid_.nx + 1) + i;
  }
  const DomainGrid& grid_;
  std::vector<double> sums_;
};

/// Row-wise sparse tables for disc maxima.
class RowMax {
 public:
  RowMax(const DomainGrid& grid, const Eigen::VectorXd& cells) : grid_(grid) {
    levels_ = 1;
    while ((1 << levels_) <= grid.nx) ++levels_;
    table_.assign(static_cast<std::size_t>(levels_) * grid.ny * grid.nx, 0.0);
    for (int cj = 0; cj < grid.ny; ++cj) {
      for (int ci = 0; ci < grid.nx; ++ci) at(0, cj, ci) = cells[cj * grid.nx + ci];
      for (int l = 1; l < levels_; ++l) {
        for (int ci = 0; ci + (1 << l) <= grid.nx; ++ci) {
          at(l, cj, ci) = std::max(at(l - 1, cj, ci), at(l - 1, cj, ci + (1 << (l - 1))));
        }
      }
    }
  }

  double disc_max(const Point& x, double r) const {
    const double h = grid_.h;
    const auto [row_lo, row_hi] = chord_cells(x.y(), r, grid_.origin.y(), h, grid_.ny);
    double best = 0.0;
    for (int cj = row_lo; cj <= row_hi; ++cj) {
      const double dy = grid_.origin.y() + (cj + 0.5) * h - x.y();
      const double w2 = r * r - dy * dy;
      if (w2 <= 0.0) continue;
      const auto [lo, hi] = chord_cells(x.x(), std::sqrt(w2), grid_.origin.x(), h, grid_.nx);
      if (hi < lo) continue;
      const int len = hi - lo + 1;
      int l = 0;
      while ((2 << l) <= len) ++l;
      best = std::max({best, at(l, cj, lo), at(l, cj, hi - (1 << l) + 1)});
    }
    return best;
  }

 private:
  double& at(int l, int cj, int ci) {
    return table_[(static_cast<std::size_t>(l) * grid_.ny + cj) * grid_.nx + ci];
  }
  double at(int l, int cj, int ci) const {
    return table_[(static_cast<std::size_t>(l) * grid_.ny + cj) * grid_.nx + ci];
  }
  const DomainGrid& grid_;
  int levels_ = 1;
  std::vector<double> table_;
};

/// Arc of a (possibly restricted) circle term inside B(x, r).
double circle_term_mass(const MeasureTerm& t, const DomainGrid& grid, const Point& x, double r) {
  const double arc = circle_ball_arc(t.location, t.radius, x, r);
  if (arc == 0.0) return 0.0;
  if (t.restriction.trivial()) return std::abs(t.weight) * arc;
  // restricted: midpoint rule over the intersecting angular interval
  const double full = 2 * kPi * t.radius;
  double start = 0.0, span = 2 * kPi;
  if (arc < full * (1 - 1e-15)) {
    const Point d = x - t.location;
    const double half = arc / (2 * t.radius);
    start = std::atan2(d.y(), d.x()) - half;
    span = 2 * half;
  }
  const int m = std::max(64, static_cast<int>(std::ceil(8 * t.radius * span / (2 * kPi) / grid.h)));
  int kept = 0;
  for (int s = 0; s < m; ++s) {
    const double th = start + span * (s + 0.5) / m;
    const Point y = t.location + t.radius * Point(std::cos(th), std::sin(th));
    if (t.restriction.admits(grid.distance_at(y))) ++kept;
  }
  return std::abs(t.weight) * arc * kept / m;
}

struct Sampler {
  const DomainGrid& grid;
  MorreyOptions options;

  /// Evaluates value(x, r) on the admissible sample set and assembles the
  /// report. `growth` is the per-band factor that signals divergence.
  template <class Value>
  MorreyReport run(double alpha, double growth, const Value& value) const {
    const double r_min = options.min_radius_cells * grid.h;
    double r_top = 0.0;
    std::vector<int> centers;
    for (int k = 0; k < grid.node_count(); ++k) {
      if (grid.interior(k) && 0.5 * grid.delta[k] >= r_min) {
        centers.push_back(k);
        r_top = std::max(r_top, 0.5 * grid.delta[k]);
      }
    }
    MorreyReport report;
    report.alpha = alpha;
    if (centers.empty()) return report;
    const int bands = static_cast<int>(std::floor(std::log2(r_top / r_min))) + 2;

    struct Local {
      std::vector<double> sup;
      std::vector<Point> arg_x;
      std::vector<double> arg_r;
    };
    // one slot per center keeps the reduction schedule-independent
    std::vector<std::vector<std::pair<int, double>>> per_center(centers.size());
    parallel_for(centers.size(), [&](std::size_t c) {
      const int k = centers[c];
      const Point x = grid.node(k);
      double r = 0.5 * grid.delta[k] * (1 - 1e-9);
      for (; r >= r_min; r *= 0.5) {
        const int band = std::clamp(static_cast<int>(std::floor(std::log2(r_top / r) + 1e-9)), 0, bands - 1);
        per_center[c].emplace_back(band, value(x, r));
      }
    });

    Local acc{std::vector<double>(bands, -1.0), std::vector<Point>(bands, Point::Zero()),
              std::vector<double>(bands, 0.0)};
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const Point x = grid.node(centers[c]);
      double r = 0.5 * grid.delta[centers[c]] * (1 - 1e-9);
      for (const auto& [band, v] : per_center[c]) {
        if (v > acc.sup[band]) {
          acc.sup[band] = v;
          acc.arg_x[band] = x;
          acc.arg_r[band] = r;
        }
        r *= 0.5;
      }
    }

    int best = -1;
    std::vector<int> filled;
    for (int b = 0; b < bands; ++b) {
      if (acc.sup[b] < 0.0) continue;
      filled.push_back(b);
      report.band_radius.push_back(r_top * std::pow(0.5, b));
      report.band_sup.push_back(acc.sup[b]);
      if (best < 0 || acc.sup[b] > acc.sup[best]) best = b;
    }
    report.norm = acc.sup[best];
    report.argmax_center = acc.arg_x[best];
    report.argmax_radius = acc.arg_r[best];
    if (filled.size() >= 3) {
      const int b3 = filled[filled.size() - 1];
      const int b2 = filled[filled.size() - 2];
      const int b1 = filled[filled.size() - 3];
      if (best == b3 && acc.sup[b1] > 0.0 && acc.sup[b2] > growth * acc.sup[b1] &&
          acc.sup[b3] > growth * acc.sup[b2]) {
        report.divergent = true;
        report.norm = kInf;
      }
    }
    return report;
  }
};

}  // namespace

Density Density::constant(double value) {
  Density d;
  d.kind = Kind::constant;
  d.amplitude = value;
  return d;
}

Density Density::sin_product(double amplitude) {
  Density d;
  d.kind = Kind::sin_product;
  d.amplitude = amplitude;
  return d;
}

Density Density::delta_power(double amplitude, double exponent) {
  Density d;
  d.kind = Kind::delta_power;
  d.amplitude = amplitude;
  d.exponent = exponent;
  return d;
}

Density Density::from_function(std::function<double(const Point&, double)> f) {
  Density d;
  d.kind = Kind::custom;
  d.custom = std::move(f);
  return d;
}

double Density::operator()(const Point& x, double delta) const {
  switch (kind) {
    case Kind::constant:
      return amplitude;
    case Kind::sin_product:
      return amplitude * std::sin(kPi * x.x()) * std::sin(kPi * x.y());
    case Kind::delta_power:
      return delta > 0.0 ? amplitude * std::pow(delta, exponent) : 0.0;
    case Kind::custom:
      return custom ? custom(x, delta) : 0.0;
    case Kind::cells:
      break;
  }
  throw InvalidSpec("cell densities must be evaluated per cell");
}

MeasureSpec MeasureSpec::density(Density f, int sign) {
  MeasureTerm t;
  t.kind = TermKind::grid_density;
  t.density = std::move(f);
  t.sign = sign;
  return MeasureSpec{{t}};
}

MeasureSpec MeasureSpec::point_mass(const Point& at, double weight, int sign) {
  MeasureTerm t;
  t.kind = TermKind::point_mass;
  t.location = at;
  t.weight = weight;
  t.sign = sign;
  return MeasureSpec{{t}};
}

MeasureSpec MeasureSpec::circle(const Point& center, double radius, double weight, int sign) {
  MeasureTerm t;
  t.kind = TermKind::circle_surface;
  t.location = center;
  t.radius = radius;
  t.weight = weight;
  t.sign = sign;
  return MeasureSpec{{t}};
}

MeasureSpec& MeasureSpec::add(const MeasureSpec& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  return *this;
}

MeasureSpec MeasureSpec::scaled(double factor) const {
  MeasureSpec out = *this;
  for (auto& t : out.terms) {
    if (t.kind == TermKind::grid_density) {
      if (t.density.kind == Density::Kind::cells) {
        for (auto& v : t.density.cells) v *= factor;
      } else if (t.density.kind == Density::Kind::custom) {
        auto f = t.density.custom;
        t.density.custom = [f, factor](const Point& x, double d) { return factor * f(x, d); };
      } else {
        t.density.amplitude *= factor;
      }
    } else {
      t.weight *= factor;
    }
  }
  return out;
}

void MeasureSpec::validate(const DomainGrid& grid) const {
  const Point lo = grid.origin;
  const Point hi = grid.origin + grid.h * Point(grid.nx, grid.ny);
  auto in_box = [&](const Point& p) {
    return (p.array() >= lo.array() - 1e-12).all() && (p.array() <= hi.array() + 1e-12).all();
  };
  for (const auto& t : terms) {
    if (t.sign != 1 && t.sign != -1) throw InvalidSpec("term sign must be +1 or -1");
    switch (t.kind) {
      case TermKind::grid_density:
        if (t.density.kind == Density::Kind::cells &&
            t.density.cells.size() != static_cast<std::size_t>(grid.nx) * grid.ny) {
          throw InvalidSpec("cell density does not match the grid");
        }
        break;
      case TermKind::point_mass:
        if (!in_box(t.location)) throw InvalidSpec("point mass outside the bounding box");
        break;
      case TermKind::circle_surface:
        if (!(t.radius > 0.0)) throw InvalidSpec("circle_surface radius must be positive");
        if (!in_box(t.location - Point::Constant(t.radius)) ||
            !in_box(t.location + Point::Constant(t.radius))) {
          throw InvalidSpec("circle_surface leaves the bounding box");
        }
        break;
    }
  }
}

Eigen::VectorXd cell_values(const Density& f, const DomainGrid& grid) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.nx) * grid.ny);
  for (int cj = 0; cj < grid.ny; ++cj) {
    for (int ci = 0; ci < grid.nx; ++ci) {
      const int c = cj * grid.nx + ci;
      if (f.kind == Density::Kind::cells) {
        v[c] = f.cells[c];
        continue;
      }
      const Point m = grid.cell_midpoint(ci, cj);
      v[c] = f(m, grid.distance_at(m));
    }
  }
  return v;
}

DiscreteMeasure discretize(const MeasureSpec& mu, const DomainGrid& grid) {
  mu.validate(grid);
  DiscreteMeasure out;
  out.cell_density = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.nx) * grid.ny);
  for (const auto& t : mu.terms) {
    switch (t.kind) {
      case TermKind::grid_density: {
        const Eigen::VectorXd f = cell_values(t.density, grid);
        for (int cj = 0; cj < grid.ny; ++cj) {
          for (int ci = 0; ci < grid.nx; ++ci) {
            const double d = grid.distance_at(grid.cell_midpoint(ci, cj));
            if (d > 0.0 && t.restriction.admits(d)) {
              out.cell_density[cj * grid.nx + ci] += t.sign * f[cj * grid.nx + ci];
            }
          }
        }
        break;
      }
      case TermKind::point_mass:
        if (t.restriction.admits(grid.distance_at(t.location))) {
          out.points.push_back({t.location, t.sign * t.weight});
        }
        break;
      case TermKind::circle_surface:
        out.circles.push_back(t);
        break;
    }
  }
  return out;
}

std::vector<Atom> circle_atoms(const MeasureTerm& circle, const DomainGrid& grid) {
  const int m = std::max(64, static_cast<int>(std::ceil(8 * circle.radius / grid.h)));
  const double mass = circle.sign * circle.weight * 2 * kPi * circle.radius / m;
  std::vector<Atom> atoms;
  atoms.reserve(m);
  for (int s = 0; s < m; ++s) {
    const double th = 2 * kPi * (s + 0.5) / m;
    const Point y = circle.location + circle.radius * Point(std::cos(th), std::sin(th));
    if (circle.restriction.admits(grid.distance_at(y))) atoms.push_back({y, mass});
  }
  return atoms;
}

double circle_ball_arc(const Point& c, double R, const Point& x, double r) {
  const double d = (x - c).norm();
  if (d + R < r) return 2 * kPi * R;           // circle inside the ball
  if (d >= R + r || R >= d + r) return 0.0;    // disjoint, or ball strictly inside the circle
  const double cos_half = std::clamp((R * R + d * d - r * r) / (2 * R * d), -1.0, 1.0);
  return 2 * R * std::acos(cos_half);
}

double ball_mass(const MeasureSpec& mu, const DomainGrid& grid, const Point& center, double r) {
  const DiscreteMeasure dm = discretize(mu, grid);
  const RowPrefix prefix(grid, dm.cell_density.cwiseAbs());
  double total = prefix.disc_sum(center, r) * grid.h * grid.h;
  for (const auto& a : dm.points) {
    if ((a.at - center).norm() < r) total += std::abs(a.mass);
  }
  for (const auto& c : dm.circles) total += circle_term_mass(c, grid, center, r);
  return total;
}

MorreyReport morrey_norm(const MeasureSpec& mu, const DomainGrid& grid, double alpha,
                         const MorreyOptions& options) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParams("alpha must lie in (0, 1]");
  const DiscreteMeasure dm = discretize(mu, grid);
  const RowPrefix prefix(grid, dm.cell_density.cwiseAbs());
  const double area = grid.h * grid.h;
  const bool has_density = dm.cell_density.cwiseAbs().maxCoeff() > 0.0;
  auto value = [&](const Point& x, double r) {
    double m = has_density ? prefix.disc_sum(x, r) * area : 0.0;
    for (const auto& a : dm.points) {
      if ((a.at - x).norm() < r) m += std::abs(a.mass);
    }
    for (const auto& c : dm.circles) m += circle_term_mass(c, grid, x, r);
    return std::pow(r, -alpha) * m;
  };
  return Sampler{grid, options}.run(alpha, std::pow(2.0, alpha / 2), value);
}

MeasureSpec truncate(const MeasureSpec& mu, int k) {
  if (k < 1) throw InvalidParams("truncation index k must be >= 1");
  MeasureSpec out = mu;
  for (auto& t : out.terms) t.restriction.lower = std::max(t.restriction.lower, 1.0 / k);
  return out;
}

MeasureSpec truncation_remainder(const MeasureSpec& mu, int k) {
  if (k < 1) throw InvalidParams("truncation index k must be >= 1");
  MeasureSpec out = mu;
  for (auto& t : out.terms) t.restriction.upper = std::min(t.restriction.upper, 1.0 / k);
  return out;
}

MorreyReport morrey_from_density(const Eigen::VectorXd& cell_f, const DomainGrid& grid, double q,
                                 double alpha, const MorreyOptions& options) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParams("alpha must lie in (0, 1]");
  if (!(q >= 1.0)) throw InvalidParams("q must lie in [1, inf]");
  // only the part of f inside the domain counts
  Eigen::VectorXd f = cell_f.cwiseAbs();
  for (int cj = 0; cj < grid.ny; ++cj) {
    for (int ci = 0; ci < grid.nx; ++ci) {
      if (grid.distance_at(grid.cell_midpoint(ci, cj)) <= 0.0) f[cj * grid.nx + ci] = 0.0;
    }
  }
  const double area = grid.h * grid.h;
  const Sampler sampler{grid, options};
  if (std::isinf(q)) {
    const RowMax table(grid, f);
    return sampler.run(alpha, std::pow(2.0, alpha / 2), [&](const Point& x, double r) {
      return std::pow(r, 2.0 - alpha) * table.disc_max(x, r);
    });
  }
  const RowPrefix prefix(grid, f.array().pow(q).matrix());
  const double exponent = 2.0 - alpha - 2.0 / q;
  return sampler.run(alpha, std::pow(2.0, alpha / 2), [&](const Point& x, double r) {
    return std::pow(r, exponent) * std::pow(prefix.disc_sum(x, r) * area, 1.0 / q);
  });
}

MorreyReport morrey_from_density(const Density& f, const DomainGrid& grid, double q, double alpha,
                                 const MorreyOptions& options) {
  return morrey_from_density(cell_values(f, grid), grid, q, alpha, options);
}

}  // namespace cdch
