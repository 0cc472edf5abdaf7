#include "cdch/capacity.hpp"

#include "cdch/elliptic.hpp"
#include "cdch/errors.hpp"
#include "cdch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace cdch {

namespace {

/// Local lattice of (2m + 1)^2 nodes around a global node, `stride` global
/// cells per local cell.
struct LocalLattice {
  int m = 0;
  int stride = 1;
  double hl = 0.0;

  int cells() const { return 2 * m; }
  int index(int a, int b) const { return (b + m) * (2 * m + 1) + (a + m); }
  int size() const { return (2 * m + 1) * (2 * m + 1); }
};

LocalLattice local_lattice(double h, double R, int max_local_cells) {
  LocalLattice lat;
  lat.stride = std::max(1, static_cast<int>(std::ceil(4.0 * R / h / max_local_cells - 1e-9)));
  lat.hl = lat.stride * h;
  lat.m = static_cast<int>(std::ceil(2.0 * R / lat.hl)) + 1;
  return lat;
}

/// Roles on a local lattice; `in_compact(a, b)` decides membership inside
/// the closed ball of radius R.
template <class InCompact>
std::vector<CapacityNode> ball_roles(const LocalLattice& lat, double R, const InCompact& in_compact) {
  std::vector<CapacityNode> roles(lat.size(), CapacityNode::outside);
  const double r_in = R * (1 + 1e-12);
  for (int b = -lat.m; b <= lat.m; ++b) {
    for (int a = -lat.m; a <= lat.m; ++a) {
      const double dist = lat.hl * std::hypot(a, b);
      CapacityNode role = CapacityNode::outside;
      if (dist < 2.0 * R) role = (dist <= r_in && in_compact(a, b)) ? CapacityNode::compact
                                                                     : CapacityNode::free;
      roles[lat.index(a, b)] = role;
    }
  }
  return roles;
}

double ball_capacity(const LocalLattice& lat, double R, const SolverSettings& settings) {
  const auto roles = ball_roles(lat, R, [](int, int) { return true; });
  return lattice_capacity(lat.cells(), lat.cells(), roles, settings);
}

double complement_capacity(const DomainGrid& grid, int xi_node, const LocalLattice& lat, double R,
                           const SolverSettings& settings) {
  const int ci = grid.i_of(xi_node);
  const int cj = grid.j_of(xi_node);
  const auto roles = ball_roles(lat, R, [&](int a, int b) {
    return grid.kind_at(ci + lat.stride * a, cj + lat.stride * b) != NodeKind::interior;
  });
  return lattice_capacity(lat.cells(), lat.cells(), roles, settings);
}

double scale_variation(const std::vector<ScanSample>& samples, std::size_t n_xi, std::size_t n_r) {
  double worst = 0.0;
  for (std::size_t s = 0; s < n_xi; ++s) {
    for (std::size_t r = 0; r + 1 < n_r; ++r) {
      const double big = samples[s * n_r + r].ratio;
      const double small = samples[s * n_r + r + 1].ratio;
      if (big > 0.0) worst = std::max(worst, std::abs(small / big - 1.0));
    }
  }
  return worst;
}

void fill_minima(CdcReport& report, std::size_t n_xi, std::size_t n_r) {
  report.minima_by_radius.clear();
  for (std::size_t r = 0; r < n_r; ++r) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < n_xi; ++s) m = std::min(m, report.samples[s * n_r + r].ratio);
    report.minima_by_radius.emplace_back(report.samples[r].R, m);
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& [R, m] : report.minima_by_radius) {
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  report.minimum_spread = lo > 0.0 ? hi / lo - 1.0 : (hi > 0.0 ? INFINITY : 0.0);
}

}  // namespace

CondenserSpec CondenserSpec::disks(const Point& center, double k_radius, double outer_radius) {
  CondenserSpec c;
  c.center = center;
  c.outer_radius = outer_radius;
  c.k = Compact::disk;
  c.k_center = center;
  c.k_radius = k_radius;
  return c;
}

CondenserSpec CondenserSpec::point(const Point& center, const Point& at, double outer_radius) {
  CondenserSpec c;
  c.center = center;
  c.outer_radius = outer_radius;
  c.k = Compact::nearest_node;
  c.k_center = at;
  return c;
}

CondenserSpec CondenserSpec::empty(const Point& center, double outer_radius) {
  CondenserSpec c;
  c.center = center;
  c.outer_radius = outer_radius;
  c.k = Compact::empty;
  return c;
}

CondenserSpec CondenserSpec::node_set(const Point& center, double outer_radius,
                                      std::function<bool(const Point&)> contains) {
  CondenserSpec c;
  c.center = center;
  c.outer_radius = outer_radius;
  c.k = Compact::node_set;
  c.k_contains = std::move(contains);
  return c;
}

double lattice_capacity(int nx, int ny, const std::vector<CapacityNode>& roles,
                        const SolverSettings& settings) {
  std::vector<char> free(roles.size());
  Eigen::VectorXd prescribed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(roles.size()));
  bool any_compact = false;
  for (std::size_t k = 0; k < roles.size(); ++k) {
    free[k] = roles[k] == CapacityNode::free;
    if (roles[k] == CapacityNode::compact) {
      prescribed[k] = 1.0;
      any_compact = true;
    }
  }
  if (!any_compact) return 0.0;
  const CoefficientField a = CoefficientField::identity(nx, ny);
  DofMap dofs = DofMap::from_flags(free);
  if (dofs.size() == 0) return discrete_energy(nx, ny, a, prescribed);
  const StiffnessOperator op = assemble(nx, ny, a, std::move(dofs));
  const Eigen::VectorXd load = Eigen::VectorXd::Zero(prescribed.size());
  return solve(op, a, load, prescribed, settings).energy;
}

double variational_capacity(const CondenserSpec& cond, int resolution,
                            const SolverSettings& settings) {
  if (resolution < 8) throw InvalidSpec("resolution must be >= 8");
  if (!(cond.outer_radius > 0.0)) throw InvalidSpec("U radius must be positive");
  if (cond.k == CondenserSpec::Compact::empty) return 0.0;
  if (cond.k == CondenserSpec::Compact::disk && !(cond.k_radius >= 0.0)) {
    throw InvalidSpec("K radius must be nonnegative");
  }
  if (cond.k == CondenserSpec::Compact::node_set && !cond.k_contains) {
    throw InvalidSpec("node-set condenser needs a membership test");
  }

  const double h = 2.0 * cond.outer_radius / resolution;
  const int m = resolution / 2 + 1;
  const int n = 2 * m;
  auto node = [&](int a, int b) -> Point { return cond.center + h * Point(a - m, b - m); };

  int nearest = -1;
  if (cond.k == CondenserSpec::Compact::nearest_node) {
    const Point rel = (cond.k_center - cond.center) / h;
    const int a = static_cast<int>(std::lround(rel.x())) + m;
    const int b = static_cast<int>(std::lround(rel.y())) + m;
    if (a >= 0 && b >= 0 && a <= n && b <= n) nearest = b * (n + 1) + a;
  }

  std::vector<CapacityNode> roles((n + 1) * (n + 1), CapacityNode::outside);
  int compact = 0, free = 0;
  for (int b = 0; b <= n; ++b) {
    for (int a = 0; a <= n; ++a) {
      const int k = b * (n + 1) + a;
      const Point p = node(a, b);
      const double dist = (p - cond.center).norm();
      bool in_k = false;
      switch (cond.k) {
        case CondenserSpec::Compact::disk:
          in_k = (p - cond.k_center).norm() <= cond.k_radius * (1 + 1e-12);
          break;
        case CondenserSpec::Compact::nearest_node:
          in_k = k == nearest;
          break;
        case CondenserSpec::Compact::node_set:
          in_k = cond.k_contains(p);
          break;
        case CondenserSpec::Compact::empty:
          break;
      }
      if (in_k) {
        if (dist > cond.outer_radius - 2 * h) {
          throw InvalidSpec("K must stay at least 2h inside U");
        }
        roles[k] = CapacityNode::compact;
        ++compact;
      } else if (dist < cond.outer_radius) {
        roles[k] = CapacityNode::free;
        ++free;
      }
    }
  }
  if (compact == 0) throw DegenerateCondenser("K has no lattice nodes at this resolution");
  if (free == 0) throw DegenerateCondenser("U \\ K has no lattice nodes at this resolution");
  return lattice_capacity(n, n, roles, settings);
}

std::vector<int> sample_boundary(const DomainGrid& grid, int samples, unsigned seed) {
  std::vector<int> all = boundary_nodes(grid);
  if (samples <= 0 || static_cast<int>(all.size()) <= samples) return all;
  std::vector<int> picked;
  picked.reserve(samples);
  std::mt19937 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), samples, rng);
  return picked;
}

std::vector<double> scan_radii(const DomainGrid& grid, const ScanOptions& options) {
  if (!options.radii.empty()) return options.radii;
  std::vector<double> radii;
  double R = grid.extent() / 4;
  for (int j = 0; j < options.scales && R >= 8 * grid.h * (1 - 1e-12); ++j, R *= 0.5) {
    radii.push_back(R);
  }
  return radii;
}

double cdc_ratio(const DomainGrid& grid, int xi_node, double R, const ScanOptions& options) {
  if (!(R > 0.0)) throw InvalidParams("scan radius must be positive");
  const LocalLattice lat = local_lattice(grid.h, R, options.max_local_cells);
  const double denominator = ball_capacity(lat, R, options.solver);
  return complement_capacity(grid, xi_node, lat, R, options.solver) / denominator;
}

CdcReport cdc_scan(const DomainGrid& grid, const ScanOptions& options) {
  const std::vector<int> xi = sample_boundary(grid, options.samples, options.seed);
  const std::vector<double> radii = scan_radii(grid, options);
  if (xi.empty()) throw InvalidParams("grid has no boundary nodes");

  // the ball capacity depends only on R / h_local, so it is shared by all xi
  std::vector<LocalLattice> lattices;
  std::vector<double> denominators(radii.size());
  for (double R : radii) lattices.push_back(local_lattice(grid.h, R, options.max_local_cells));
  parallel_for(radii.size(), [&](std::size_t r) {
    denominators[r] = ball_capacity(lattices[r], radii[r], options.solver);
  });

  CdcReport report;
  report.samples.resize(xi.size() * radii.size());
  parallel_for(report.samples.size(), [&](std::size_t t) {
    const std::size_t s = t / radii.size();
    const std::size_t r = t % radii.size();
    const double num = complement_capacity(grid, xi[s], lattices[r], radii[r], options.solver);
    report.samples[t] = {grid.node(xi[s]), radii[r], num / denominators[r]};
  });
  report.gamma_min = std::numeric_limits<double>::infinity();
  for (const auto& s : report.samples) report.gamma_min = std::min(report.gamma_min, s.ratio);
  if (report.samples.empty()) report.gamma_min = 0.0;
  report.scale_variation = scale_variation(report.samples, xi.size(), radii.size());
  if (!report.samples.empty()) fill_minima(report, xi.size(), radii.size());
  return report;
}

double vdc_ratio(const DomainGrid& grid, int xi_node, double R) {
  if (!(R > 0.0)) throw InvalidParams("scan radius must be positive");
  const int ci = grid.i_of(xi_node);
  const int cj = grid.j_of(xi_node);
  const int w = static_cast<int>(std::ceil(R / grid.h));
  const double r2 = std::pow(R / grid.h, 2) * (1 + 1e-12);
  double count = 0.0;
  for (int b = -w; b <= w; ++b) {
    for (int a = -w; a <= w; ++a) {
      if (a * a + b * b > r2) continue;
      switch (grid.kind_at(ci + a, cj + b)) {
        case NodeKind::exterior:
          count += 1.0;
          break;
        case NodeKind::boundary:
          count += 0.5;
          break;
        case NodeKind::interior:
          break;
      }
    }
  }
  return count * grid.h * grid.h / (R * R);
}

CdcReport vdc_scan(const DomainGrid& grid, const ScanOptions& options) {
  const std::vector<int> xi = sample_boundary(grid, options.samples, options.seed);
  const std::vector<double> radii = scan_radii(grid, options);
  CdcReport report;
  report.gamma_min = xi.empty() || radii.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (int k : xi) {
    for (double R : radii) {
      const double ratio = vdc_ratio(grid, k, R);
      report.samples.push_back({grid.node(k), R, ratio});
      report.gamma_min = std::min(report.gamma_min, ratio);
    }
  }
  report.scale_variation = scale_variation(report.samples, xi.size(), radii.size());
  if (!report.samples.empty()) fill_minima(report, xi.size(), radii.size());
  return report;
}

PerfectnessReport uniform_perfectness_scan(const DomainGrid& grid, double c,
                                           const ScanOptions& options) {
  if (!(c > 0.0 && c < 1.0)) throw InvalidParams("annulus ratio c must lie in (0, 1)");
  const std::vector<int> xi = sample_boundary(grid, options.samples, options.seed);
  const double r_min = 2.0 * grid.h / (1.0 - c);
  const Point lo = grid.origin;
  const Point hi = grid.origin + grid.h * Point(grid.nx, grid.ny);

  PerfectnessReport report;
  for (int k : xi) {
    const Point x = grid.node(k);
    const double to_outside = std::min({x.x() - lo.x(), x.y() - lo.y(), hi.x() - x.x(), hi.y() - x.y()});
    for (double R = grid.extent(); R >= r_min; R *= 0.5) {
      ++report.annuli_checked;
      if (to_outside < R) continue;  // the annulus reaches past the box, which lies in E
      const int w = static_cast<int>(std::ceil(R / grid.h));
      const double outer2 = std::pow(R / grid.h, 2);
      const double inner2 = std::pow(c * R / grid.h, 2);
      bool hit = false;
      for (int b = -w; b <= w && !hit; ++b) {
        for (int a = -w; a <= w; ++a) {
          const double d2 = a * a + b * b;
          if (d2 < inner2 || d2 >= outer2) continue;
          if (grid.kind_at(grid.i_of(k) + a, grid.j_of(k) + b) != NodeKind::interior) {
            hit = true;
            break;
          }
        }
      }
      if (!hit && report.perfect) {
        report.perfect = false;
        report.witness = x;
        report.witness_radius = R;
      }
    }
  }
  return report;
}

PerfectnessReport uniform_perfectness_segments(const std::vector<Segment>& pieces, double c,
                                               double r_min) {
  if (!(c > 0.0 && c < 1.0)) throw InvalidParams("annulus ratio c must lie in (0, 1)");
  std::vector<Point> ends;
  for (const auto& s : pieces) {
    ends.push_back(s.a);
    ends.push_back(s.b);
  }
  double diam = 0.0;
  for (const auto& p : ends) {
    for (const auto& q : ends) diam = std::max(diam, (p - q).norm());
  }
  std::vector<Point> centers = ends;
  for (const auto& s : pieces) centers.push_back(0.5 * (s.a + s.b));

  PerfectnessReport report;
  for (const Point& x : centers) {
    for (double R = 0.5 * diam; R >= r_min; R *= 0.5) {
      ++report.annuli_checked;
      bool hit = false;
      for (const auto& s : pieces) {
        const double near = segment_distance(x, s.a, s.b);
        const double far = std::max((x - s.a).norm(), (x - s.b).norm());
        if (near < R && far >= c * R) {
          hit = true;
          break;
        }
      }
      if (!hit && report.perfect) {
        report.perfect = false;
        report.witness = x;
        report.witness_radius = R;
      }
    }
  }
  return report;
}

std::vector<Segment> cantor_segments(int level) {
  if (level < 0) throw InvalidParams("Cantor level must be >= 0");
  std::vector<std::pair<double, double>> pieces = {{0.0, 1.0}};
  for (int l = 0; l < level; ++l) {
    std::vector<std::pair<double, double>> next;
    for (const auto& [a, b] : pieces) {
      const double third = (b - a) / 3;
      next.emplace_back(a, a + third);
      next.emplace_back(b - third, b);
    }
    pieces = std::move(next);
  }
  std::vector<Segment> out;
  for (const auto& [a, b] : pieces) out.push_back({Point(a, 0), Point(b, 0)});
  return out;
}

Eigen::VectorXd hardy_weights(const DomainGrid& grid) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.node_count());
  for (int k = 0; k < grid.node_count(); ++k) {
    if (grid.interior(k)) w[k] = std::pow(grid.h / std::max(grid.delta[k], 0.5 * grid.h), 2);
  }
  return w;
}

DofMap conforming_dofs(const DomainGrid& grid) {
  // closure of Omega on the lattice: interior nodes plus nodes lying on the boundary
  const double on_boundary = 1e-12 * grid.extent();
  std::vector<char> closed(grid.node_count(), 0);
  for (int k = 0; k < grid.node_count(); ++k) {
    closed[k] = grid.interior(k) ||
                (grid.mask[k] == NodeKind::boundary && grid.shape &&
                 grid.shape->boundary_distance(grid.node(k)) <= on_boundary);
  }
  std::vector<char> free(grid.node_count(), 0);
  for (int k = 0; k < grid.node_count(); ++k) {
    if (!grid.interior(k)) continue;
    bool inside = true;
    for (int dj = -1; dj <= 1 && inside; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int i = grid.i_of(k) + di, j = grid.j_of(k) + dj;
        if (!grid.in_range(i, j) || !closed[grid.index(i, j)]) {
          inside = false;
          break;
        }
      }
    }
    free[k] = inside;
  }
  return DofMap::from_flags(free);
}

HardyReport hardy_constant(const DomainGrid& grid, const HardyOptions& options) {
  const CoefficientField a = CoefficientField::identity(grid.nx, grid.ny);
  const StiffnessOperator op = assemble(grid.nx, grid.ny, a, conforming_dofs(grid));
  const int n = op.dofs.size();
  if (n == 0) throw EmptyInterior("no interior nodes");
  const Eigen::VectorXd w_full = hardy_weights(grid);
  Eigen::VectorXd w(n), x(n);
  for (int d = 0; d < n; ++d) {
    const int k = op.dofs.node_of_dof[d];
    w[d] = w_full[k];
    x[d] = std::sqrt(grid.delta[k]);
  }
  x /= std::sqrt(x.dot(w.cwiseProduct(x)));

  HardyReport report;
  double lambda = x.dot(op.matrix * x);
  Eigen::VectorXd y = x / lambda;
  for (int it = 1; it <= options.max_iter; ++it) {
    const Eigen::VectorXd b = w.cwiseProduct(x);
    const SolveStats stats = solve_linear(op.matrix, b, y, options.solver);
    if (!stats.converged) throw NoConvergence("inner solve of the Hardy iteration failed");
    const double wnorm2 = y.dot(w.cwiseProduct(y));
    const double next = y.dot(op.matrix * y) / wnorm2;
    x = y / std::sqrt(wnorm2);
    y = x / next;  // warm start for the next solve
    report.iterations = it;
    const bool done = std::abs(next - lambda) <= options.tol * next;
    lambda = next;
    if (done) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged) {
    throw NoConvergence("Hardy inverse iteration did not settle within " +
                        std::to_string(options.max_iter) + " steps (last estimate " +
                        std::to_string(lambda) + ")");
  }
  report.estimate = lambda;
  report.eigenfield = Eigen::VectorXd::Zero(grid.node_count());
  for (int d = 0; d < n; ++d) report.eigenfield[op.dofs.node_of_dof[d]] = x[d];
  return report;
}

HardyReport hardy_refinement(const DomainSpec& spec, const std::vector<int>& resolutions,
                             const HardyOptions& options) {
  HardyReport last;
  std::vector<std::pair<int, double>> trace;
  for (int res : resolutions) {
    last = hardy_constant(build_grid(spec, res), options);
    trace.emplace_back(res, last.estimate);
  }
  last.trace = std::move(trace);
  return last;
}

Eigen::VectorXd distance_power(const DomainGrid& grid, double alpha) {
  return grid.delta.array().pow(alpha).matrix();
}

BarrierReport verify_strong_barrier(const DomainGrid& grid, const Eigen::VectorXd& U, double alpha,
                                    const std::function<bool(const Point&)>& region) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParams("alpha must lie in (0, 1]");
  if (U.size() != grid.node_count()) throw InvalidParams("barrier field does not match the grid");
  const Eigen::VectorXd ku =
      apply_full(grid.nx, grid.ny, CoefficientField::identity(grid.nx, grid.ny), U);
  const Eigen::VectorXd w = hardy_weights(grid);

  BarrierReport report;
  report.c = std::numeric_limits<double>::infinity();
  double t_max = 0.0, t_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid.node_count(); ++k) {
    if (!grid.interior(k)) continue;
    const Point p = grid.node(k);
    if (region && !region(p)) continue;
    if (!(U[k] > 0.0)) throw InvalidParams("barrier must be positive on interior nodes");
    const double ratio = ku[k] / (w[k] * U[k]);
    if (ratio < report.c) {
      report.c = ratio;
      report.worst = p;
    }
    const double t = U[k] / std::pow(grid.delta[k], alpha);
    t_max = std::max(t_max, t);
    t_min = std::min(t_min, t);
    ++report.checked;
  }
  if (report.checked == 0) throw InvalidParams("no interior node in the barrier region");
  report.C = std::max(t_max, 1.0 / t_min);
  report.supersolution = report.c > 1e-10;
  return report;
}

Eigen::VectorXd torsion_power(const DomainGrid& grid, double alpha,
                              const SolverSettings& settings) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParams("alpha must lie in (0, 1]");
  const FieldSolution w = solve_dirichlet(grid, CoefficientField::identity(grid.nx, grid.ny),
                                          MeasureSpec::density(Density::constant(1.0)), settings);
  return w.values.array().max(0.0).pow(alpha);
}

}  // namespace cdch
