#include "cdch/experiments.hpp"

#include "cdch/errors.hpp"
#include "cdch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace cdch {

namespace {

void check_radial(int n, double alpha, double R) {
  if (n < 3) throw InvalidParams("radial example needs n >= 3");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParams("alpha must lie in (0, 1)");
  if (!(R > 0.0 && R < 1.0)) throw InvalidParams("R must lie in (0, 1)");
}

// Composite 4-point Gauss-Legendre rule on [a, b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
  static constexpr double x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                  0.8611363115940526};
  static constexpr double w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                  0.3478548451374538};
  const double step = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * step;
    for (int q = 0; q < 4; ++q) sum += w[q] * f(mid + 0.5 * step * x[q]);
  }
  return 0.5 * step * sum;
}

LatticeField closed_domain_field(const Eigen::VectorXd& u, const DomainGrid& grid) {
  if (u.size() != grid.node_count()) throw InvalidParams("field does not match the grid");
  LatticeField f;
  f.nx = grid.nx;
  f.ny = grid.ny;
  f.h = grid.h;
  f.origin = grid.origin;
  f.values = u;
  f.valid.resize(grid.node_count());
  for (int k = 0; k < grid.node_count(); ++k) f.valid[k] = grid.mask[k] != NodeKind::exterior;
  return f;
}

double bounding_side(const DomainSpec& domain) {
  const Box box = make_shape(domain)->bounds();
  return (box.hi - box.lo).maxCoeff();
}

}  // namespace

HoelderReport hoelder_seminorm(const Eigen::VectorXd& u, const DomainGrid& grid, double alpha,
                               const HoelderOptions& options) {
  return lattice_hoelder(closed_domain_field(u, grid), alpha, options);
}

HoelderReport hoelder_seminorm(const FieldSolution& u, const DomainGrid& grid, double alpha,
                               const HoelderOptions& options) {
  return hoelder_seminorm(u.values, grid, alpha, options);
}

HoelderStudy hoelder_estimate_study(const DomainGrid& grid, const CoefficientField& a,
                                    const MeasureSpec& mu, double alpha,
                                    const std::vector<double>& alpha0s,
                                    const SolverSettings& settings) {
  HoelderStudy study;
  study.morrey = morrey_norm(mu, grid, alpha);
  if (study.morrey.divergent) {
    throw InvalidParams("Morrey norm of the measure is divergent at alpha = " +
                        std::to_string(alpha));
  }
  study.lambda = a.lambda;
  study.solution = solve_dirichlet(grid, a, mu, settings);
  const double scale = study.morrey.norm / study.lambda;
  for (double a0 : alpha0s) {
    study.ladder.push_back(hoelder_seminorm(study.solution, grid, a0));
    const double s = study.ladder.back().seminorm;
    study.ratios.push_back(scale > 0.0 ? s / scale : (s > 0.0 ? INFINITY : 0.0));
  }
  return study;
}

double radial_profile(int n, double alpha, double R, double r) {
  const double top = std::pow(1.0 - R, alpha);
  if (r <= R) return top;
  return top * (std::pow(r, 2.0 - n) - 1.0) / (std::pow(R, 2.0 - n) - 1.0);
}

double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

RadialReport radial_example(int n, double alpha, double R, int samples) {
  check_radial(n, alpha, R);
  if (samples < 16) throw InvalidParams("radial example needs at least 16 samples");
  RadialReport rep;
  rep.n = n;
  rep.alpha = alpha;
  rep.R = R;

  // profile on [0, 1] with r = R included
  for (int k = 0; k < samples; ++k) rep.r.push_back(static_cast<double>(k) / (samples - 1));
  rep.r.insert(std::upper_bound(rep.r.begin(), rep.r.end(), R), R);
  for (double r : rep.r) rep.u.push_back(radial_profile(n, alpha, R, r));

  double sup_u = 0.0;
  for (std::size_t k = 0; k < rep.r.size(); ++k) {
    sup_u = std::max(sup_u, rep.u[k]);
    if (rep.r[k] < 1.0) {
      rep.c_alpha_norm = std::max(rep.c_alpha_norm, rep.u[k] / std::pow(1.0 - rep.r[k], alpha));
    }
  }

  // radial pairs dominate: |x - y| >= ||x| - |y||, and u_R is flat on [0, R]
  const int m = 512;
  std::vector<double> rr(m + 1), uu(m + 1);
  for (int k = 0; k <= m; ++k) {
    rr[k] = R + (1.0 - R) * k / m;
    uu[k] = radial_profile(n, alpha, R, rr[k]);
  }
  for (int s = 0; s < m; ++s) {
    for (int t = s + 1; t <= m; ++t) {
      rep.seminorm = std::max(rep.seminorm, (uu[s] - uu[t]) / std::pow(rr[t] - rr[s], alpha));
    }
  }
  rep.full_norm = sup_u + std::pow(2.0, alpha) * rep.seminorm;

  const double c = std::pow(1.0 - R, alpha) / (std::pow(R, 2.0 - n) - 1.0);
  rep.energy = (n - 2) * std::pow(1.0 - R, 2 * alpha) / (std::pow(R, 2.0 - n) - 1.0);
  rep.energy_quadrature = gauss_legendre(
      [&](double r) {
        const double du = c * (2.0 - n) * std::pow(r, 1.0 - n);
        return du * du * std::pow(r, n - 1.0);
      },
      R, 1.0, 400);
  rep.dirichlet_energy = sphere_area(n) * rep.energy;
  return rep;
}

double sample_field(const DomainGrid& grid, const Eigen::VectorXd& u, const Point& p) {
  const Point rel = (p - grid.origin) / grid.h;
  if (rel.x() < -1e-9 || rel.y() < -1e-9 || rel.x() > grid.nx + 1e-9 || rel.y() > grid.ny + 1e-9) {
    return 0.0;
  }
  const int i = std::clamp(static_cast<int>(std::floor(rel.x())), 0, grid.nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor(rel.y())), 0, grid.ny - 1);
  const double s = std::clamp(rel.x() - i, 0.0, 1.0);
  const double t = std::clamp(rel.y() - j, 0.0, 1.0);
  return (1 - s) * (1 - t) * u[grid.index(i, j)] + s * (1 - t) * u[grid.index(i + 1, j)] +
         (1 - s) * t * u[grid.index(i, j + 1)] + s * t * u[grid.index(i + 1, j + 1)];
}

ExpansionReport first_order_expansion(const FieldSolution& u_eps, const FieldSolution& u0,
                                      const CellSolution& cell, double epsilon,
                                      const DomainGrid& grid) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidParams("epsilon must lie in (0, 1]");
  if (u_eps.values.size() != grid.node_count() || u0.values.size() != grid.node_count()) {
    throw InvalidParams("solutions do not match the grid");
  }
  ExpansionReport rep;
  rep.R = std::sqrt(epsilon);
  rep.w = Eigen::VectorXd::Zero(grid.node_count());
  const auto& v = u0.values;
  for (int j = 1; j < grid.ny; ++j) {
    for (int i = 1; i < grid.nx; ++i) {
      const int k = grid.index(i, j);
      if (!grid.interior(k)) continue;
      const double dx = (v[grid.index(i + 1, j)] - v[grid.index(i - 1, j)]) / (2 * grid.h);
      const double dy = (v[grid.index(i, j + 1)] - v[grid.index(i, j - 1)]) / (2 * grid.h);
      const Point y = grid.node(k) / epsilon;
      const double corr = torus_interpolate(cell.chi[0], cell.n, y) * dx +
                          torus_interpolate(cell.chi[1], cell.n, y) * dy;
      const double diff = u_eps.values[k] - v[k];
      rep.w[k] = diff - epsilon * corr;
    }
  }
  const Eigen::VectorXd d = u_eps.values - v;
  auto grad = [&](const Eigen::VectorXd& f, int i, int j) {
    return std::hypot(f[grid.index(i + 1, j)] - f[grid.index(i - 1, j)],
                      f[grid.index(i, j + 1)] - f[grid.index(i, j - 1)]) /
           (2 * grid.h);
  };
  for (int j = 1; j < grid.ny; ++j) {
    for (int i = 1; i < grid.nx; ++i) {
      const int k = grid.index(i, j);
      if (!grid.interior(k)) continue;
      const double diff = d[k];
      if (grid.delta[k] > rep.R) {
        rep.grad_w_inner = std::max(rep.grad_w_inner, grad(rep.w, i, j));
        rep.grad_diff_inner = std::max(rep.grad_diff_inner, grad(d, i, j));
        rep.w_inner = std::max(rep.w_inner, std::abs(rep.w[k]));
        rep.diff_inner = std::max(rep.diff_inner, std::abs(diff));
      } else {
        rep.w_outer = std::max(rep.w_outer, std::abs(rep.w[k]));
        rep.diff_outer = std::max(rep.diff_outer, std::abs(diff));
      }
    }
  }
  return rep;
}

int resolution_for(const DomainSpec& domain, double epsilon, const ConvergenceOptions& options) {
  const double side = bounding_side(domain);
  const int res = static_cast<int>(std::ceil(options.cells_per_period * side / epsilon - 1e-9));
  return std::min(std::max(res, 8), options.max_resolution);
}

RateReport convergence_study(const DomainSpec& domain, const PeriodicCoefficient& a,
                             const MeasureSpec& mu, const std::vector<double>& epsilons,
                             const ConvergenceOptions& options) {
  if (epsilons.size() < 4) throw InvalidParams("a rate fit needs at least 4 epsilon values");
  for (double e : epsilons) {
    if (!(e > 0.0 && e <= 1.0)) throw InvalidParams("epsilon values must lie in (0, 1]");
  }
  RateReport rep;
  rep.epsilons = epsilons;
  std::sort(rep.epsilons.begin(), rep.epsilons.end(), std::greater<>());
  if (std::adjacent_find(rep.epsilons.begin(), rep.epsilons.end()) != rep.epsilons.end()) {
    throw InvalidParams("epsilon values must be distinct");
  }

  const double side = bounding_side(domain);
  for (double e : rep.epsilons) {
    const int res = resolution_for(domain, e, options);
    const double cells = e / (side / res);
    if (cells < options.min_cells_per_period) {
      throw UnderResolved("epsilon " + std::to_string(e) + " gets " + std::to_string(cells) +
                          " cells per period, fewer than " +
                          std::to_string(options.min_cells_per_period));
    }
    rep.resolutions.push_back(res);
  }

  const CellSolution cell = solve_cell(a, options.solver, false);
  rep.A0 = cell.A0;

  // homogenized reference on the comparison nodes
  rep.comparison_resolution = rep.resolutions.front();
  rep.reference_resolution = 4 * rep.comparison_resolution;
  const DomainGrid coarse = build_grid(domain, rep.comparison_resolution);
  std::vector<int> nodes;
  for (int k = 0; k < coarse.node_count(); ++k) {
    if (coarse.interior(k)) nodes.push_back(k);
  }
  std::array<Eigen::VectorXd, 2> u0_samples;
  parallel_for(2, [&](std::size_t r) {
    const DomainGrid g = build_grid(domain, rep.comparison_resolution * (r == 0 ? 2 : 4));
    const FieldSolution u0 =
        solve_dirichlet(g, CoefficientField::constant(g.nx, g.ny, cell.A0), mu, options.solver);
    u0_samples[r].resize(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      u0_samples[r][q] = sample_field(g, u0.values, coarse.node(nodes[q]));
    }
  });
  const Eigen::VectorXd reference = (4.0 * u0_samples[1] - u0_samples[0]) / 3.0;
  rep.discretization_floor = (u0_samples[1] - u0_samples[0]).lpNorm<Eigen::Infinity>();

  const std::size_t m = rep.epsilons.size();
  rep.sup_errors.assign(m, 0.0);
  rep.inner_errors.assign(m, 0.0);
  rep.outer_errors.assign(m, 0.0);
  if (options.with_expansion) rep.expansion_inner.assign(m, 0.0);
  parallel_for(m, [&](std::size_t e) {
    const double eps = rep.epsilons[e];
    const DomainGrid g = build_grid(domain, rep.resolutions[e]);
    const CoefficientField coef = oscillating_coefficient(a, eps, g);
    const FieldSolution ue = solve_dirichlet(g, coef, mu, options.solver);
    const double R = std::sqrt(eps);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double err = std::abs(sample_field(g, ue.values, coarse.node(nodes[q])) - reference[q]);
      rep.sup_errors[e] = std::max(rep.sup_errors[e], err);
      auto& split = coarse.delta[nodes[q]] > R ? rep.inner_errors[e] : rep.outer_errors[e];
      split = std::max(split, err);
    }
    if (options.with_expansion) {
      const FieldSolution u0 =
          solve_dirichlet(g, CoefficientField::constant(g.nx, g.ny, cell.A0), mu, options.solver);
      rep.expansion_inner[e] = first_order_expansion(ue, u0, cell, eps, g).w_inner;
    }
  });

  rep.monotone = true;
  rep.strictly_decreasing = true;
  for (std::size_t e = 1; e < m; ++e) {
    if (!(rep.sup_errors[e] < 1.1 * rep.sup_errors[e - 1])) rep.monotone = false;
    if (!(rep.sup_errors[e] < rep.sup_errors[e - 1])) rep.strictly_decreasing = false;
  }

  std::size_t first = 0;
  if (m > 4 && rep.sup_errors[0] < 3.0 * rep.discretization_floor) {
    first = 1;
    rep.dropped_first = true;
  }
  std::vector<double> lx, ly;
  for (std::size_t e = first; e < m; ++e) {
    if (rep.sup_errors[e] <= 0.0) continue;
    lx.push_back(std::log(rep.epsilons[e]));
    ly.push_back(std::log(rep.sup_errors[e]));
  }
  if (lx.size() >= 2) {
    const auto [slope, icept] = fit_line(lx, ly);
    rep.fitted_rate = slope;
    rep.constant = std::exp(icept);
  }
  return rep;
}

}  // namespace cdch
