#include "cdch/homogenize.hpp"

#include "cdch/errors.hpp"
#include "cdch/parallel.hpp"

#include <Eigen/LU>
#include <Eigen/Sparse>

#include <cmath>
#include <numbers>

namespace cdch {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

int wrap(int i, int n) { return ((i % n) + n) % n; }

void remove_mean(Eigen::VectorXd& v) {
  if (v.size() > 0) v.array() -= v.mean();
}

// Integral of the local Q1 gradients over a cell, in units of h / 2.
constexpr double kGradSign[4][2] = {{-1, -1}, {1, -1}, {-1, 1}, {1, 1}};

/// Solves K x = b on the torus in the mean-free subspace.
SolveStats torus_solve(const SparseRowMatrix<double>& k, bool symmetric, const Eigen::VectorXd& b,
                       Eigen::VectorXd& x, const SolverSettings& settings) {
  const auto project = [](Eigen::VectorXd& v) { remove_mean(v); };
  Eigen::VectorXd rhs = b;
  remove_mean(rhs);
  const long max_iter = settings.max_iter > 0 ? settings.max_iter
                                              : default_max_iter(k.rows(), settings.tol);
  if (x.size() != b.size()) x = Eigen::VectorXd::Zero(b.size());
  SolveStats stats;
  if (symmetric) {
    const auto apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out.noalias() = k * in; };
    if (settings.precond == Preconditioner::ssor) {
      stats = pcg<double>(apply, rhs, x, SsorPreconditioner<double>(k, settings.omega),
                          settings.tol, max_iter, project);
    } else {
      stats = pcg<double>(apply, rhs, x, JacobiPreconditioner<double>(k), settings.tol, max_iter,
                          project);
    }
  } else {
    // normal equations; K^T shares the kernel of constants with K
    const SparseRowMatrix<double> kt = k.transpose();
    Eigen::VectorXd tmp(k.rows());
    const auto apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
      tmp.noalias() = k * in;
      out.noalias() = kt * tmp;
    };
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(k.cols());
    for (int r = 0; r < k.outerSize(); ++r) {
      for (SparseRowMatrix<double>::InnerIterator it(k, r); it; ++it) {
        diag[it.col()] += it.value() * it.value();
      }
    }
    const Eigen::VectorXd nb = kt * rhs;
    stats = pcg<double>(apply, nb, x, JacobiPreconditioner<double>(diag), settings.tol, max_iter,
                        project);
  }
  remove_mean(x);
  return stats;
}

/// Midpoint gradient of the Q1 interpolant in every torus cell.
std::array<Eigen::VectorXd, 2> cell_gradient(const Eigen::VectorXd& u, int n) {
  const double h = 1.0 / n;
  std::array<Eigen::VectorXd, 2> g{Eigen::VectorXd(n * n), Eigen::VectorXd(n * n)};
  for (int cj = 0; cj < n; ++cj) {
    const int j1 = wrap(cj + 1, n);
    for (int ci = 0; ci < n; ++ci) {
      const int i1 = wrap(ci + 1, n);
      const double u00 = u[cj * n + ci], u10 = u[cj * n + i1];
      const double u01 = u[j1 * n + ci], u11 = u[j1 * n + i1];
      g[0][cj * n + ci] = (u10 - u00 + u11 - u01) / (2 * h);
      g[1][cj * n + ci] = (u01 - u00 + u11 - u10) / (2 * h);
    }
  }
  return g;
}

/// Average of the four cell values around each torus node.
Eigen::VectorXd cells_to_nodes(const Eigen::VectorXd& c, int n) {
  Eigen::VectorXd out(n * n);
  for (int j = 0; j < n; ++j) {
    const int jm = wrap(j - 1, n);
    for (int i = 0; i < n; ++i) {
      const int im = wrap(i - 1, n);
      out[j * n + i] = 0.25 * (c[j * n + i] + c[j * n + im] + c[jm * n + i] + c[jm * n + im]);
    }
  }
  return out;
}

/// Per-cell flux A (e_i + grad chi_i).
std::array<Eigen::VectorXd, 2> cell_flux(const PeriodicCoefficient& a, const Eigen::VectorXd& chi,
                                         int i) {
  const int n = a.n();
  const auto g = cell_gradient(chi, n);
  std::array<Eigen::VectorXd, 2> f{Eigen::VectorXd(n * n), Eigen::VectorXd(n * n)};
  for (int c = 0; c < n * n; ++c) {
    Eigen::Vector2d e = Eigen::Vector2d::Unit(i);
    e += Eigen::Vector2d(g[0][c], g[1][c]);
    const Eigen::Vector2d flux = a.field.at(c % n, c / n) * e;
    f[0][c] = flux[0];
    f[1][c] = flux[1];
  }
  return f;
}

void check_direction(int i) {
  if (i != 0 && i != 1) throw InvalidParams("direction must be 0 or 1");
}

}  // namespace

const Eigen::Matrix2d& PeriodicCoefficient::value(const Point& y) const {
  const int n = this->n();
  const double fx = y.x() - std::floor(y.x());
  const double fy = y.y() - std::floor(y.y());
  const int ci = std::min(n - 1, static_cast<int>(fx * n));
  const int cj = std::min(n - 1, static_cast<int>(fy * n));
  return field.at(ci, cj);
}

PeriodicCoefficient PeriodicCoefficient::sample(
    int n, const std::function<Eigen::Matrix2d(const Point&)>& a) {
  if (n < 4) throw InvalidParams("torus grid needs at least 4 cells per side");
  PeriodicCoefficient p;
  p.field.nx = p.field.ny = n;
  p.field.cells.resize(static_cast<std::size_t>(n) * n);
  for (int cj = 0; cj < n; ++cj) {
    for (int ci = 0; ci < n; ++ci) {
      p.field.cells[cj * n + ci] = a(Point((ci + 0.5) / n, (cj + 0.5) / n));
    }
  }
  p.field.fit_envelope();
  return p;
}

PeriodicCoefficient PeriodicCoefficient::constant(int n, const Eigen::Matrix2d& a) {
  if (n < 4) throw InvalidParams("torus grid needs at least 4 cells per side");
  PeriodicCoefficient p;
  p.field = CoefficientField::constant(n, n, a);
  return p;
}

PeriodicCoefficient PeriodicCoefficient::layered(int n, const std::function<double(double)>& a) {
  return sample(n, [&](const Point& y) -> Eigen::Matrix2d {
    return a(y.x()) * Eigen::Matrix2d::Identity();
  });
}

PeriodicCoefficient PeriodicCoefficient::checkerboard(int n, double a, double b) {
  if (n % 4 != 0) throw InvalidParams("checkerboard needs a torus grid divisible by 4");
  return sample(n, [&](const Point& y) -> Eigen::Matrix2d {
    auto middle = [](double t) { return t >= 0.25 && t < 0.75; };
    const bool odd = middle(y.x()) != middle(y.y());
    return (odd ? a : b) * Eigen::Matrix2d::Identity();
  });
}

PeriodicCoefficient make_periodic(const PeriodicSpec& spec) {
  switch (spec.kind) {
    case PeriodicSpec::Kind::constant:
      return PeriodicCoefficient::constant(spec.n, spec.matrix);
    case PeriodicSpec::Kind::layered:
      return PeriodicCoefficient::layered(spec.n,
                                          [](double y) { return 2.0 + std::sin(kTwoPi * y); });
    case PeriodicSpec::Kind::smooth:
      return PeriodicCoefficient::sample(spec.n, [](const Point& y) -> Eigen::Matrix2d {
        return (2.0 + std::sin(kTwoPi * y.x()) * std::sin(kTwoPi * y.y())) *
               Eigen::Matrix2d::Identity();
      });
    case PeriodicSpec::Kind::checkerboard:
      if (!(spec.a > 0.0 && spec.b > 0.0)) throw InvalidParams("checkerboard values must be positive");
      return PeriodicCoefficient::checkerboard(spec.n, spec.a, spec.b);
  }
  throw InvalidParams("unknown periodic coefficient");
}

std::string to_string(PeriodicSpec::Kind kind) {
  switch (kind) {
    case PeriodicSpec::Kind::constant: return "constant";
    case PeriodicSpec::Kind::layered: return "layered";
    case PeriodicSpec::Kind::smooth: return "smooth";
    case PeriodicSpec::Kind::checkerboard: return "checkerboard";
  }
  return "unknown";
}

PeriodicSpec::Kind periodic_kind_from_string(const std::string& name) {
  for (auto k : {PeriodicSpec::Kind::constant, PeriodicSpec::Kind::layered,
                 PeriodicSpec::Kind::smooth, PeriodicSpec::Kind::checkerboard}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidSpec("unknown periodic coefficient '" + name + "'");
}

PeriodicCoefficient keller_dual(const PeriodicCoefficient& a, double k) {
  if (!(k > 0.0)) throw InvalidParams("duality constant must be positive");
  PeriodicCoefficient d = a;
  for (auto& m : d.field.cells) m = k * m.transpose() / m.determinant();
  d.field.fit_envelope();
  return d;
}

SparseRowMatrix<double> torus_stiffness(const CoefficientField& a) {
  const int n = a.nx;
  if (n < 3 || a.ny != n) throw InvalidSpec("torus coefficient must be square with n >= 3");
  a.check_envelope();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * n * 16);
  for (int cj = 0; cj < n; ++cj) {
    for (int ci = 0; ci < n; ++ci) {
      const Eigen::Matrix4d kc = cell_stiffness(a.at(ci, cj));
      int nodes[4];
      for (int l = 0; l < 4; ++l) nodes[l] = wrap(cj + l / 2, n) * n + wrap(ci + l % 2, n);
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) trip.emplace_back(nodes[r], nodes[c], kc(r, c));
      }
    }
  }
  SparseRowMatrix<double> k(n * n, n * n);
  k.setFromTriplets(trip.begin(), trip.end());
  k.makeCompressed();
  return k;
}

Eigen::VectorXd solve_cell_problem(const PeriodicCoefficient& a, int i,
                                   const SolverSettings& settings, SolveStats* stats) {
  check_direction(i);
  const int n = a.n();
  const double h = a.h();
  const SparseRowMatrix<double> k = torus_stiffness(a.field);

  // b_phi = - int A e_i . grad phi
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n * n);
  for (int cj = 0; cj < n; ++cj) {
    for (int ci = 0; ci < n; ++ci) {
      const Eigen::Vector2d f = a.field.at(ci, cj).col(i);
      for (int l = 0; l < 4; ++l) {
        const int node = wrap(cj + l / 2, n) * n + wrap(ci + l % 2, n);
        b[node] -= 0.5 * h * (kGradSign[l][0] * f[0] + kGradSign[l][1] * f[1]);
      }
    }
  }
  Eigen::VectorXd chi;
  const SolveStats s = torus_solve(k, a.field.symmetric, b, chi, settings);
  if (stats) *stats = s;
  if (!s.converged) {
    throw NoConvergence("cell problem " + std::to_string(i + 1) + " stopped after " +
                        std::to_string(s.iterations) + " iterations at relative residual " +
                        std::to_string(s.relative_residual));
  }
  return chi;
}

Eigen::Matrix2d homogenized_matrix(const PeriodicCoefficient& a,
                                   const std::array<Eigen::VectorXd, 2>& chi) {
  const int n = a.n();
  Eigen::Matrix2d a0;
  for (int i = 0; i < 2; ++i) {
    if (chi[i].size() != n * n) throw InvalidParams("corrector does not match the torus grid");
    const auto f = cell_flux(a, chi[i], i);
    a0(0, i) = f[0].mean();
    a0(1, i) = f[1].mean();
  }
  return a0;
}

std::array<Eigen::VectorXd, 2> torus_gradient(const Eigen::VectorXd& u, int n) {
  const auto g = cell_gradient(u, n);
  return {cells_to_nodes(g[0], n), cells_to_nodes(g[1], n)};
}

FluxPotential flux_corrector(const PeriodicCoefficient& a, const std::array<Eigen::VectorXd, 2>& chi,
                             int i, const SolverSettings& settings) {
  check_direction(i);
  const int n = a.n();
  const double h = a.h();
  const auto f = cell_flux(a, chi[i], i);

  FluxPotential out;
  const SparseRowMatrix<double> lap = torus_stiffness(CoefficientField::identity(n, n));
  for (int j = 0; j < 2; ++j) {
    // the nodal average of cell fluxes keeps the cell mean, so d stays mean-free
    out.d[j] = cells_to_nodes(f[j], n);
    out.d[j].array() -= f[j].mean();
    // Laplace phi = d in weak form with a lumped mass: K phi = -h^2 d
    const Eigen::VectorXd rhs = -h * h * out.d[j];
    const SolveStats s = torus_solve(lap, true, rhs, out.phi[j], settings);
    out.iterations += s.iterations;
    if (!s.converged) {
      throw NoConvergence("flux potential solve stopped after " + std::to_string(s.iterations) +
                          " iterations");
    }
  }

  // V_{i12} = d_2 phi_{i1} - d_1 phi_{i2}
  const auto g1 = torus_gradient(out.phi[0], n);
  const auto g2 = torus_gradient(out.phi[1], n);
  out.v = g1[1] - g2[0];
  out.sup = out.v.lpNorm<Eigen::Infinity>();

  // sum_k d_k V_{i1k} = d_2 v and sum_k d_k V_{i2k} = -d_1 v
  const auto gv = torus_gradient(out.v, n);
  const double err = (gv[1] - out.d[0]).squaredNorm() + (-gv[0] - out.d[1]).squaredNorm();
  const double ref = out.d[0].squaredNorm() + out.d[1].squaredNorm();
  // a flux that is already constant leaves only solver noise in d
  const double rms = std::sqrt(ref / (2.0 * n * n));
  out.divergence_error = rms > 1e-8 * a.field.L ? std::sqrt(err / ref) : 0.0;
  return out;
}

CellSolution solve_cell(const PeriodicCoefficient& a, const SolverSettings& settings,
                        bool with_potentials) {
  CellSolution sol;
  sol.n = a.n();
  std::array<SolveStats, 2> stats;
  parallel_for(2, [&](std::size_t i) {
    sol.chi[i] = solve_cell_problem(a, static_cast<int>(i), settings, &stats[i]);
  });
  for (int i = 0; i < 2; ++i) {
    sol.residuals[i] = stats[i].relative_residual;
    sol.iterations[i] = stats[i].iterations;
  }
  sol.A0 = homogenized_matrix(a, sol.chi);
  if (with_potentials) {
    parallel_for(2, [&](std::size_t i) {
      sol.potentials[i] = flux_corrector(a, sol.chi, static_cast<int>(i), settings);
    });
  }
  return sol;
}

HoelderReport corrector_regularity(const Eigen::VectorXd& chi, int n, double alpha,
                                   const HoelderOptions& options) {
  LatticeField f;
  f.nx = f.ny = n;
  f.h = 1.0 / n;
  f.periodic = true;
  f.values = chi;
  return lattice_hoelder(f, alpha, options);
}

double torus_interpolate(const Eigen::VectorXd& u, int n, const Point& y) {
  const double fx = (y.x() - std::floor(y.x())) * n;
  const double fy = (y.y() - std::floor(y.y())) * n;
  const int i0 = std::min(n - 1, static_cast<int>(fx));
  const int j0 = std::min(n - 1, static_cast<int>(fy));
  const double s = fx - i0, t = fy - j0;
  const int i1 = wrap(i0 + 1, n), j1 = wrap(j0 + 1, n);
  return (1 - s) * (1 - t) * u[j0 * n + i0] + s * (1 - t) * u[j0 * n + i1] +
         (1 - s) * t * u[j1 * n + i0] + s * t * u[j1 * n + i1];
}

CoefficientField oscillating_coefficient(const PeriodicCoefficient& a, double epsilon,
                                         const DomainGrid& grid) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidParams("epsilon must lie in (0, 1]");
  CoefficientField f;
  f.nx = grid.nx;
  f.ny = grid.ny;
  if (a.field.cells.size() == 1) {
    f.cells = a.field.cells;
  } else {
    f.cells.resize(static_cast<std::size_t>(grid.nx) * grid.ny);
    for (int cj = 0; cj < grid.ny; ++cj) {
      for (int ci = 0; ci < grid.nx; ++ci) {
        f.cells[cj * grid.nx + ci] = a.value(grid.cell_midpoint(ci, cj) / epsilon);
      }
    }
  }
  f.lambda = a.field.lambda;
  f.L = a.field.L;
  f.symmetric = a.field.symmetric;
  return f;
}

}  // namespace cdch
