#include "cdch/elliptic.hpp"

#include "cdch/errors.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <cmath>
#include <numbers>

namespace cdch {

namespace {

/// S[k][l](a, b) = int over the unit cell of d_k phi_a * d_l phi_b.
std::array<std::array<Eigen::Matrix4d, 2>, 2> reference_matrices() {
  std::array<std::array<Eigen::Matrix4d, 2>, 2> s;
  for (auto& row : s) {
    for (auto& m : row) m.setZero();
  }
  const double g = 0.5 / std::sqrt(3.0);
  const double gauss[2] = {0.5 - g, 0.5 + g};
  for (double sx : gauss) {
    for (double ty : gauss) {
      Eigen::Matrix<double, 2, 4> grad;
      grad << -(1 - ty), (1 - ty), -ty, ty,
              -(1 - sx), -sx, (1 - sx), sx;
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          s[k][l] += 0.25 * grad.row(k).transpose() * grad.row(l);
        }
      }
    }
  }
  return s;
}

const std::array<std::array<Eigen::Matrix4d, 2>, 2>& reference() {
  static const auto s = reference_matrices();
  return s;
}

void check_layout(int nx, int ny, const CoefficientField& a) {
  if (a.cells.empty()) throw InvalidSpec("coefficient field has no cells");
  if (a.cells.size() != 1 &&
      (a.nx != nx || a.ny != ny || a.cells.size() != static_cast<std::size_t>(nx) * ny)) {
    throw InvalidSpec("coefficient field does not match the grid cell layout");
  }
}

}  // namespace

std::pair<double, double> envelope_probe(const Eigen::Matrix2d& a) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int m = 0; m < 16; ++m) {
    const double th = 2 * std::numbers::pi * m / 16;
    const Eigen::Vector2d z(std::cos(th), std::sin(th));
    const Eigen::Vector2d az = a * z;
    lo = std::min(lo, az.dot(z));
    hi = std::max(hi, az.norm());
  }
  return {lo, hi};
}

CoefficientField CoefficientField::constant(int nx, int ny, const Eigen::Matrix2d& a) {
  CoefficientField f;
  f.nx = nx;
  f.ny = ny;
  f.cells = {a};
  f.fit_envelope();
  return f;
}

CoefficientField CoefficientField::sample(const DomainGrid& grid,
                                          const std::function<Eigen::Matrix2d(const Point&)>& a) {
  CoefficientField f;
  f.nx = grid.nx;
  f.ny = grid.ny;
  f.cells.resize(static_cast<std::size_t>(grid.nx) * grid.ny);
  for (int cj = 0; cj < grid.ny; ++cj) {
    for (int ci = 0; ci < grid.nx; ++ci) f.cells[cj * grid.nx + ci] = a(grid.cell_midpoint(ci, cj));
  }
  f.fit_envelope();
  return f;
}

void CoefficientField::fit_envelope() {
  lambda = std::numeric_limits<double>::infinity();
  L = 0.0;
  symmetric = true;
  for (const auto& c : cells) {
    const auto [lo, hi] = envelope_probe(c);
    lambda = std::min(lambda, lo);
    L = std::max(L, hi);
    if (std::abs(c(0, 1) - c(1, 0)) > 1e-12) symmetric = false;
  }
}

CoefficientField CoefficientField::scaled(double c) const {
  CoefficientField f = *this;
  for (auto& m : f.cells) m *= c;
  f.lambda *= c;
  f.L *= c;
  return f;
}

void CoefficientField::check_envelope() const {
  if (!(lambda > 0.0) || !(lambda <= L)) {
    throw EllipticityViolation("envelope requires 0 < lambda <= L");
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto [lo, hi] = envelope_probe(cells[c]);
    if (lo < lambda * (1 - 1e-12) || hi > L * (1 + 1e-12)) {
      throw EllipticityViolation("coefficient in cell " + std::to_string(c) +
                                 " leaves the envelope [" + std::to_string(lambda) + ", " +
                                 std::to_string(L) + "]");
    }
  }
}

Eigen::Matrix4d cell_stiffness(const Eigen::Matrix2d& a) {
  const auto& s = reference();
  return a(0, 0) * s[0][0] + a(0, 1) * s[0][1] + a(1, 0) * s[1][0] + a(1, 1) * s[1][1];
}

DofMap DofMap::interior(const DomainGrid& grid) {
  std::vector<char> free(grid.node_count());
  for (int k = 0; k < grid.node_count(); ++k) free[k] = grid.interior(k);
  return from_flags(free);
}

DofMap DofMap::from_flags(const std::vector<char>& free) {
  DofMap m;
  m.dof_of_node.assign(free.size(), -1);
  for (std::size_t k = 0; k < free.size(); ++k) {
    if (free[k]) {
      m.dof_of_node[k] = static_cast<int>(m.node_of_dof.size());
      m.node_of_dof.push_back(static_cast<int>(k));
    }
  }
  return m;
}

StiffnessOperator assemble(int nx, int ny, const CoefficientField& a, DofMap dofs) {
  check_layout(nx, ny, a);
  a.check_envelope();
  const int row = nx + 1;
  const int n = dofs.size();
  const bool uniform = a.cells.size() == 1;
  const Eigen::Matrix4d k_uniform = cell_stiffness(a.cells.front());

  std::vector<int> outer(n + 1, 0);
  std::vector<int> inner;
  std::vector<double> values;
  inner.reserve(static_cast<std::size_t>(n) * 9);
  values.reserve(static_cast<std::size_t>(n) * 9);

  for (int d = 0; d < n; ++d) {
    const int node = dofs.node_of_dof[d];
    const int i = node % row;
    const int j = node / row;
    double stencil[3][3] = {};
    for (int cj = j - 1; cj <= j; ++cj) {
      for (int ci = i - 1; ci <= i; ++ci) {
        if (ci < 0 || cj < 0 || ci >= nx || cj >= ny) continue;
        const Eigen::Matrix4d kc = uniform ? k_uniform : cell_stiffness(a.at(ci, cj));
        const int la = (i - ci) + 2 * (j - cj);
        for (int lb = 0; lb < 4; ++lb) {
          stencil[ci + lb % 2 - i + 1][cj + lb / 2 - j + 1] += kc(la, lb);
        }
      }
    }
    // neighbours in node order keep the columns sorted
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (i + di < 0 || j + dj < 0 || i + di > nx || j + dj > ny) continue;
        const int col = dofs.dof_of_node[(j + dj) * row + i + di];
        if (col < 0) continue;
        inner.push_back(col);
        values.push_back(stencil[di + 1][dj + 1]);
      }
    }
    outer[d + 1] = static_cast<int>(inner.size());
  }

  StiffnessOperator op;
  op.matrix = Eigen::Map<const SparseRowMatrix<double>>(n, n, static_cast<int>(inner.size()),
                                                        outer.data(), inner.data(), values.data());
  op.dofs = std::move(dofs);
  op.symmetric = a.symmetric;
  op.nx = nx;
  op.ny = ny;
  return op;
}

StiffnessOperator assemble(const DomainGrid& grid, const CoefficientField& a) {
  return assemble(grid.nx, grid.ny, a, DofMap::interior(grid));
}

void spread_atom(const DomainGrid& grid, const Atom& atom, Eigen::VectorXd& load) {
  const Point rel = (atom.at - grid.origin) / grid.h;
  const int i = std::clamp(static_cast<int>(std::floor(rel.x())), 0, grid.nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor(rel.y())), 0, grid.ny - 1);
  const double s = std::clamp(rel.x() - i, 0.0, 1.0);
  const double t = std::clamp(rel.y() - j, 0.0, 1.0);
  load[grid.index(i, j)] += atom.mass * (1 - s) * (1 - t);
  load[grid.index(i + 1, j)] += atom.mass * s * (1 - t);
  load[grid.index(i, j + 1)] += atom.mass * (1 - s) * t;
  load[grid.index(i + 1, j + 1)] += atom.mass * s * t;
}

Eigen::VectorXd load_vector(const DomainGrid& grid, const MeasureSpec& mu) {
  const DiscreteMeasure dm = discretize(mu, grid);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(grid.node_count());
  const double quarter = 0.25 * grid.h * grid.h;
  for (int cj = 0; cj < grid.ny; ++cj) {
    for (int ci = 0; ci < grid.nx; ++ci) {
      const double f = dm.cell_density[cj * grid.nx + ci];
      if (f == 0.0) continue;
      load[grid.index(ci, cj)] += quarter * f;
      load[grid.index(ci + 1, cj)] += quarter * f;
      load[grid.index(ci, cj + 1)] += quarter * f;
      load[grid.index(ci + 1, cj + 1)] += quarter * f;
    }
  }
  for (const auto& p : dm.points) spread_atom(grid, p, load);
  for (const auto& c : dm.circles) {
    for (const auto& atom : circle_atoms(c, grid)) spread_atom(grid, atom, load);
  }
  return load;
}

double discrete_energy(int nx, int ny, const CoefficientField& a, const Eigen::VectorXd& u) {
  check_layout(nx, ny, a);
  const int row = nx + 1;
  const bool uniform = a.cells.size() == 1;
  const Eigen::Matrix4d k_uniform = cell_stiffness(a.cells.front());
  double e = 0.0;
  for (int cj = 0; cj < ny; ++cj) {
    for (int ci = 0; ci < nx; ++ci) {
      const int k0 = cj * row + ci;
      const Eigen::Vector4d uc(u[k0], u[k0 + 1], u[k0 + row], u[k0 + row + 1]);
      if (uc.isZero(0.0)) continue;
      e += uc.dot((uniform ? k_uniform : cell_stiffness(a.at(ci, cj))) * uc);
    }
  }
  return e;
}

Eigen::VectorXd apply_full(int nx, int ny, const CoefficientField& a, const Eigen::VectorXd& u) {
  check_layout(nx, ny, a);
  const int row = nx + 1;
  const bool uniform = a.cells.size() == 1;
  const Eigen::Matrix4d k_uniform = cell_stiffness(a.cells.front());
  Eigen::VectorXd y = Eigen::VectorXd::Zero(u.size());
  for (int cj = 0; cj < ny; ++cj) {
    for (int ci = 0; ci < nx; ++ci) {
      const int ids[4] = {cj * row + ci, cj * row + ci + 1, (cj + 1) * row + ci,
                          (cj + 1) * row + ci + 1};
      const Eigen::Vector4d uc(u[ids[0]], u[ids[1]], u[ids[2]], u[ids[3]]);
      if (uc.isZero(0.0)) continue;
      const Eigen::Vector4d yc = (uniform ? k_uniform : cell_stiffness(a.at(ci, cj))) * uc;
      for (int l = 0; l < 4; ++l) y[ids[l]] += yc[l];
    }
  }
  return y;
}

SolveStats solve_linear(const SparseRowMatrix<double>& k, const Eigen::VectorXd& b,
                        Eigen::VectorXd& x, const SolverSettings& settings, bool symmetric) {
  const long n = static_cast<long>(b.size());
  const long max_iter = settings.max_iter > 0 ? settings.max_iter : default_max_iter(n, settings.tol);
  if (symmetric) {
    auto apply = [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y.noalias() = k * v; };
    if (settings.precond == Preconditioner::ssor) {
      return pcg<double>(apply, b, x, SsorPreconditioner<double>(k, settings.omega), settings.tol,
                         max_iter);
    }
    return pcg<double>(apply, b, x, JacobiPreconditioner<double>(k), settings.tol, max_iter);
  }
  // normal equations; the stopping test is repeated on the original residual
  const SparseRowMatrix<double> kt = k.transpose();
  const SparseRowMatrix<double> normal = kt * k;
  const Eigen::VectorXd bn = kt * b;
  auto apply = [&](const Eigen::VectorXd& v, Eigen::VectorXd& y) { y.noalias() = normal * v; };
  SolveStats stats = pcg<double>(apply, bn, x, JacobiPreconditioner<double>(normal),
                                 settings.tol * 1e-3, max_iter * 4);
  const double b_norm = b.norm();
  stats.relative_residual = b_norm > 0.0 ? (b - k * x).norm() / b_norm : 0.0;
  stats.converged = stats.relative_residual <= settings.tol;
  return stats;
}

FieldSolution solve(const StiffnessOperator& op, const Eigen::VectorXd& load,
                    const SolverSettings& settings) {
  return solve(op, CoefficientField{}, load, Eigen::VectorXd(), settings);
}

FieldSolution solve(const StiffnessOperator& op, const CoefficientField& a,
                    const Eigen::VectorXd& load, const Eigen::VectorXd& prescribed,
                    const SolverSettings& settings) {
  if (!(settings.tol > 0.0 && settings.tol <= 1e-6)) {
    throw InvalidParams("solver tolerance must lie in (0, 1e-6]");
  }
  const int n = op.dofs.size();
  const bool lifted = prescribed.size() > 0;
  Eigen::VectorXd b(n);
  for (int d = 0; d < n; ++d) b[d] = load[op.dofs.node_of_dof[d]];
  if (lifted) {
    Eigen::VectorXd g = prescribed;
    for (int d = 0; d < n; ++d) g[op.dofs.node_of_dof[d]] = 0.0;
    const Eigen::VectorXd kg = apply_full(op.nx, op.ny, a, g);
    for (int d = 0; d < n; ++d) b[d] -= kg[op.dofs.node_of_dof[d]];
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const SolveStats stats = solve_linear(op.matrix, b, x, settings, op.symmetric);
  if (!stats.converged) {
    throw NoConvergence("solver stopped after " + std::to_string(stats.iterations) +
                        " iterations at relative residual " +
                        std::to_string(stats.relative_residual));
  }

  FieldSolution sol;
  sol.values = lifted ? prescribed : Eigen::VectorXd::Zero(load.size());
  for (int d = 0; d < n; ++d) sol.values[op.dofs.node_of_dof[d]] = x[d];
  sol.residual_norm = stats.relative_residual;
  sol.iterations = stats.iterations;
  sol.energy = lifted ? discrete_energy(op.nx, op.ny, a, sol.values) : x.dot(op.matrix * x);
  return sol;
}

FieldSolution solve_dirichlet(const DomainGrid& grid, const CoefficientField& a,
                              const MeasureSpec& mu, const SolverSettings& settings) {
  const StiffnessOperator op = assemble(grid, a);
  return solve(op, load_vector(grid, mu), settings);
}

bool comparison_check(const FieldSolution& u, const FieldSolution& v, double tol) {
  if (u.values.size() != v.values.size()) throw InvalidParams("fields live on different grids");
  const double scale =
      std::max({u.values.lpNorm<Eigen::Infinity>(), v.values.lpNorm<Eigen::Infinity>(), 1.0});
  return ((u.values - v.values).array() <= tol * scale).all();
}

Preconditioner preconditioner_from_string(const std::string& name) {
  if (name == "jacobi") return Preconditioner::jacobi;
  if (name == "ssor") return Preconditioner::ssor;
  throw InvalidSpec("unknown preconditioner '" + name + "'");
}

std::string to_string(Preconditioner p) {
  return p == Preconditioner::jacobi ? "jacobi" : "ssor";
}

}  // namespace cdch
