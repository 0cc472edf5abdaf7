#ifndef CDCH_ELLIPTIC_HPP
#define CDCH_ELLIPTIC_HPP

#include "cdch/geometry.hpp"
#include "cdch/measures.hpp"
#include "cdch/pcg.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <vector>

namespace cdch {

/// Cellwise 2x2 coefficient matrix with its ellipticity envelope (lambda, L).
/// A single stored matrix means the field is constant.
struct CoefficientField {
  int nx = 0;
  int ny = 0;
  std::vector<Eigen::Matrix2d> cells;
  double lambda = 1.0;
  double L = 1.0;
  bool symmetric = true;

  const Eigen::Matrix2d& at(int ci, int cj) const {
    return cells.size() == 1 ? cells.front() : cells[static_cast<std::size_t>(cj) * nx + ci];
  }

  /// Envelope is the tightest (lambda, L) over the cells unless given.
  static CoefficientField constant(int nx, int ny, const Eigen::Matrix2d& a);
  static CoefficientField identity(int nx, int ny) {
    return constant(nx, ny, Eigen::Matrix2d::Identity());
  }
  /// Samples `a` at every cell midpoint of `grid`.
  static CoefficientField sample(const DomainGrid& grid,
                                 const std::function<Eigen::Matrix2d(const Point&)>& a);

  /// Recomputes lambda, L and the symmetry flag from the cells.
  void fit_envelope();
  CoefficientField scaled(double c) const;
  /// Throws EllipticityViolation unless A z.z >= lambda |z|^2 and
  /// |A z| <= L |z| for 16 unit directions in every cell.
  void check_envelope() const;
};

/// Smallest A z.z and largest |A z| over 16 unit directions.
std::pair<double, double> envelope_probe(const Eigen::Matrix2d& a);

/// Q1 element matrix of a constant coefficient on a square cell. Local nodes
/// are ordered (0,0), (1,0), (0,1), (1,1); in two dimensions h cancels.
Eigen::Matrix4d cell_stiffness(const Eigen::Matrix2d& a);

/// Numbering of the free nodes. Every other node carries a prescribed value.
struct DofMap {
  std::vector<int> dof_of_node;  // -1 for prescribed nodes
  std::vector<int> node_of_dof;

  int size() const { return static_cast<int>(node_of_dof.size()); }
  static DofMap interior(const DomainGrid& grid);
  static DofMap from_flags(const std::vector<char>& free);
};

struct StiffnessOperator {
  SparseRowMatrix<double> matrix;  // free-free block
  DofMap dofs;
  bool symmetric = true;
  int nx = 0;
  int ny = 0;
};

/// Assembles the free-free block over an (nx + 1) x (ny + 1) node lattice.
StiffnessOperator assemble(int nx, int ny, const CoefficientField& a, DofMap dofs);
/// Free nodes are the interior nodes of `grid`.
StiffnessOperator assemble(const DomainGrid& grid, const CoefficientField& a);

/// Nodal vector with entries int phi_i dmu over all nodes.
Eigen::VectorXd load_vector(const DomainGrid& grid, const MeasureSpec& mu);

/// Adds the bilinear hat-function weights of a point mass to `load`.
void spread_atom(const DomainGrid& grid, const Atom& atom, Eigen::VectorXd& load);

/// Element-by-element value of sum_cells u_c^T K_c u_c for a full nodal field.
double discrete_energy(int nx, int ny, const CoefficientField& a, const Eigen::VectorXd& u);

/// y = K u over all nodes, element by element.
Eigen::VectorXd apply_full(int nx, int ny, const CoefficientField& a, const Eigen::VectorXd& u);

struct FieldSolution {
  Eigen::VectorXd values;  // per node, zero off the free set unless prescribed
  double residual_norm = 0.0;
  double energy = 0.0;
  long iterations = 0;
};

/// Solves K u = b restricted to the free nodes of `op`. `load` is a full
/// nodal vector; `prescribed` (optional, full nodal) carries Dirichlet values.
FieldSolution solve(const StiffnessOperator& op, const Eigen::VectorXd& load,
                    const SolverSettings& settings = {});
FieldSolution solve(const StiffnessOperator& op, const CoefficientField& a,
                    const Eigen::VectorXd& load, const Eigen::VectorXd& prescribed,
                    const SolverSettings& settings = {});

/// Linear solve on a free-free block with the configured preconditioner.
/// Nonsymmetric blocks go through CG on the normal equations.
SolveStats solve_linear(const SparseRowMatrix<double>& k, const Eigen::VectorXd& b,
                        Eigen::VectorXd& x, const SolverSettings& settings, bool symmetric = true);

/// Assemble + load + solve with zero Dirichlet data.
FieldSolution solve_dirichlet(const DomainGrid& grid, const CoefficientField& a,
                              const MeasureSpec& mu, const SolverSettings& settings = {});

/// True iff u <= v + tol everywhere, tol relative to max(|u|_inf, |v|_inf, 1).
bool comparison_check(const FieldSolution& u, const FieldSolution& v, double tol = 1e-8);

}  // namespace cdch

#endif  // CDCH_ELLIPTIC_HPP
