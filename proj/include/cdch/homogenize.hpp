#ifndef CDCH_HOMOGENIZE_HPP
#define CDCH_HOMOGENIZE_HPP

#include "cdch/elliptic.hpp"
#include "cdch/hoelder.hpp"
#include "cdch/pcg.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <string>

namespace cdch {

/// Y-periodic coefficient on the unit torus, sampled at the midpoints of an
/// n x n cell grid. Torus node (i, j) sits at (i, j) / n with index j n + i.
struct PeriodicCoefficient {
  CoefficientField field;

  int n() const { return field.nx; }
  double h() const { return 1.0 / field.nx; }
  /// Cell containing y, with wraparound.
  const Eigen::Matrix2d& value(const Point& y) const;

  static PeriodicCoefficient sample(int n, const std::function<Eigen::Matrix2d(const Point&)>& a);
  static PeriodicCoefficient constant(int n, const Eigen::Matrix2d& a);
  /// a(y1) I.
  static PeriodicCoefficient layered(int n, const std::function<double(double)>& a);
  /// a I on the cells where exactly one of y1, y2 lies in [1/4, 3/4), b I
  /// elsewhere. Symmetric under y1 -> 1 - y1 and y2 -> 1 - y2.
  static PeriodicCoefficient checkerboard(int n, double a, double b);
};

/// Named periodic coefficients used by manifests and studies.
struct PeriodicSpec {
  enum class Kind { constant, layered, smooth, checkerboard };
  Kind kind = Kind::layered;
  int n = 256;
  double a = 1.0;  // checkerboard values; constant uses `matrix`
  double b = 4.0;
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();
};

/// constant: `matrix`. layered: (2 + sin 2 pi y1) I.
/// smooth: (2 + sin 2 pi y1 sin 2 pi y2) I. checkerboard: (a, b).
PeriodicCoefficient make_periodic(const PeriodicSpec& spec);
std::string to_string(PeriodicSpec::Kind kind);
PeriodicSpec::Kind periodic_kind_from_string(const std::string& name);

/// k A^T / det A, which is k R^T A^{-1} R for the quarter turn R. Rotating
/// fluxes into gradients shows that A0 of the dual is k A0^T / det A0.
PeriodicCoefficient keller_dual(const PeriodicCoefficient& a, double k = 1.0);

/// Q1 stiffness on the n x n torus lattice (singular, kernel = constants).
SparseRowMatrix<double> torus_stiffness(const CoefficientField& a);

/// Mean-free periodic solution of the cell problem in direction i (0 or 1).
/// Throws NoConvergence.
Eigen::VectorXd solve_cell_problem(const PeriodicCoefficient& a, int i,
                                   const SolverSettings& settings = {},
                                   SolveStats* stats = nullptr);

/// A0 e_i = average of A (e_i + grad chi_i) by the midpoint rule.
Eigen::Matrix2d homogenized_matrix(const PeriodicCoefficient& a,
                                   const std::array<Eigen::VectorXd, 2>& chi);

/// Flux potentials for one direction i. Only V_{i12} is stored, as
/// V_{i12} = v and V_{i21} = -v; the diagonal entries vanish.
struct FluxPotential {
  Eigen::VectorXd v;
  std::array<Eigen::VectorXd, 2> d;    // nodal mean-free flux d_{ij}
  std::array<Eigen::VectorXd, 2> phi;  // periodic Poisson potentials
  double sup = 0.0;                    // max |v|
  double divergence_error = 0.0;       // relative L2 error of sum_k d_k V_{ijk} against d_{ij},
                                       // 0 when d is below solver noise
  long iterations = 0;
};

FluxPotential flux_corrector(const PeriodicCoefficient& a, const std::array<Eigen::VectorXd, 2>& chi,
                             int i, const SolverSettings& settings = {});

struct CellSolution {
  int n = 0;
  std::array<Eigen::VectorXd, 2> chi;
  Eigen::Matrix2d A0 = Eigen::Matrix2d::Zero();
  std::array<FluxPotential, 2> potentials;
  std::array<double, 2> residuals{};
  std::array<long, 2> iterations{};

  /// V_{ijk} at a torus node, indices 0 or 1.
  double V(int i, int j, int k, int node) const {
    if (j == k) return 0.0;
    return j == 0 ? potentials[i].v[node] : -potentials[i].v[node];
  }
};

/// Correctors, A0 and both flux potentials. Skips the potentials when
/// `with_potentials` is false.
CellSolution solve_cell(const PeriodicCoefficient& a, const SolverSettings& settings = {},
                        bool with_potentials = true);

/// Per-node Q1 gradient of a torus field: cell midpoint gradients averaged
/// over the four cells around each node.
std::array<Eigen::VectorXd, 2> torus_gradient(const Eigen::VectorXd& u, int n);

/// Hoelder data of a corrector with the torus metric.
HoelderReport corrector_regularity(const Eigen::VectorXd& chi, int n, double alpha,
                                   const HoelderOptions& options = {});

/// Bilinear interpolation of a torus field at y, with wraparound.
double torus_interpolate(const Eigen::VectorXd& u, int n, const Point& y);

/// A(x / epsilon) on the cells of `grid`, read from the torus cell that
/// contains the scaled midpoint, so the envelope carries over unchanged.
CoefficientField oscillating_coefficient(const PeriodicCoefficient& a, double epsilon,
                                         const DomainGrid& grid);

}  // namespace cdch

#endif  // CDCH_HOMOGENIZE_HPP
