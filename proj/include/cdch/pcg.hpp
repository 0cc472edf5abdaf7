#ifndef CDCH_PCG_HPP
#define CDCH_PCG_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <string>

namespace cdch {

enum class Preconditioner { jacobi, ssor };

Preconditioner preconditioner_from_string(const std::string& name);
std::string to_string(Preconditioner p);

struct SolverSettings {
  double tol = 1e-10;        // relative residual ||b - Ax|| / ||b||
  long max_iter = 0;         // 0: 50 sqrt(N) log(1/tol)
  Preconditioner precond = Preconditioner::ssor;
  double omega = 1.6;        // SSOR relaxation
};

struct SolveStats {
  long iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

inline long default_max_iter(long n, double tol) {
  return static_cast<long>(50.0 * std::sqrt(static_cast<double>(n)) * std::log(1.0 / tol)) + 10;
}

template <class Scalar>
using SparseRowMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
class JacobiPreconditioner {
 public:
  explicit JacobiPreconditioner(const SparseRowMatrix<Scalar>& a)
      : inv_diag_(a.diagonal().cwiseInverse()) {}
  explicit JacobiPreconditioner(VectorX<Scalar> diag) : inv_diag_(diag.cwiseInverse()) {}
  void operator()(const VectorX<Scalar>& r, VectorX<Scalar>& z) const {
    z = inv_diag_.cwiseProduct(r);
  }

 private:
  VectorX<Scalar> inv_diag_;
};

/// Symmetric SOR sweep pair. Requires a symmetric matrix with a positive
/// diagonal stored in every row.
template <class Scalar>
class SsorPreconditioner {
 public:
  SsorPreconditioner(const SparseRowMatrix<Scalar>& a, Scalar omega)
      : a_(a), omega_(omega), diag_(a.diagonal()) {}

  void operator()(const VectorX<Scalar>& r, VectorX<Scalar>& z) const {
    const auto n = a_.rows();
    const auto* outer = a_.outerIndexPtr();
    const auto* inner = a_.innerIndexPtr();
    const auto* val = a_.valuePtr();
    z.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar s = r[i];
      for (auto p = outer[i]; p < outer[i + 1] && inner[p] < i; ++p) s -= val[p] * z[inner[p]];
      z[i] = s * omega_ / diag_[i];
    }
    const Scalar scale = (Scalar(2) - omega_) / omega_;
    for (Eigen::Index i = 0; i < n; ++i) z[i] *= diag_[i] * scale;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      Scalar s = z[i];
      for (auto p = outer[i + 1] - 1; p >= outer[i] && inner[p] > i; --p) s -= val[p] * z[inner[p]];
      z[i] = s * omega_ / diag_[i];
    }
  }

 private:
  const SparseRowMatrix<Scalar>& a_;
  Scalar omega_;
  VectorX<Scalar> diag_;
};

struct NoProjection {
  template <class V>
  void operator()(V&) const {}
};

/// Preconditioned conjugate gradients on `apply(x, y)`: y = A x.
/// `project` maps a vector onto the admissible subspace (e.g. mean-free
/// fields) and is applied to the residual and every preconditioned residual.
/// `x` carries the initial guess in and the iterate out.
template <class Scalar, class Apply, class Precond, class Project = NoProjection>
SolveStats pcg(const Apply& apply, const VectorX<Scalar>& b, VectorX<Scalar>& x,
               const Precond& precond, double tol, long max_iter,
               const Project& project = Project{}) {
  SolveStats stats;
  const Scalar b_norm = b.norm();
  if (x.size() != b.size()) x = VectorX<Scalar>::Zero(b.size());
  if (b_norm == Scalar(0)) {
    x.setZero();
    stats.converged = true;
    return stats;
  }
  VectorX<Scalar> r(b.size()), z(b.size()), p(b.size()), q(b.size());
  apply(x, q);
  r = b - q;
  project(r);
  Scalar r_norm = r.norm();
  if (r_norm <= tol * b_norm) {
    stats.relative_residual = r_norm / b_norm;
    stats.converged = true;
    return stats;
  }
  precond(r, z);
  project(z);
  p = z;
  Scalar rho = r.dot(z);
  for (long it = 1; it <= max_iter; ++it) {
    apply(p, q);
    const Scalar alpha = rho / p.dot(q);
    x.noalias() += alpha * p;
    r.noalias() -= alpha * q;
    bool refreshed = false;
    // periodic refresh keeps the recursive residual honest
    if (it % 500 == 0) {
      apply(x, q);
      r = b - q;
      project(r);
      refreshed = true;
    }
    r_norm = r.norm();
    stats.iterations = it;
    if (r_norm <= tol * b_norm) {
      if (!refreshed) {
        apply(x, q);
        r = b - q;
        project(r);
        r_norm = r.norm();
      }
      if (r_norm <= tol * b_norm) {
        stats.converged = true;
        break;
      }
      // restart from the true residual
      precond(r, z);
      project(z);
      p = z;
      rho = r.dot(z);
      continue;
    }
    precond(r, z);
    project(z);
    const Scalar rho_next = r.dot(z);
    p = z + (rho_next / rho) * p;
    rho = rho_next;
  }
  if (!stats.converged) {
    apply(x, q);
    r = b - q;
    project(r);
    r_norm = r.norm();
    stats.converged = r_norm <= tol * b_norm;
  }
  stats.relative_residual = r_norm / b_norm;
  return stats;
}

}  // namespace cdch

#endif  // CDCH_PCG_HPP
