#ifndef SPONGE_LINEAR_SOLVER_HPP
#define SPONGE_LINEAR_SOLVER_HPP

#include <Eigen/Sparse>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sponge/errors.hpp"

namespace sponge {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Square sparse system A x = b over the active degrees of freedom.
struct SparseSystem {
  SparseMatrix matrix;
  Vector rhs;
};

struct LinearConfig {
  double rel_tol = 1e-6;
  int max_iter = 100;
};

struct LinearResult {
  Vector x;
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Replaces constrained rows with identity rows and the prescribed value on
/// the right-hand side. Columns are left untouched.
inline void apply_dirichlet(SparseSystem& system, std::span<const char> constrained,
                            std::span<const double> values) {
  SparseMatrix& a = system.matrix;
  for (int row = 0; row < a.outerSize(); ++row) {
    if (!constrained[row]) continue;
    for (SparseMatrix::InnerIterator it(a, row); it; ++it) {
      it.valueRef() = it.col() == row ? 1.0 : 0.0;
    }
    if (a.coeff(row, row) != 1.0) a.coeffRef(row, row) = 1.0;
    system.rhs[row] = values[row];
  }
}

/// Zero-fill incomplete LU on the sparsity pattern of a compressed row matrix.
/// L is unit lower triangular; both factors share one value array.
class Ilu0 {
 public:
  explicit Ilu0(const SparseMatrix& a) : lu_(a) {
    lu_.makeCompressed();
    const int n = static_cast<int>(lu_.rows());
    const int* outer = lu_.outerIndexPtr();
    const int* inner = lu_.innerIndexPtr();
    double* val = lu_.valuePtr();
    diag_.assign(n, -1);
    for (int i = 0; i < n; ++i) {
      for (int p = outer[i]; p < outer[i + 1]; ++p) {
        if (inner[p] == i) diag_[i] = p;
      }
      if (diag_[i] < 0) {
        throw SolverError("ILU(0): missing diagonal in row " + std::to_string(i), 0.0);
      }
    }
    std::vector<int> where(n, -1);
    for (int i = 0; i < n; ++i) {
      for (int p = outer[i]; p < outer[i + 1]; ++p) where[inner[p]] = p;
      for (int p = outer[i]; p < outer[i + 1] && inner[p] < i; ++p) {
        const int k = inner[p];
        const double pivot = val[diag_[k]];
        val[p] /= pivot;
        const double lik = val[p];
        for (int q = diag_[k] + 1; q < outer[k + 1]; ++q) {
          const int w = where[inner[q]];
          if (w >= 0) val[w] -= lik * val[q];
        }
      }
      for (int p = outer[i]; p < outer[i + 1]; ++p) where[inner[p]] = -1;
      const double d = val[diag_[i]];
      if (d == 0.0 || !std::isfinite(d)) {
        throw SolverError("ILU(0): zero pivot in row " + std::to_string(i), 0.0);
      }
    }
  }

  /// z = (LU)^{-1} r
  void apply(const Vector& r, Vector& z) const {
    const int n = static_cast<int>(lu_.rows());
    const int* outer = lu_.outerIndexPtr();
    const int* inner = lu_.innerIndexPtr();
    const double* val = lu_.valuePtr();
    z = r;
    for (int i = 0; i < n; ++i) {
      double s = z[i];
      for (int p = outer[i]; p < diag_[i]; ++p) s -= val[p] * z[inner[p]];
      z[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = z[i];
      for (int p = diag_[i] + 1; p < outer[i + 1]; ++p) s -= val[p] * z[inner[p]];
      z[i] = s / val[diag_[i]];
    }
  }

 private:
  SparseMatrix lu_;
  std::vector<int> diag_;
};

/// Right-preconditioned BiCGSTAB with ILU(0). Converged when the true
/// residual satisfies ||b - Ax|| / ||b|| <= rel_tol; throws SolverError with
/// the final relative residual otherwise.
inline LinearResult solve_linear(const SparseSystem& system, const LinearConfig& cfg = {}) {
  const SparseMatrix& a = system.matrix;
  const Vector& b = system.rhs;
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw ContractError("solve_linear: inconsistent system dimensions");
  }
  LinearResult out;
  out.x = Vector::Zero(b.size());
  const double b_norm = b.norm();
  if (b_norm == 0.0) return out;
  for (int row = 0; row < a.outerSize(); ++row) {
    bool nonzero = false;
    for (SparseMatrix::InnerIterator it(a, row); it; ++it) nonzero |= it.value() != 0.0;
    if (!nonzero) {
      throw SolverError("solve_linear: matrix row " + std::to_string(row) +
                            " is identically zero (singular system)",
                        1.0);
    }
  }
  const Ilu0 precond(a);

  Vector& x = out.x;
  Vector r = b;
  Vector r_hat = r;
  Vector p = Vector::Zero(b.size()), v = Vector::Zero(b.size());
  Vector p_hat(b.size()), s(b.size()), s_hat(b.size()), t(b.size());
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  bool restart = true;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    out.iterations = it;
    if (restart) {
      // Fresh shadow residual; also the recovery path after a breakdown.
      r = b - a * x;
      r_hat = r;
      p = r;
      rho = r_hat.dot(r);
      restart = false;
    } else {
      const double rho_next = r_hat.dot(r);
      const double beta = (rho_next / rho) * (alpha / omega);
      p = r + beta * (p - omega * v);
      rho = rho_next;
    }
    precond.apply(p, p_hat);
    v = a * p_hat;
    const double denom = r_hat.dot(v);
    if (denom == 0.0 || !std::isfinite(denom)) {
      restart = true;
      continue;
    }
    alpha = rho / denom;
    s = r - alpha * v;
    if (s.norm() / b_norm <= cfg.rel_tol) {
      x += alpha * p_hat;
      if ((b - a * x).norm() / b_norm <= cfg.rel_tol) break;
      restart = true;
      continue;
    }
    precond.apply(s, s_hat);
    t = a * s_hat;
    const double tt = t.squaredNorm();
    omega = tt > 0.0 ? t.dot(s) / tt : 0.0;
    x += alpha * p_hat + omega * s_hat;
    r = s - omega * t;
    if (r.norm() / b_norm <= cfg.rel_tol) {
      if ((b - a * x).norm() / b_norm <= cfg.rel_tol) break;
      restart = true;
      continue;
    }
    if (omega == 0.0 || r_hat.dot(r) == 0.0) restart = true;
  }
  out.rel_residual = (b - a * x).norm() / b_norm;
  if (!std::isfinite(out.rel_residual) || out.rel_residual > cfg.rel_tol) {
    throw SolverError("solve_linear: no convergence after " + std::to_string(out.iterations) +
                          " iterations, relative residual " + std::to_string(out.rel_residual),
                      out.rel_residual);
  }
  return out;
}

inline LinearResult solve_linear(const SparseSystem& system, double rel_tol, int max_iter) {
  return solve_linear(system, LinearConfig{rel_tol, max_iter});
}

}  // namespace sponge

#endif  // SPONGE_LINEAR_SOLVER_HPP
