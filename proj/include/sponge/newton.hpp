#ifndef SPONGE_NEWTON_HPP
#define SPONGE_NEWTON_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sponge/errors.hpp"
#include "sponge/linear_solver.hpp"

namespace sponge {

struct NewtonConfig {
  double rel_tol = 1e-3;
  double abs_tol = 1e-14;
  int max_iter = 100;
  int max_halvings = 8;
  LinearConfig linear;
};

struct NewtonReport {
  int iterations = 0;
  int max_linear_iterations = 0;
  std::vector<double> residual_history;  // ||R|| before the first step, then after each
  double final_residual() const { return residual_history.back(); }
  double relative_residual() const {
    return residual_history.front() > 0.0 ? residual_history.back() / residual_history.front()
                                          : 0.0;
  }
};

struct NewtonResult {
  Vector x;
  NewtonReport report;
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<SparseMatrix(const Vector&)>;

/// Damped Newton iteration. Converged when ||R(x)|| <= rel_tol * ||R(x0)|| or
/// ||R(x)|| <= abs_tol. A step that increases the residual is halved up to
/// max_halvings times; the last trial is accepted regardless.
inline NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                                 Vector x0, const NewtonConfig& cfg) {
  NewtonResult out;
  out.x = std::move(x0);
  Vector r = residual(out.x);
  double r_norm = r.norm();
  const double r0 = r_norm;
  out.report.residual_history.push_back(r_norm);
  auto converged = [&](double v) { return v <= cfg.abs_tol || v <= cfg.rel_tol * r0; };
  if (converged(r_norm)) return out;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    SparseSystem step{jacobian(out.x), -r};
    if (step.matrix.rows() != r.size()) {
      throw ContractError("newton_solve: Jacobian and residual dimensions differ");
    }
    const LinearResult lin = solve_linear(step, cfg.linear);
    out.report.max_linear_iterations = std::max(out.report.max_linear_iterations, lin.iterations);

    double lambda = 1.0;
    Vector trial = out.x + lin.x;
    Vector r_trial = residual(trial);
    for (int h = 0; h < cfg.max_halvings && !(r_trial.norm() < r_norm); ++h) {
      lambda *= 0.5;
      trial = out.x + lambda * lin.x;
      r_trial = residual(trial);
    }
    out.x = std::move(trial);
    r = std::move(r_trial);
    r_norm = r.norm();
    out.report.iterations = it;
    out.report.residual_history.push_back(r_norm);
    if (!std::isfinite(r_norm)) break;
    if (converged(r_norm)) return out;
  }
  throw SolverError("newton_solve: no convergence in " + std::to_string(cfg.max_iter) +
                        " iterations (residual " + std::to_string(r_norm) + ", initial " +
                        std::to_string(r0) + ")",
                    r_norm, out.report.residual_history);
}

}  // namespace sponge

#endif  // SPONGE_NEWTON_HPP
