#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "sponge/dual.hpp"
#include "sponge/flow.hpp"
#include "sponge/linear_solver.hpp"
#include "sponge/newton.hpp"

using namespace sponge;

namespace {

SparseMatrix laplacian_1d(int n) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, i, 2.0);
    if (i > 0) trip.emplace_back(i, i - 1, -1.0);
    if (i + 1 < n) trip.emplace_back(i, i + 1, -1.0);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

}  // namespace

TEST(SolveLinear, IdentityInOneIteration) {
  const int n = 20;
  SparseMatrix eye(n, n);
  eye.setIdentity();
  Vector b = Vector::LinSpaced(n, -1.0, 3.0);
  const auto res = solve_linear({eye, b});
  EXPECT_EQ(res.iterations, 1);
  EXPECT_LT((res.x - b).norm(), 1e-14);
}

TEST(SolveLinear, TridiagonalMatchesDenseDirectSolve) {
  const int n = 50;
  const SparseMatrix a = laplacian_1d(n);
  const Vector b = Vector::Ones(n);
  const Eigen::MatrixXd dense(a);
  const Vector oracle = dense.partialPivLu().solve(b);
  const auto res = solve_linear({a, b}, 1e-12, 200);
  EXPECT_LT((res.x - oracle).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveLinear, NonsymmetricSystem) {
  const int n = 60;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, i, 6.0);
    for (int d : {-3, -1, 2, 5}) {
      if (i + d >= 0 && i + d < n) trip.emplace_back(i, i + d, u(rng));
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  Vector b(n);
  for (int i = 0; i < n; ++i) b[i] = u(rng);
  const Vector oracle = Eigen::MatrixXd(a).fullPivLu().solve(b);
  const auto res = solve_linear({a, b}, 1e-12, 200);
  EXPECT_LT((res.x - oracle).norm(), 1e-9);
  EXPECT_LE(res.rel_residual, 1e-12);
}

TEST(SolveLinear, ZeroRowIsReportedAsSingular) {
  SparseMatrix a = laplacian_1d(5);
  for (SparseMatrix::InnerIterator it(a, 2); it; ++it) it.valueRef() = 0.0;
  EXPECT_THROW(solve_linear({a, Vector::Ones(5)}), SolverError);
}

TEST(SolveLinear, IterationCapRaisesWithResidual) {
  const SparseMatrix a = laplacian_1d(400);
  try {
    solve_linear({a, Vector::Ones(400)}, 1e-14, 2);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_GT(e.final_residual(), 1e-14);
  }
}

TEST(ApplyDirichlet, MatchesPenaltyOracle) {
  // Identity-row elimination vs. a large diagonal penalty on the same rows.
  const int n = 30;
  SparseMatrix a = laplacian_1d(n);
  Vector b = Vector::Constant(n, 0.5);
  std::vector<char> fixed(n, 0);
  std::vector<double> values(n, 0.0);
  fixed[0] = fixed[n - 1] = fixed[10] = 1;
  values[0] = 1.0;
  values[n - 1] = -2.0;
  values[10] = 0.25;

  SparseSystem sys{a, b};
  apply_dirichlet(sys, fixed, values);
  for (int r = 0; r < n; ++r) {
    if (!fixed[r]) continue;
    for (SparseMatrix::InnerIterator it(sys.matrix, r); it; ++it) {
      EXPECT_EQ(it.value(), it.col() == r ? 1.0 : 0.0);
    }
    EXPECT_EQ(sys.rhs[r], values[r]);
  }
  const Vector x = solve_linear(sys, 1e-13, 500).x;

  Eigen::MatrixXd pen(a);
  Vector pb = b;
  const double big = 1e12;
  for (int r = 0; r < n; ++r) {
    if (!fixed[r]) continue;
    pen(r, r) += big;
    pb[r] = big * values[r];
  }
  const Vector oracle = pen.partialPivLu().solve(pb);
  EXPECT_LT((x - oracle).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Newton, ScalarQuadratic) {
  NewtonConfig cfg;
  cfg.rel_tol = 1e-14;
  cfg.abs_tol = 1e-12;
  cfg.max_iter = 8;
  auto residual = [](const Vector& x) { return Vector::Constant(1, x[0] * x[0] - 4.0); };
  auto jacobian = [](const Vector& x) {
    SparseMatrix j(1, 1);
    j.insert(0, 0) = 2.0 * x[0];
    return j;
  };
  const auto res = newton_solve(residual, jacobian, Vector::Constant(1, 3.0), cfg);
  EXPECT_NEAR(res.x[0], 2.0, 1e-10);
  EXPECT_LE(res.report.iterations, 8);
  // Quadratic convergence: r_{k+1} / r_k^2 stays bounded (|R| ~ 4|x - 2|).
  const auto& h = res.report.residual_history;
  for (std::size_t k = 0; k + 1 < h.size(); ++k) {
    if (h[k] > 1e-6) EXPECT_LE(h[k + 1] / (h[k] * h[k]), 1.0) << "step " << k;
  }
}

TEST(Newton, LinearResidualConvergesInOneStep) {
  const int n = 40;
  const SparseMatrix a = laplacian_1d(n);
  const Vector b = Vector::LinSpaced(n, 0.0, 1.0);
  NewtonConfig cfg;
  cfg.rel_tol = 1e-6;
  cfg.linear = {1e-10, 200};
  const auto res = newton_solve([&](const Vector& x) { return Vector(a * x - b); },
                                [&](const Vector&) { return a; }, Vector::Zero(n), cfg);
  EXPECT_EQ(res.report.iterations, 1);
}

TEST(Newton, NonConvergenceCarriesHistory) {
  // Residual without a root.
  auto residual = [](const Vector& x) { return Vector::Constant(1, x[0] * x[0] + 1.0); };
  auto jacobian = [](const Vector& x) {
    SparseMatrix j(1, 1);
    j.insert(0, 0) = x[0] == 0.0 ? 1.0 : 2.0 * x[0];
    return j;
  };
  NewtonConfig cfg;
  cfg.max_iter = 5;
  try {
    newton_solve(residual, jacobian, Vector::Constant(1, 1.0), cfg);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.history().size(), 6u);
    EXPECT_GE(e.final_residual(), 1.0);
  }
}

TEST(Dual, DerivativesOfElementaryOperations) {
  using D = Dual<2>;
  const D x = D::variable(1.5, 0);
  const D y = D::variable(-0.5, 1);
  const D f = sqrt(x * x + y * y) / (x - 2.0 * y) + 3.0 * x * y;
  auto fd = [](double a, double b) { return std::sqrt(a * a + b * b) / (a - 2.0 * b) + 3.0 * a * b; };
  const double h = 1e-6;
  EXPECT_NEAR(f.v, fd(1.5, -0.5), 1e-15);
  EXPECT_NEAR(f.d[0], (fd(1.5 + h, -0.5) - fd(1.5 - h, -0.5)) / (2 * h), 1e-8);
  EXPECT_NEAR(f.d[1], (fd(1.5, -0.5 + h) - fd(1.5, -0.5 - h)) / (2 * h), 1e-8);
}

TEST(FlowJacobian, MatchesFiniteDifferences) {
  const TetMesh box = build_box_mesh({{0, 0, 0}, {0.5, 0.5, 0.5}}, 2);
  const auto classes = classify_nodes(box, TriMesh{});
  FluidParams params;
  params.viscosity = 5e-2;
  const flow::Problem prob = flow::make_problem(box, classes, params);
  const auto geo = fem::element_geometry(box);
  const SparseMatrix pattern = fem::block_pattern(box, flow::kDofsPerNode);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  const Eigen::Index n = static_cast<Eigen::Index>(box.num_nodes()) * flow::kDofsPerNode;
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = u(rng);

  const Eigen::MatrixXd jac(flow::jacobian(prob, geo, pattern, x));
  double scale = jac.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vector col = (flow::residual(prob, geo, xp) - flow::residual(prob, geo, xm)) / (2 * h);
    worst = std::max(worst, (col - jac.col(j)).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst / scale, 1e-5);
}
