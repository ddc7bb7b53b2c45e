#ifndef SPONGE_FLOW_HPP
#define SPONGE_FLOW_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sponge/dual.hpp"
#include "sponge/errors.hpp"
#include "sponge/fem.hpp"
#include "sponge/newton.hpp"
#include "sponge/tet_mesh.hpp"

namespace sponge {

struct FluidParams {
  double density = 1000.0;     // kg m^-3
  double viscosity = 5.0e-2;   // Pa s
  double inlet_speed = 0.05;   // m s^-1, along +x
  Vec3 body_force{};           // N m^-3

  friend bool operator==(const FluidParams&, const FluidParams&) = default;
};

struct FlowSolverConfig {
  NewtonConfig newton{.rel_tol = 1e-3, .abs_tol = 1e-14, .max_iter = 100};
  bool viscosity_continuation = true;
};

struct FlowField {
  std::vector<Vec3> velocity;
  std::vector<double> pressure;
  NewtonReport report;
  bool used_continuation = false;
};

namespace flow {

inline constexpr int kDofsPerNode = 4;  // u, v, w, p

/// Fully specified discrete flow problem. The stationary solve below fills
/// this from node classes; tests build it directly.
struct Problem {
  const TetMesh* box = nullptr;
  FluidParams params;
  bool convection = true;
  std::function<Vec3(const Vec3&)> body_force;  // overrides params.body_force when set
  std::vector<char> fixed;                       // per dof
  std::vector<double> fixed_values;              // per dof, read where fixed
};

/// Unknown vector layout: node-interleaved (u, v, w, p).
inline Vector pack(const FlowField& f) {
  Vector x(static_cast<Eigen::Index>(f.velocity.size()) * kDofsPerNode);
  for (std::size_t a = 0; a < f.velocity.size(); ++a) {
    for (int i = 0; i < 3; ++i) x[kDofsPerNode * a + i] = f.velocity[a][i];
    x[kDofsPerNode * a + 3] = f.pressure[a];
  }
  return x;
}

inline void unpack(const Vector& x, FlowField& f) {
  const std::size_t n = static_cast<std::size_t>(x.size()) / kDofsPerNode;
  f.velocity.assign(n, Vec3{});
  f.pressure.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    f.velocity[a] = {x[kDofsPerNode * a], x[kDofsPerNode * a + 1], x[kDofsPerNode * a + 2]};
    f.pressure[a] = x[kDofsPerNode * a + 3];
  }
}

/// SUPG/PSPG stabilization parameter for steady flow.
template <typename T>
T stabilization_tau(const T& speed2, double h, double nu) {
  using std::sqrt;
  const double visc = 4.0 * nu / (h * h);
  return 1.0 / sqrt(4.0 * speed2 / (h * h) + visc * visc);
}

/// Element residual of the stabilized stationary Navier-Stokes equations.
/// `local` holds the 16 element unknowns, node-interleaved.
template <typename T>
std::array<T, 16> element_residual(const Problem& prob, const TetMesh& box, const Tet& tet,
                                   const fem::ElementGeometry& geo,
                                   const std::array<T, 16>& local) {
  const double rho = prob.params.density;
  const double eta = prob.params.viscosity;
  const double nu = eta / rho;
  const auto& dn = geo.grad;

  std::array<std::array<T, 3>, 3> grad_u{};  // grad_u[i][j] = d u_i / d x_j
  std::array<T, 3> grad_p{};
  T p_mean = 0.0;
  std::array<T, 3> u_mean{};
  for (int a = 0; a < 4; ++a) {
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < 3; ++i) grad_u[i][j] += local[4 * a + i] * dn[a][j];
      grad_p[j] += local[4 * a + 3] * dn[a][j];
    }
    for (int i = 0; i < 3; ++i) u_mean[i] += local[4 * a + i] * 0.25;
    p_mean += local[4 * a + 3] * 0.25;
  }
  const T div_u = grad_u[0][0] + grad_u[1][1] + grad_u[2][2];
  T speed2 = 0.0;
  if (prob.convection) {
    for (int i = 0; i < 3; ++i) speed2 += u_mean[i] * u_mean[i];
  }
  const T tau = stabilization_tau(speed2, geo.size, nu);

  std::array<T, 16> r{};
  const double vol = geo.volume;
  for (int a = 0; a < 4; ++a) {
    for (int i = 0; i < 3; ++i) {
      T visc = 0.0;
      for (int j = 0; j < 3; ++j) visc += (grad_u[i][j] + grad_u[j][i]) * dn[a][j];
      r[4 * a + i] += vol * (eta * visc - p_mean * dn[a][i]);
    }
    r[4 * a + 3] += vol * 0.25 * div_u;
  }

  for (const auto& qp : fem::kTetQuadrature) {
    const double w = qp.weight * vol;
    std::array<T, 3> uq{};
    for (int a = 0; a < 4; ++a) {
      for (int i = 0; i < 3; ++i) uq[i] += local[4 * a + i] * qp.bary[a];
    }
    Vec3 force = prob.params.body_force;
    if (prob.body_force) force = prob.body_force(fem::map_point(box, tet, qp.bary));

    std::array<T, 3> conv{};
    if (prob.convection) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) conv[i] += uq[j] * grad_u[i][j];
        conv[i] *= rho;
      }
    }
    std::array<T, 3> strong{};
    for (int i = 0; i < 3; ++i) strong[i] = conv[i] + grad_p[i] - force[i];

    for (int a = 0; a < 4; ++a) {
      T adv_w = 0.0;  // u . grad N_a
      if (prob.convection) {
        for (int j = 0; j < 3; ++j) adv_w += uq[j] * dn[a][j];
      }
      for (int i = 0; i < 3; ++i) {
        r[4 * a + i] += w * ((conv[i] - force[i]) * qp.bary[a] + tau * adv_w * strong[i]);
      }
      T pspg = 0.0;
      for (int i = 0; i < 3; ++i) pspg += dn[a][i] * strong[i];
      r[4 * a + 3] += w * (tau / rho) * pspg;
    }
  }
  return r;
}

/// Global residual; constrained rows read x - prescribed.
inline Vector residual(const Problem& prob, const std::vector<fem::ElementGeometry>& geo,
                       const Vector& x) {
  const TetMesh& box = *prob.box;
  Vector r = Vector::Zero(x.size());
  for (std::size_t e = 0; e < box.num_tets(); ++e) {
    const Tet& t = box.tets[e];
    std::array<double, 16> local{};
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 4; ++c) local[4 * a + c] = x[kDofsPerNode * t[a] + c];
    }
    const auto re = element_residual(prob, box, t, geo[e], local);
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 4; ++c) r[kDofsPerNode * t[a] + c] += re[4 * a + c];
    }
  }
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    if (prob.fixed[d]) r[d] = x[d] - prob.fixed_values[d];
  }
  return r;
}

/// Exact Jacobian of `residual`, element blocks differentiated with dual numbers.
inline SparseMatrix jacobian(const Problem& prob, const std::vector<fem::ElementGeometry>& geo,
                             const SparseMatrix& pattern, const Vector& x) {
  using D = Dual<16>;
  const TetMesh& box = *prob.box;
  SparseMatrix jac = pattern;
  for (std::size_t e = 0; e < box.num_tets(); ++e) {
    const Tet& t = box.tets[e];
    std::array<D, 16> local;
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 4; ++c) {
        local[4 * a + c] = D::variable(x[kDofsPerNode * t[a] + c], 4 * a + c);
      }
    }
    const auto re = element_residual(prob, box, t, geo[e], local);
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 4; ++c) {
        const int row = kDofsPerNode * t[a] + c;
        for (int b = 0; b < 4; ++b) {
          for (int k = 0; k < 4; ++k) {
            jac.coeffRef(row, kDofsPerNode * t[b] + k) += re[4 * a + c].d[4 * b + k];
          }
        }
      }
    }
  }
  fem::identity_rows(jac, prob.fixed);
  return jac;
}

/// Solves a prepared problem by Newton from `initial` (constrained entries are
/// overwritten with their prescribed values first).
inline FlowField solve(const Problem& prob, const NewtonConfig& cfg,
                       const std::optional<FlowField>& initial = std::nullopt) {
  const TetMesh& box = *prob.box;
  const auto geo = fem::element_geometry(box);
  const SparseMatrix pattern = fem::block_pattern(box, kDofsPerNode);
  const Eigen::Index n = static_cast<Eigen::Index>(box.num_nodes()) * kDofsPerNode;
  if (prob.fixed.size() != static_cast<std::size_t>(n) ||
      prob.fixed_values.size() != static_cast<std::size_t>(n)) {
    throw ContractError("flow::solve: constraint arrays do not match the dof count");
  }

  Vector x0 = Vector::Zero(n);
  if (initial && initial->velocity.size() == box.num_nodes()) x0 = pack(*initial);
  for (Eigen::Index d = 0; d < n; ++d) {
    if (prob.fixed[d]) x0[d] = prob.fixed_values[d];
  }

  auto res = newton_solve([&](const Vector& x) { return residual(prob, geo, x); },
                          [&](const Vector& x) { return jacobian(prob, geo, pattern, x); },
                          std::move(x0), cfg);
  // Pin constrained values bitwise.
  for (Eigen::Index d = 0; d < n; ++d) {
    if (prob.fixed[d]) res.x[d] = prob.fixed_values[d];
  }
  FlowField out;
  unpack(res.x, out);
  out.report = std::move(res.report);
  return out;
}

/// Boundary data of the physical problem: inlet velocity, no-slip on the
/// substratum and inside the sponge; do-nothing elsewhere; pressure free.
inline Problem make_problem(const TetMesh& box, std::span<const NodeClass> classes,
                            const FluidParams& params) {
  if (classes.size() != box.num_nodes()) {
    throw ContractError("solve_stationary_flow: node classes do not match the box mesh");
  }
  if (std::none_of(classes.begin(), classes.end(),
                   [](NodeClass c) { return c == NodeClass::outlet; })) {
    throw ContractError("solve_stationary_flow: no outlet node");
  }
  Problem prob;
  prob.box = &box;
  prob.params = params;
  const std::size_t n = box.num_nodes() * kDofsPerNode;
  prob.fixed.assign(n, 0);
  prob.fixed_values.assign(n, 0.0);
  for (std::size_t a = 0; a < box.num_nodes(); ++a) {
    const NodeClass c = classes[a];
    if (c == NodeClass::inlet || c == NodeClass::substratum ||
        c == NodeClass::sponge_interior) {
      for (int i = 0; i < 3; ++i) prob.fixed[kDofsPerNode * a + i] = 1;
      if (c == NodeClass::inlet) prob.fixed_values[kDofsPerNode * a] = params.inlet_speed;
    }
  }
  return prob;
}

/// Continuity rows of the stabilized residual (Galerkin divergence plus the
/// pressure-stabilizing term) at a given field; zero at an exact discrete solution.
inline std::vector<double> weak_divergence(const TetMesh& box, std::span<const NodeClass> classes,
                                           const FluidParams& params, const FlowField& flow) {
  Problem prob = make_problem(box, classes, params);
  const auto geo = fem::element_geometry(box);
  const Vector r = residual(prob, geo, pack(flow));
  std::vector<double> out(box.num_nodes());
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = r[kDofsPerNode * a + 3];
  return out;
}

}  // namespace flow

/// Stationary incompressible Navier-Stokes on the classified box. On Newton
/// failure a single retry first solves at ten times the viscosity and uses
/// that field as the initial guess.
inline FlowField solve_stationary_flow(const TetMesh& box, std::span<const NodeClass> classes,
                                       const FluidParams& params,
                                       const FlowSolverConfig& cfg = {},
                                       const std::optional<FlowField>& initial = std::nullopt) {
  const flow::Problem prob = flow::make_problem(box, classes, params);
  try {
    return flow::solve(prob, cfg.newton, initial);
  } catch (const SolverError&) {
    if (!cfg.viscosity_continuation) throw;
  }
  flow::Problem thick = prob;
  thick.params.viscosity *= 10.0;
  const FlowField guess = flow::solve(thick, cfg.newton, initial);
  FlowField out = flow::solve(prob, cfg.newton, guess);
  out.used_continuation = true;
  return out;
}

}  // namespace sponge

#endif  // SPONGE_FLOW_HPP
