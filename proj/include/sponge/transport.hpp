#ifndef SPONGE_TRANSPORT_HPP
#define SPONGE_TRANSPORT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "sponge/errors.hpp"
#include "sponge/fem.hpp"
#include "sponge/flow.hpp"
#include "sponge/newton.hpp"
#include "sponge/tet_mesh.hpp"

namespace sponge {

struct TransportParams {
  double diffusivity = 1e-6;       // m^2 s^-1
  double wall_concentration = 1.0;  // mol m^-3

  friend bool operator==(const TransportParams&, const TransportParams&) = default;
};

struct TransportSolverConfig {
  NewtonConfig newton{.rel_tol = 1e-6, .abs_tol = 1e-14, .max_iter = 25};
};

struct ConcentrationField {
  std::vector<double> concentration;
  NewtonReport report;
};

namespace transport {

/// Steady advection-diffusion problem with nodal Dirichlet data; unconstrained
/// boundary nodes get the natural zero-diffusive-flux condition.
struct Problem {
  const TetMesh* box = nullptr;
  std::span<const Vec3> velocity;  // nodal, probed at quadrature points
  double diffusivity = 1e-6;
  std::vector<char> fixed;
  std::vector<double> fixed_values;
  bool monotone = true;  // algebraic upwinding in advection-dominated elements
};

/// Element-level algebraic upwinding: adds the smallest symmetric edge
/// diffusion d_ab = max(0, k_ab, k_ba) that leaves the element's off-diagonals
/// non-positive, scaled by `weight`. Row sums are unchanged.
inline void upwind_element(std::array<std::array<double, 4>, 4>& ke, double weight) {
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      const double d = weight * std::max({0.0, ke[a][b], ke[b][a]});
      ke[a][b] -= d;
      ke[b][a] -= d;
      ke[a][a] += d;
      ke[b][b] += d;
    }
  }
}

/// Upwinding weight from the element Peclet number |u| h / (2 D): off below 1,
/// full from 2 on.
inline double upwind_weight(double peclet) { return std::clamp(peclet - 1.0, 0.0, 1.0); }

/// Galerkin plus SUPG operator. The SUPG parameter uses the element-mean speed.
inline SparseMatrix assemble(const Problem& prob) {
  const TetMesh& box = *prob.box;
  const auto geo = fem::element_geometry(box);
  SparseMatrix k = fem::block_pattern(box, 1);
  const double dcoef = prob.diffusivity;
  for (std::size_t e = 0; e < box.num_tets(); ++e) {
    const Tet& t = box.tets[e];
    const auto& g = geo[e];
    std::array<Vec3, 4> uq;
    Vec3 u_mean;
    for (std::size_t q = 0; q < fem::kTetQuadrature.size(); ++q) {
      uq[q] = probe(box, prob.velocity, fem::map_point(box, t, fem::kTetQuadrature[q].bary));
      u_mean += 0.25 * uq[q];
    }
    // Streamwise element length; the volume-equivalent size when at rest.
    double h = g.size;
    const double speed = norm(u_mean);
    if (speed > 0.0) {
      double proj = 0.0;
      for (int a = 0; a < 4; ++a) proj += std::abs(dot(u_mean, g.grad[a]));
      if (proj > 0.0) h = 2.0 * speed / proj;
    }
    const double diff_term = 4.0 * dcoef / (h * h);
    const double tau =
        1.0 / std::sqrt(4.0 * norm2(u_mean) / (h * h) + 9.0 * diff_term * diff_term);

    std::array<std::array<double, 4>, 4> ke{};
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) ke[a][b] = g.volume * dcoef * dot(g.grad[a], g.grad[b]);
    }
    for (std::size_t q = 0; q < fem::kTetQuadrature.size(); ++q) {
      const auto& qp = fem::kTetQuadrature[q];
      const double w = qp.weight * g.volume;
      std::array<double, 4> adv{};
      for (int a = 0; a < 4; ++a) adv[a] = dot(uq[q], g.grad[a]);
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) ke[a][b] += w * (qp.bary[a] + tau * adv[a]) * adv[b];
      }
    }
    if (prob.monotone) upwind_element(ke, upwind_weight(speed * h / (2.0 * dcoef)));
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) k.coeffRef(t[a], t[b]) += ke[a][b];
    }
  }
  return k;
}

inline ConcentrationField solve(const Problem& prob, const NewtonConfig& cfg) {
  const TetMesh& box = *prob.box;
  const std::size_t n = box.num_nodes();
  if (prob.velocity.size() != n || prob.fixed.size() != n || prob.fixed_values.size() != n) {
    throw ContractError("transport::solve: field sizes do not match the box mesh");
  }
  const SparseMatrix k = assemble(prob);
  SparseMatrix jac = k;
  fem::identity_rows(jac, prob.fixed);

  auto residual = [&](const Vector& c) {
    Vector r = k * c;
    for (std::size_t a = 0; a < n; ++a) {
      if (prob.fixed[a]) r[a] = c[a] - prob.fixed_values[a];
    }
    return r;
  };
  Vector c0 = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    if (prob.fixed[a]) c0[a] = prob.fixed_values[a];
  }
  auto res = newton_solve(residual, [&](const Vector&) { return jac; }, std::move(c0), cfg);

  ConcentrationField out;
  out.concentration.assign(res.x.data(), res.x.data() + n);
  for (std::size_t a = 0; a < n; ++a) {
    if (prob.fixed[a]) out.concentration[a] = prob.fixed_values[a];
  }
  out.report = std::move(res.report);
  return out;
}

}  // namespace transport

/// Steady nutrient field: c_wall on inlet and open walls, zero on the
/// substratum and inside the sponge, natural outflow on the outlet.
inline ConcentrationField solve_nutrient(const TetMesh& box, std::span<const NodeClass> classes,
                                         const FlowField& flow, const TransportParams& params,
                                         const TransportSolverConfig& cfg = {}) {
  if (classes.size() != box.num_nodes() || flow.velocity.size() != box.num_nodes()) {
    throw ContractError("solve_nutrient: flow or classes do not match the box mesh");
  }
  transport::Problem prob;
  prob.box = &box;
  prob.velocity = flow.velocity;
  prob.diffusivity = params.diffusivity;
  prob.fixed.assign(box.num_nodes(), 0);
  prob.fixed_values.assign(box.num_nodes(), 0.0);
  for (std::size_t a = 0; a < box.num_nodes(); ++a) {
    switch (classes[a]) {
      case NodeClass::inlet:
      case NodeClass::open_wall:
        prob.fixed[a] = 1;
        prob.fixed_values[a] = params.wall_concentration;
        break;
      case NodeClass::substratum:
      case NodeClass::sponge_interior:
        prob.fixed[a] = 1;
        break;
      case NodeClass::outlet:
      case NodeClass::fluid:
        break;
    }
  }
  return transport::solve(prob, cfg.newton);
}

}  // namespace sponge

#endif  // SPONGE_TRANSPORT_HPP
