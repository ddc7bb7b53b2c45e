// Shared fixtures for the unit tests and the acceptance run.
#ifndef SPONGE_TESTS_SUPPORT_HPP
#define SPONGE_TESTS_SUPPORT_HPP

#include <cmath>
#include <numbers>
#include <vector>

#include "sponge/flow.hpp"
#include "sponge/growth.hpp"
#include "sponge/transport.hpp"

namespace sponge::fixtures {

// Stokes manufactured solution on the unit cube: u = (k sin(pi z), 0, 0),
// p = 0, forced by f = (eta pi^2 k sin(pi z), 0, 0). Velocity is prescribed
// on every boundary node and the pressure is pinned at node 0.
struct MmsResult {
  double l2_error = 0.0;
  NewtonReport report;
};

inline MmsResult stokes_mms(int resolution) {
  constexpr double kAmp = 0.05;
  const double pi = std::numbers::pi;
  const TetMesh box = build_box_mesh({{0, 0, 0}, {1, 1, 1}}, resolution);
  auto exact = [&](const Vec3& p) { return Vec3{kAmp * std::sin(pi * p.z), 0.0, 0.0}; };

  flow::Problem prob;
  prob.box = &box;
  prob.params.density = 1000.0;
  prob.params.viscosity = 5e-2;
  prob.convection = false;
  const double eta = prob.params.viscosity;
  prob.body_force = [&](const Vec3& p) {
    return Vec3{eta * pi * pi * kAmp * std::sin(pi * p.z), 0.0, 0.0};
  };
  const std::size_t dofs = box.num_nodes() * flow::kDofsPerNode;
  prob.fixed.assign(dofs, 0);
  prob.fixed_values.assign(dofs, 0.0);
  const int n = box.cells_per_axis;
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        if (i != 0 && i != n && j != 0 && j != n && k != 0 && k != n) continue;
        const int a = box.node_index(i, j, k);
        const Vec3 u = exact(box.nodes[a]);
        for (int c = 0; c < 3; ++c) {
          prob.fixed[flow::kDofsPerNode * a + c] = 1;
          prob.fixed_values[flow::kDofsPerNode * a + c] = u[c];
        }
      }
    }
  }
  prob.fixed[3] = 1;

  NewtonConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.linear = {1e-12, 1000};
  const FlowField f = flow::solve(prob, cfg);

  // L2 error: the 4-point rule applied on the four corner sub-tetrahedra and,
  // shrunk about the centroid, on the central octahedron.
  double err2 = 0.0;
  const auto geo = fem::element_geometry(box);
  for (std::size_t e = 0; e < box.num_tets(); ++e) {
    const Tet& t = box.tets[e];
    for (const auto& qp : fem::kTetQuadrature) {
      for (int corner = 0; corner < 4; ++corner) {
        std::array<double, 4> bary{};
        for (int a = 0; a < 4; ++a) bary[a] = 0.5 * qp.bary[a] + (a == corner ? 0.5 : 0.0);
        Vec3 uh;
        for (int a = 0; a < 4; ++a) uh += bary[a] * f.velocity[t[a]];
        const Vec3 d = uh - exact(fem::map_point(box, t, bary));
        err2 += 0.125 * qp.weight * geo[e].volume * norm2(d);
      }
      std::array<double, 4> bary{};
      for (int a = 0; a < 4; ++a) bary[a] = 0.5 * qp.bary[a] + 0.125;
      Vec3 uh;
      for (int a = 0; a < 4; ++a) uh += bary[a] * f.velocity[t[a]];
      err2 += 0.5 * qp.weight * geo[e].volume *
              norm2(uh - exact(fem::map_point(box, t, bary)));
    }
  }
  return {std::sqrt(err2), f.report};
}

// Steady 1D advection-diffusion along x on the unit cube: c = 1 at x = 0,
// c = 0 at x = 1. With `lateral_profile` the y and z faces carry the 1D
// profile, so the discrete problem is one-dimensional; otherwise they get the
// natural condition. Returns the nodal L-infinity error.
inline double pe10_profile_error(int resolution, bool lateral_profile = true,
                                 bool monotone = true) {
  const double pe = 10.0;
  const double u = 0.05;
  const double diff = u / pe;
  auto exact = [pe](double x) { return (std::exp(pe * x) - std::exp(pe)) / (1.0 - std::exp(pe)); };
  const TetMesh box = build_box_mesh({{0, 0, 0}, {1, 1, 1}}, resolution);
  std::vector<Vec3> vel(box.num_nodes(), Vec3{u, 0, 0});
  transport::Problem prob;
  prob.box = &box;
  prob.velocity = vel;
  prob.diffusivity = diff;
  prob.monotone = monotone;
  prob.fixed.assign(box.num_nodes(), 0);
  prob.fixed_values.assign(box.num_nodes(), 0.0);
  for (std::size_t a = 0; a < box.num_nodes(); ++a) {
    const Vec3& p = box.nodes[a];
    const bool lateral = p.y == 0.0 || p.y == 1.0 || p.z == 0.0 || p.z == 1.0;
    if (p.x == 0.0 || p.x == 1.0 || (lateral_profile && lateral)) {
      prob.fixed[a] = 1;
      prob.fixed_values[a] = p.x == 0.0 ? 1.0 : p.x == 1.0 ? 0.0 : exact(p.x);
    }
  }
  NewtonConfig cfg;
  cfg.rel_tol = 1e-10;
  const auto c = transport::solve(prob, cfg).concentration;
  double worst = 0.0;
  for (std::size_t a = 0; a < box.num_nodes(); ++a) {
    worst = std::max(worst, std::abs(c[a] - exact(box.nodes[a].x)));
  }
  return worst;
}

// Pure diffusion between c = 0 on the substratum and c = 1 on the top wall;
// returns the largest deviation from z / Lz.
inline double linear_diffusion_error(int resolution) {
  const Box domain{{0, 0, 0}, {0.5, 0.5, 0.5}};
  const TetMesh box = build_box_mesh(domain, resolution);
  std::vector<Vec3> vel(box.num_nodes());
  transport::Problem prob;
  prob.box = &box;
  prob.velocity = vel;
  prob.diffusivity = 1e-6;
  prob.fixed.assign(box.num_nodes(), 0);
  prob.fixed_values.assign(box.num_nodes(), 0.0);
  for (std::size_t a = 0; a < box.num_nodes(); ++a) {
    const double z = box.nodes[a].z;
    if (z == 0.0 || z == 0.5) {
      prob.fixed[a] = 1;
      prob.fixed_values[a] = z == 0.0 ? 0.0 : 1.0;
    }
  }
  NewtonConfig cfg;
  cfg.rel_tol = 1e-13;
  const auto c = transport::solve(prob, cfg).concentration;
  double worst = 0.0;
  for (std::size_t a = 0; a < box.num_nodes(); ++a) {
    worst = std::max(worst, std::abs(c[a] - box.nodes[a].z / 0.5));
  }
  return worst;
}

// Straight-line transcription of the two translocation sweeps, with a flag
// recording whether any write had to be clamped.
struct TranslocationReference {
  std::vector<double> c;
  bool clamped = false;
};

inline TranslocationReference reference_translocate(const std::vector<std::vector<int>>& nbrs,
                                                    std::vector<double> c, double t_give) {
  TranslocationReference out;
  auto give = [&](int x) {
    const double amount = t_give * c[x];
    for (int y : nbrs[x]) {
      const double v = c[y] + amount;
      if (v > 1.0 || v < 0.0) out.clamped = true;
      c[y] = std::min(1.0, std::max(0.0, v));
    }
    const double v = c[x] - amount * static_cast<double>(nbrs[x].size());
    if (v > 1.0 || v < 0.0) out.clamped = true;
    c[x] = std::min(1.0, std::max(0.0, v));
  };
  for (std::size_t x = 0; x < c.size(); ++x) give(static_cast<int>(x));
  for (std::size_t x = 0; x < c.size(); ++x) {
    for (int y : nbrs[x]) give(y);
  }
  out.c = c;
  return out;
}

}  // namespace sponge::fixtures

#endif  // SPONGE_TESTS_SUPPORT_HPP
