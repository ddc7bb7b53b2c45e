#ifndef SPONGE_FEM_HPP
#define SPONGE_FEM_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Sparse>

#include "sponge/linear_solver.hpp"
#include "sponge/tet_mesh.hpp"

namespace sponge::fem {

/// Constant P1 data of one tetrahedron.
struct ElementGeometry {
  double volume = 0.0;
  std::array<Vec3, 4> grad;  // gradients of the barycentric shape functions
  double size = 0.0;         // diameter of the volume-equivalent sphere
};

inline std::vector<ElementGeometry> element_geometry(const TetMesh& mesh) {
  std::vector<ElementGeometry> out(mesh.num_tets());
  for (std::size_t e = 0; e < mesh.num_tets(); ++e) {
    const Tet& t = mesh.tets[e];
    const Vec3& x0 = mesh.nodes[t[0]];
    const Vec3 e1 = mesh.nodes[t[1]] - x0;
    const Vec3 e2 = mesh.nodes[t[2]] - x0;
    const Vec3 e3 = mesh.nodes[t[3]] - x0;
    const double det = dot(e1, cross(e2, e3));
    ElementGeometry& g = out[e];
    g.volume = det / 6.0;
    // Rows of the inverse Jacobian give grad N1..N3.
    g.grad[1] = cross(e2, e3) / det;
    g.grad[2] = cross(e3, e1) / det;
    g.grad[3] = cross(e1, e2) / det;
    g.grad[0] = -(g.grad[1] + g.grad[2] + g.grad[3]);
    g.size = 2.0 * std::cbrt(3.0 * g.volume / (4.0 * std::numbers::pi));
  }
  return out;
}

/// Degree-2 four-point rule in barycentric coordinates; weights sum to 1.
struct QuadraturePoint {
  std::array<double, 4> bary;
  double weight;
};

inline constexpr double kQa = 0.5854101966249685;
inline constexpr double kQb = 0.1381966011250105;
inline constexpr std::array<QuadraturePoint, 4> kTetQuadrature = {{
    {{kQa, kQb, kQb, kQb}, 0.25},
    {{kQb, kQa, kQb, kQb}, 0.25},
    {{kQb, kQb, kQa, kQb}, 0.25},
    {{kQb, kQb, kQb, kQa}, 0.25},
}};

inline Vec3 map_point(const TetMesh& mesh, const Tet& t, const std::array<double, 4>& bary) {
  Vec3 p;
  for (int a = 0; a < 4; ++a) p += bary[a] * mesh.nodes[t[a]];
  return p;
}

/// Zero-valued matrix with dense `block` x `block` couplings between every
/// pair of nodes sharing a tetrahedron.
inline SparseMatrix block_pattern(const TetMesh& mesh, int block) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.num_tets() * 16 * block * block);
  for (const Tet& t : mesh.tets) {
    for (int a : t) {
      for (int b : t) {
        for (int i = 0; i < block; ++i) {
          for (int j = 0; j < block; ++j) trip.emplace_back(block * a + i, block * b + j, 0.0);
        }
      }
    }
  }
  const int n = static_cast<int>(mesh.num_nodes()) * block;
  SparseMatrix m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

/// Turns constrained rows into identity rows.
inline void identity_rows(SparseMatrix& m, const std::vector<char>& fixed) {
  for (int row = 0; row < m.outerSize(); ++row) {
    if (!fixed[row]) continue;
    for (SparseMatrix::InnerIterator it(m, row); it; ++it) {
      it.valueRef() = it.col() == row ? 1.0 : 0.0;
    }
  }
}

}  // namespace sponge::fem

#endif  // SPONGE_FEM_HPP
