#ifndef SPONGE_TET_MESH_HPP
#define SPONGE_TET_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sponge/errors.hpp"
#include "sponge/tri_mesh.hpp"
#include "sponge/vec3.hpp"

namespace sponge {

using Tet = std::array<int, 4>;

enum class FaceTag : std::uint8_t { inlet, outlet, substratum, open_wall };

struct BoundaryFace {
  std::array<int, 3> nodes;
  int tet;
  FaceTag tag;
};

/// Structured tetrahedral box: n^3 cubes, six Kuhn tetrahedra per cube.
/// Cube (i,j,k) owns tets [6c, 6c+6) with c = i + n*(j + n*k).
struct TetMesh {
  Box domain;
  int cells_per_axis = 0;
  Vec3 spacing;
  std::vector<Vec3> nodes;
  std::vector<Tet> tets;
  std::vector<BoundaryFace> boundary_faces;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_tets() const { return tets.size(); }

  int node_index(int i, int j, int k) const {
    const int m = cells_per_axis + 1;
    return i + m * (j + m * k);
  }
  double min_spacing() const { return std::min({spacing.x, spacing.y, spacing.z}); }
};

inline double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(b - a, cross(c - a, d - a)) / 6.0;
}

inline double tet_volume(const TetMesh& mesh, const Tet& t) {
  return signed_volume(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]]);
}

inline constexpr std::size_t kDefaultNodeBudget = 4'000'000;

/// Box mesh at the given resolution; n = 2^(resolution-1) cubes per axis.
inline TetMesh build_box_mesh(const Box& domain, int resolution,
                              std::size_t node_budget = kDefaultNodeBudget) {
  if (resolution < 1) throw ContractError("build_box_mesh: resolution must be >= 1");
  if (resolution > 21) throw CapacityError("build_box_mesh: resolution too large");
  const int n = 1 << (resolution - 1);
  const std::size_t m = static_cast<std::size_t>(n) + 1;
  if (m * m * m > node_budget) {
    throw CapacityError("build_box_mesh: resolution " + std::to_string(resolution) +
                        " needs " + std::to_string(m * m * m) + " nodes, budget is " +
                        std::to_string(node_budget));
  }

  TetMesh mesh;
  mesh.domain = domain;
  mesh.cells_per_axis = n;
  const Vec3 ext = domain.extent();
  mesh.spacing = ext / static_cast<double>(n);
  mesh.nodes.reserve(m * m * m);
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        // Snap the far face exactly onto the domain bound.
        auto coord = [n](int idx, double lo, double hi, double h) {
          return idx == n ? hi : lo + idx * h;
        };
        mesh.nodes.push_back({coord(i, domain.lo.x, domain.hi.x, mesh.spacing.x),
                              coord(j, domain.lo.y, domain.hi.y, mesh.spacing.y),
                              coord(k, domain.lo.z, domain.hi.z, mesh.spacing.z)});
      }
    }
  }

  // Kuhn split: one tet per axis permutation along the (0,0,0)-(1,1,1) diagonal.
  static constexpr std::array<std::array<int, 3>, 6> kPerms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  mesh.tets.reserve(6 * static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        auto corner = [&](int bits) {
          return mesh.node_index(i + (bits & 1), j + ((bits >> 1) & 1), k + ((bits >> 2) & 1));
        };
        for (const auto& perm : kPerms) {
          const int b1 = 1 << perm[0];
          const int b2 = b1 | (1 << perm[1]);
          Tet t{corner(0), corner(b1), corner(b2), corner(7)};
          if (tet_volume(mesh, t) < 0.0) std::swap(t[2], t[3]);
          mesh.tets.push_back(t);
        }
      }
    }
  }

  // Faces whose three nodes share a box plane lie on the boundary.
  static constexpr std::array<std::array<int, 3>, 4> kFaces = {
      {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};
  auto plane_mask = [&](int node) {
    const int m1 = n + 1;
    const int i = node % m1, j = (node / m1) % m1, k = node / (m1 * m1);
    unsigned mask = 0;
    if (i == 0) mask |= 1u << 0;  // min x
    if (i == n) mask |= 1u << 1;  // max x
    if (j == 0) mask |= 1u << 2;
    if (j == n) mask |= 1u << 3;
    if (k == 0) mask |= 1u << 4;  // min z
    if (k == n) mask |= 1u << 5;
    return mask;
  };
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    for (const auto& f : kFaces) {
      const std::array<int, 3> nodes = {mesh.tets[t][f[0]], mesh.tets[t][f[1]],
                                        mesh.tets[t][f[2]]};
      const unsigned common = plane_mask(nodes[0]) & plane_mask(nodes[1]) & plane_mask(nodes[2]);
      if (common == 0) continue;
      FaceTag tag = FaceTag::open_wall;
      if (common & (1u << 0)) tag = FaceTag::inlet;
      else if (common & (1u << 1)) tag = FaceTag::outlet;
      else if (common & (1u << 4)) tag = FaceTag::substratum;
      mesh.boundary_faces.push_back({nodes, static_cast<int>(t), tag});
    }
  }
  return mesh;
}

enum class NodeClass : std::uint8_t {
  fluid,
  inlet,
  outlet,
  substratum,
  open_wall,
  sponge_interior
};

inline const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::fluid: return "fluid";
    case NodeClass::inlet: return "inlet";
    case NodeClass::outlet: return "outlet";
    case NodeClass::substratum: return "substratum";
    case NodeClass::open_wall: return "open_wall";
    case NodeClass::sponge_interior: return "sponge_interior";
  }
  return "?";
}

/// Labels every box node. Precedence:
/// sponge_interior > substratum > inlet > outlet > open_wall > fluid.
/// Nodes within `snap_fraction` grid spacings of the sponge surface count as
/// sponge interior.
inline std::vector<NodeClass> classify_nodes(const TetMesh& box, const TriMesh& sponge,
                                             double snap_fraction = 0.25) {
  const int n = box.cells_per_axis;
  const int m = n + 1;
  std::vector<NodeClass> classes(box.num_nodes(), NodeClass::fluid);
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        NodeClass c = NodeClass::fluid;
        if (k == 0) c = NodeClass::substratum;
        else if (i == 0) c = NodeClass::inlet;
        else if (i == n) c = NodeClass::outlet;
        else if (j == 0 || j == n || k == n) c = NodeClass::open_wall;
        classes[i + m * (j + m * k)] = c;
      }
    }
  }
  if (sponge.empty()) return classes;

  const Box bb = bounding_box(sponge);
  const double tol = 1e-9 * norm(box.domain.extent());
  if (!box.domain.contains(bb.lo, tol) || !box.domain.contains(bb.hi, tol)) {
    throw DomainError("classify_nodes: sponge mesh extends outside the simulation box");
  }
  const double snap = snap_fraction * box.min_spacing();
  for (std::size_t a = 0; a < box.num_nodes(); ++a) {
    const Vec3& p = box.nodes[a];
    if (p.x < bb.lo.x - snap || p.x > bb.hi.x + snap || p.y < bb.lo.y - snap ||
        p.y > bb.hi.y + snap || p.z < bb.lo.z - snap || p.z > bb.hi.z + snap) {
      continue;
    }
    if (point_inside(sponge, p) || distance_to_surface(sponge, p) <= snap) {
      classes[a] = NodeClass::sponge_interior;
    }
  }
  return classes;
}

/// Containing tetrahedron and barycentric weights of a point.
struct TetLocation {
  int tet = -1;
  std::array<double, 4> weights{};
  int node = -1;  // set when the point coincides with a grid node
};

inline std::array<double, 4> barycentric(const Vec3& a, const Vec3& b, const Vec3& c,
                                         const Vec3& d, const Vec3& p) {
  const double vol = signed_volume(a, b, c, d);
  const double wa = signed_volume(p, b, c, d) / vol;
  const double wb = signed_volume(a, p, c, d) / vol;
  const double wc = signed_volume(a, b, p, d) / vol;
  return {wa, wb, wc, 1.0 - wa - wb - wc};
}

/// Locates p (clamped into the domain first) by cell hashing then a barycentric test.
inline TetLocation locate(const TetMesh& box, const Vec3& point) {
  const Vec3 p = box.domain.clamp(point);
  const int n = box.cells_per_axis;
  std::array<int, 3> cell{};
  bool on_node = true;
  std::array<int, 3> node_idx{};
  for (int ax = 0; ax < 3; ++ax) {
    const double s = (p[ax] - box.domain.lo[ax]) / box.spacing[ax];
    const double r = std::round(s);
    if (std::abs(s - r) <= 1e-12 * std::max(1.0, std::abs(s))) {
      node_idx[ax] = static_cast<int>(r);
    } else {
      on_node = false;
    }
    cell[ax] = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
  }
  TetLocation loc;
  if (on_node) loc.node = box.node_index(node_idx[0], node_idx[1], node_idx[2]);

  const int c = cell[0] + n * (cell[1] + n * cell[2]);
  double best = -std::numeric_limits<double>::infinity();
  for (int t = 6 * c; t < 6 * c + 6; ++t) {
    const Tet& tet = box.tets[t];
    const auto w = barycentric(box.nodes[tet[0]], box.nodes[tet[1]], box.nodes[tet[2]],
                               box.nodes[tet[3]], p);
    const double lo = std::min({w[0], w[1], w[2], w[3]});
    if (lo > best) {
      best = lo;
      loc.tet = t;
      loc.weights = w;
    }
  }
  return loc;
}

template <typename T>
T interpolate(const TetMesh& box, const TetLocation& loc, std::span<const T> field) {
  if (loc.node >= 0) return field[loc.node];
  const Tet& tet = box.tets[loc.tet];
  T out = field[tet[0]] * loc.weights[0];
  for (int k = 1; k < 4; ++k) out += field[tet[k]] * loc.weights[k];
  return out;
}

/// P1 interpolation of a nodal field at p; points outside the domain are clamped.
template <typename T>
T probe(const TetMesh& box, std::span<const T> field, const Vec3& p) {
  if (field.size() != box.num_nodes()) {
    throw ContractError("probe: field length does not match node count");
  }
  return interpolate(box, locate(box, p), field);
}

template <typename T>
T probe(const TetMesh& box, const std::vector<T>& field, const Vec3& p) {
  return probe(box, std::span<const T>(field), p);
}

}  // namespace sponge

#endif  // SPONGE_TET_MESH_HPP
