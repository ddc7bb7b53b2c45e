#ifndef SPONGE_TRI_MESH_HPP
#define SPONGE_TRI_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "sponge/errors.hpp"
#include "sponge/vec3.hpp"

namespace sponge {

using Triangle = std::array<int, 3>;
using Edge = std::pair<int, int>;  // always (min, max)

/// Oriented triangle surface. Counter-clockwise triangles seen from outside.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  bool empty() const { return triangles.empty(); }

  friend bool operator==(const TriMesh&, const TriMesh&) = default;
};

inline Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// Sorted unique undirected edges.
inline std::vector<Edge> unique_edges(const TriMesh& mesh) {
  std::vector<Edge> edges;
  edges.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) edges.push_back(make_edge(t[k], t[(k + 1) % 3]));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

/// Per-vertex neighbor lists, ascending.
inline std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh) {
  std::vector<std::vector<int>> nbrs(mesh.vertices.size());
  for (const auto& [a, b] : unique_edges(mesh)) {
    nbrs[a].push_back(b);
    nbrs[b].push_back(a);
  }
  for (auto& n : nbrs) std::sort(n.begin(), n.end());
  return nbrs;
}

/// Per-vertex incident triangle indices, ascending.
inline std::vector<std::vector<int>> incident_triangles(const TriMesh& mesh) {
  std::vector<std::vector<int>> inc(mesh.vertices.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t]) inc[v].push_back(static_cast<int>(t));
  }
  return inc;
}

/// Unnormalized face normal; its length is twice the triangle area.
inline Vec3 face_area_normal(const TriMesh& mesh, const Triangle& t) {
  const Vec3& a = mesh.vertices[t[0]];
  return cross(mesh.vertices[t[1]] - a, mesh.vertices[t[2]] - a);
}

inline double triangle_area(const TriMesh& mesh, const Triangle& t) {
  return 0.5 * norm(face_area_normal(mesh, t));
}

inline TriMesh translated(TriMesh mesh, const Vec3& offset) {
  for (auto& v : mesh.vertices) v += offset;
  return mesh;
}

/// Icosahedron subdivided `subdivisions` times, projected onto the sphere.
inline TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center = {}) {
  if (!(radius > 0.0)) throw ContractError("make_icosphere: radius must be positive");
  if (subdivisions < 0) throw ContractError("make_icosphere: subdivisions must be >= 0");

  const double phi = std::numbers::phi;
  TriMesh mesh;
  mesh.vertices = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                   {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                   {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : mesh.vertices) v = normalize(v);
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                    {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                    {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                    {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<Edge, int> midpoint;
    auto mid = [&](int a, int b) {
      const Edge e = make_edge(a, b);
      if (auto it = midpoint.find(e); it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(normalize(mesh.vertices[a] + mesh.vertices[b]));
      midpoint.emplace(e, idx);
      return idx;
    };
    std::vector<Triangle> next;
    next.reserve(mesh.triangles.size() * 4);
    for (const auto& [a, b, c] : mesh.triangles) {
      const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(next);
  }
  for (auto& v : mesh.vertices) v = center + radius * v;
  return mesh;
}

/// Area-weighted vertex normals. Zero-area faces are skipped; a vertex whose
/// incident faces are all degenerate is a mesh-quality error.
inline std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
  std::vector<Vec3> acc(mesh.vertices.size());
  std::vector<char> touched(mesh.vertices.size(), 0);
  for (const auto& t : mesh.triangles) {
    const Vec3 n = face_area_normal(mesh, t);
    if (norm2(n) == 0.0) continue;
    for (int v : t) {
      acc[v] += n;
      touched[v] = 1;
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double len = norm(acc[i]);
    if (!touched[i] || !(len > 0.0)) {
      throw MeshError("vertex_normals: vertex " + std::to_string(i) +
                      " has no non-degenerate incident face");
    }
    acc[i] /= len;
  }
  return acc;
}

/// Mean length over unique edges.
inline double mean_edge_length(const TriMesh& mesh) {
  const auto edges = unique_edges(mesh);
  if (edges.empty()) throw ContractError("mean_edge_length: mesh has no edges");
  double sum = 0.0;
  for (const auto& [a, b] : edges) sum += distance(mesh.vertices[a], mesh.vertices[b]);
  return sum / static_cast<double>(edges.size());
}

/// Signed enclosed volume of a closed, outward-oriented mesh (divergence theorem).
inline double enclosed_volume(const TriMesh& mesh) {
  double v = 0.0;
  for (const auto& [a, b, c] : mesh.triangles) {
    v += dot(mesh.vertices[a], cross(mesh.vertices[b], mesh.vertices[c]));
  }
  return v / 6.0;
}

inline Vec3 vertex_centroid(const TriMesh& mesh) {
  Vec3 c;
  for (const auto& v : mesh.vertices) c += v;
  return mesh.vertices.empty() ? c : c / static_cast<double>(mesh.vertices.size());
}

inline Box bounding_box(const TriMesh& mesh) {
  Box b{mesh.vertices.front(), mesh.vertices.front()};
  for (const auto& v : mesh.vertices) {
    b.lo = {std::min(b.lo.x, v.x), std::min(b.lo.y, v.y), std::min(b.lo.z, v.z)};
    b.hi = {std::max(b.hi.x, v.x), std::max(b.hi.y, v.y), std::max(b.hi.z, v.z)};
  }
  return b;
}

/// Closest point on triangle abc to p.
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                      const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

/// Unsigned distance from p to the surface.
inline double distance_to_surface(const TriMesh& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [a, b, c] : mesh.triangles) {
    const Vec3 q = closest_point_on_triangle(p, mesh.vertices[a], mesh.vertices[b],
                                             mesh.vertices[c]);
    best = std::min(best, norm2(p - q));
  }
  return std::sqrt(best);
}

namespace detail {

enum class RayHit { miss, hit, degenerate };

// Moller-Trumbore; hits grazing an edge or vertex are reported as degenerate.
inline RayHit ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                           const Vec3& b, const Vec3& c) {
  constexpr double kEdgeEps = 1e-10;
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 pv = cross(dir, e2);
  const double det = dot(e1, pv);
  const double scale = norm(e1) * norm(e2);
  if (std::abs(det) <= 1e-14 * scale) {
    // Ray parallel to the plane; only a problem if it lies in it.
    const Vec3 n = cross(e1, e2);
    const double n_len = norm(n);
    if (n_len == 0.0) return RayHit::miss;
    return std::abs(dot(origin - a, n)) / n_len <= 1e-12 ? RayHit::degenerate : RayHit::miss;
  }
  const double inv = 1.0 / det;
  const Vec3 tv = origin - a;
  const double u = dot(tv, pv) * inv;
  if (u < -kEdgeEps || u > 1.0 + kEdgeEps) return RayHit::miss;
  const Vec3 qv = cross(tv, e1);
  const double v = dot(dir, qv) * inv;
  if (v < -kEdgeEps || u + v > 1.0 + kEdgeEps) return RayHit::miss;
  const double t = dot(e2, qv) * inv;
  if (t < 0.0) return RayHit::miss;
  if (u < kEdgeEps || v < kEdgeEps || u + v > 1.0 - kEdgeEps) return RayHit::degenerate;
  return RayHit::hit;
}

}  // namespace detail

/// Ray-parity containment test. Points within ~1e-12 of the surface may be
/// reported either way. Degenerate ray hits (edge, vertex, in-plane) trigger
/// a retry along a perturbed deterministic direction.
inline bool point_inside(const TriMesh& mesh, const Vec3& p) {
  if (mesh.triangles.empty()) return false;
  static constexpr std::array<Vec3, 8> kDirections = {
      Vec3{0.4812334, 0.5719237, 0.6641071}, Vec3{-0.6110932, 0.3372811, 0.7160245},
      Vec3{0.2231873, -0.8152212, 0.5343521}, Vec3{0.7373211, 0.1232452, -0.6641341},
      Vec3{-0.3019923, -0.4493321, -0.8407012}, Vec3{0.9123311, -0.3121322, 0.2648822},
      Vec3{-0.1431191, 0.9721431, -0.1855533}, Vec3{0.5511181, 0.5521193, -0.6256611}};
  for (std::size_t attempt = 0; attempt < kDirections.size(); ++attempt) {
    const Vec3 dir = normalize(kDirections[attempt]);
    const bool last = attempt + 1 == kDirections.size();
    int crossings = 0;
    bool degenerate = false;
    for (const auto& [a, b, c] : mesh.triangles) {
      const auto hit = detail::ray_triangle(p, dir, mesh.vertices[a], mesh.vertices[b],
                                            mesh.vertices[c]);
      if (hit == detail::RayHit::degenerate && !last) {
        degenerate = true;
        break;
      }
      if (hit != detail::RayHit::miss) ++crossings;
    }
    if (!degenerate) return (crossings % 2) == 1;
  }
  return false;
}

}  // namespace sponge

#endif  // SPONGE_TRI_MESH_HPP
