#ifndef SPONGE_REMESH_HPP
#define SPONGE_REMESH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "sponge/errors.hpp"
#include "sponge/tri_mesh.hpp"

namespace sponge {

struct RemeshParams {
  double target_edge = 0.0;  // L0; zero means "capture from the initial mesh"
  double split_factor = 1.5;
  double fuse_factor = 0.4;
  int max_passes = 10;

  double split_length() const { return split_factor * target_edge; }
  double fuse_length() const { return fuse_factor * target_edge; }

  friend bool operator==(const RemeshParams&, const RemeshParams&) = default;
};

struct MeshReport {
  bool closed = false;    // every edge has exactly two incident triangles
  bool oriented = false;  // no directed edge appears twice
  bool manifold() const { return closed && oriented && invalid_triangles == 0; }
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t triangles = 0;
  std::size_t invalid_triangles = 0;     // bad index or repeated vertex
  std::size_t degenerate_triangles = 0;  // zero area
  std::size_t components = 0;
  long euler_characteristic = 0;
  long genus = 0;
  double min_edge = 0.0;
  double max_edge = 0.0;
  std::vector<Edge> offending_edges;  // boundary or non-manifold edges
};

/// Structural and metric report; never throws.
inline MeshReport check_mesh(const TriMesh& mesh) {
  MeshReport rep;
  rep.vertices = mesh.vertices.size();
  rep.triangles = mesh.triangles.size();
  const int nv = static_cast<int>(mesh.vertices.size());

  std::vector<std::pair<int, int>> directed;
  directed.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    bool ok = true;
    for (int v : t) ok &= v >= 0 && v < nv;
    ok &= t[0] != t[1] && t[1] != t[2] && t[0] != t[2];
    if (!ok) {
      ++rep.invalid_triangles;
      continue;
    }
    if (triangle_area(mesh, t) <= 0.0) ++rep.degenerate_triangles;
    for (int k = 0; k < 3; ++k) directed.emplace_back(t[k], t[(k + 1) % 3]);
  }
  std::sort(directed.begin(), directed.end());
  rep.oriented = std::adjacent_find(directed.begin(), directed.end()) == directed.end();

  std::vector<std::pair<Edge, int>> counted;
  {
    std::vector<Edge> undirected;
    undirected.reserve(directed.size());
    for (const auto& [a, b] : directed) undirected.push_back(make_edge(a, b));
    std::sort(undirected.begin(), undirected.end());
    for (std::size_t i = 0; i < undirected.size();) {
      std::size_t j = i;
      while (j < undirected.size() && undirected[j] == undirected[i]) ++j;
      counted.emplace_back(undirected[i], static_cast<int>(j - i));
      i = j;
    }
  }
  rep.edges = counted.size();
  rep.closed = !counted.empty();
  rep.min_edge = std::numeric_limits<double>::infinity();
  for (const auto& [e, count] : counted) {
    if (count != 2) {
      rep.closed = false;
      rep.offending_edges.push_back(e);
    }
    const double len = distance(mesh.vertices[e.first], mesh.vertices[e.second]);
    rep.min_edge = std::min(rep.min_edge, len);
    rep.max_edge = std::max(rep.max_edge, len);
  }
  if (counted.empty()) rep.min_edge = 0.0;

  // Connected components over vertices that appear in some triangle.
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<char> used(nv, 0);
  for (const auto& [e, count] : counted) {
    used[e.first] = used[e.second] = 1;
    parent[find(e.first)] = find(e.second);
  }
  std::size_t used_count = 0;
  for (int v = 0; v < nv; ++v) {
    if (!used[v]) continue;
    ++used_count;
    if (find(v) == v) ++rep.components;
  }
  rep.euler_characteristic = static_cast<long>(used_count) - static_cast<long>(rep.edges) +
                             static_cast<long>(rep.triangles - rep.invalid_triangles);
  rep.genus = (2 * static_cast<long>(rep.components) - rep.euler_characteristic) / 2;
  return rep;
}

inline void require_manifold(const TriMesh& mesh, const char* who) {
  const MeshReport rep = check_mesh(mesh);
  if (!rep.manifold()) {
    std::string msg = std::string(who) + ": input is not a closed oriented manifold";
    if (!rep.offending_edges.empty()) {
      msg += " (edge " + std::to_string(rep.offending_edges.front().first) + "-" +
             std::to_string(rep.offending_edges.front().second) + ")";
    }
    throw MeshError(msg);
  }
}

namespace detail {

inline std::uint64_t directed_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

/// Area-weighted normals; vertices without a usable face get a zero vector.
inline std::vector<Vec3> tolerant_normals(const TriMesh& mesh) {
  std::vector<Vec3> acc(mesh.vertices.size());
  for (const auto& t : mesh.triangles) {
    const Vec3 n = face_area_normal(mesh, t);
    for (int v : t) acc[v] += n;
  }
  for (auto& n : acc) {
    const double len = norm(n);
    n = len > 0.0 ? n / len : Vec3{};
  }
  return acc;
}

}  // namespace detail

/// Position of a vertex inserted on edge ab: the midpoint lifted along the
/// mean endpoint normal by the sagitta L sin(theta/2) / 4 of the circular arc
/// implied by the normals' divergence angle theta. The lift is outward where
/// the normals diverge and inward where they converge; parallel normals give
/// the plain midpoint.
inline Vec3 curved_midpoint(const Vec3& a, const Vec3& b, const Vec3& na, const Vec3& nb) {
  const Vec3 mid = 0.5 * (a + b);
  const Vec3 sum = na + nb;
  const double sum_len = norm(sum);
  if (norm2(na) == 0.0 || norm2(nb) == 0.0 || sum_len < 1e-12) return mid;
  const double cos_theta = std::clamp(dot(na, nb), -1.0, 1.0);
  const double half = 0.5 * std::acos(cos_theta);
  if (half < 1e-9) return mid;
  const double len = distance(a, b);
  const double lift = 0.25 * len * std::sin(half);
  const double side = dot(nb - na, b - a) >= 0.0 ? 1.0 : -1.0;
  return mid + (side * lift / sum_len) * sum;
}

struct SplitResult {
  TriMesh mesh;
  int splits = 0;
  int passes = 0;
  bool pass_limit_reached = false;  // long edges remain
};

/// Splits every edge longer than split_factor * L0, longest first, until none
/// remain or max_passes is reached. Each split turns the two incident
/// triangles into four.
inline SplitResult split_long_edges(const TriMesh& input, const RemeshParams& params) {
  require_manifold(input, "split_long_edges");
  SplitResult out{input};
  TriMesh& mesh = out.mesh;
  const double limit = params.split_length();

  for (int pass = 0; pass < params.max_passes; ++pass) {
    std::vector<std::tuple<double, int, int>> longs;
    for (const auto& [a, b] : unique_edges(mesh)) {
      const double len = distance(mesh.vertices[a], mesh.vertices[b]);
      if (len > limit) longs.emplace_back(len, a, b);
    }
    if (longs.empty()) return out;
    std::sort(longs.begin(), longs.end(), [](const auto& l, const auto& r) {
      if (std::get<0>(l) != std::get<0>(r)) return std::get<0>(l) > std::get<0>(r);
      return std::tie(std::get<1>(l), std::get<2>(l)) < std::tie(std::get<1>(r), std::get<2>(r));
    });

    std::unordered_map<std::uint64_t, int> owner;  // directed edge -> triangle
    owner.reserve(mesh.triangles.size() * 3);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      for (int k = 0; k < 3; ++k) {
        owner[detail::directed_key(tri[k], tri[(k + 1) % 3])] = static_cast<int>(t);
      }
    }
    const std::vector<Vec3> normals = detail::tolerant_normals(mesh);

    auto opposite = [&](int t, int a, int b) {
      for (int v : mesh.triangles[t]) {
        if (v != a && v != b) return v;
      }
      return -1;
    };
    auto set_owner = [&](int t) {
      const auto& tri = mesh.triangles[t];
      for (int k = 0; k < 3; ++k) owner[detail::directed_key(tri[k], tri[(k + 1) % 3])] = t;
    };

    for (const auto& [len, a, b] : longs) {
      const auto f1 = owner.find(detail::directed_key(a, b));
      const auto f2 = owner.find(detail::directed_key(b, a));
      if (f1 == owner.end() || f2 == owner.end()) continue;
      // t1 = (a, b, c) and t2 = (b, a, d) up to rotation.
      const int t1 = f1->second, t2 = f2->second;
      const int c = opposite(t1, a, b), d = opposite(t2, a, b);
      const int m = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(
          curved_midpoint(mesh.vertices[a], mesh.vertices[b], normals[a], normals[b]));

      owner.erase(f1);
      owner.erase(detail::directed_key(b, a));
      mesh.triangles[t1] = {a, m, c};
      mesh.triangles[t2] = {b, m, d};
      const int t3 = static_cast<int>(mesh.triangles.size());
      mesh.triangles.push_back({m, b, c});
      mesh.triangles.push_back({m, a, d});
      set_owner(t1);
      set_owner(t2);
      set_owner(t3);
      set_owner(t3 + 1);
      ++out.splits;
    }
    out.passes = pass + 1;
  }
  for (const auto& [a, b] : unique_edges(mesh)) {
    if (distance(mesh.vertices[a], mesh.vertices[b]) > limit) {
      out.pass_limit_reached = true;
      break;
    }
  }
  return out;
}

struct FuseResult {
  TriMesh mesh;
  int collapses = 0;
  int skipped = 0;  // short edges left uncollapsed by the final sweep
};

namespace detail {

/// One sweep over the short edges present at its start.
inline FuseResult fuse_pass(const TriMesh& input, const RemeshParams& params) {
  const double limit = params.fuse_length();
  const double split_limit = params.split_length();
  TriMesh mesh = input;
  FuseResult out;

  std::vector<std::tuple<double, int, int>> shorts;
  for (const auto& [a, b] : unique_edges(mesh)) {
    const double len = distance(mesh.vertices[a], mesh.vertices[b]);
    if (len < limit) shorts.emplace_back(len, a, b);
  }
  if (shorts.empty()) {
    out.mesh = std::move(mesh);
    return out;
  }
  std::sort(shorts.begin(), shorts.end());

  const std::size_t nv = mesh.vertices.size();
  std::vector<std::vector<int>> vtris = incident_triangles(mesh);
  std::vector<char> tri_alive(mesh.triangles.size(), 1);
  std::vector<char> vert_alive(nv, 1);
  std::size_t alive_vertices = nv;

  auto neighbors_of = [&](int v) {
    std::vector<int> out_n;
    for (int t : vtris[v]) {
      for (int w : mesh.triangles[t]) {
        if (w != v) out_n.push_back(w);
      }
    }
    std::sort(out_n.begin(), out_n.end());
    out_n.erase(std::unique(out_n.begin(), out_n.end()), out_n.end());
    return out_n;
  };
  const double area_floor = 1e-12 * params.target_edge * params.target_edge;

  for (const auto& [len0, a, b] : shorts) {
    if (!vert_alive[a] || !vert_alive[b]) continue;
    std::vector<int> shared;
    for (int t : vtris[a]) {
      const auto& tri = mesh.triangles[t];
      if (tri[0] == b || tri[1] == b || tri[2] == b) shared.push_back(t);
    }
    if (shared.size() != 2) continue;  // edge no longer present
    if (distance(mesh.vertices[a], mesh.vertices[b]) >= limit) continue;
    if (alive_vertices <= 4) {
      ++out.skipped;
      continue;
    }

    std::vector<int> apex;
    for (int t : shared) {
      for (int w : mesh.triangles[t]) {
        if (w != a && w != b) apex.push_back(w);
      }
    }
    std::sort(apex.begin(), apex.end());
    const auto na = neighbors_of(a), nb = neighbors_of(b);
    std::vector<int> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(),
                          std::back_inserter(common));
    if (common != apex) {
      ++out.skipped;
      continue;
    }

    const Vec3 p = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    bool ok = true;
    for (int v : {a, b}) {
      for (int t : vtris[v]) {
        if (t == shared[0] || t == shared[1]) continue;
        const Triangle& moved = mesh.triangles[t];
        std::array<Vec3, 3> pos;
        for (int k = 0; k < 3; ++k) {
          pos[k] = (moved[k] == a || moved[k] == b) ? p : mesh.vertices[moved[k]];
        }
        const Vec3 before = face_area_normal(mesh, mesh.triangles[t]);
        const Vec3 after = cross(pos[1] - pos[0], pos[2] - pos[0]);
        if (0.5 * norm(after) <= area_floor || dot(before, after) <= 0.0) {
          ok = false;
          break;
        }
        for (int k = 0; k < 3; ++k) {
          if (moved[k] == a || moved[k] == b) {
            for (int q = 0; q < 3; ++q) {
              if (q != k && distance(p, pos[q]) > split_limit) ok = false;
            }
          }
        }
        if (!ok) break;
      }
      if (!ok) break;
    }
    if (!ok) {
      ++out.skipped;
      continue;
    }

    mesh.vertices[a] = p;
    for (int t : shared) {
      tri_alive[t] = 0;
      for (int w : mesh.triangles[t]) {
        auto& lst = vtris[w];
        lst.erase(std::remove(lst.begin(), lst.end(), t), lst.end());
      }
    }
    for (int t : vtris[b]) {
      for (int& w : mesh.triangles[t]) {
        if (w == b) w = a;
      }
      vtris[a].push_back(t);
    }
    vtris[b].clear();
    vert_alive[b] = 0;
    --alive_vertices;
    ++out.collapses;
  }

  std::vector<int> remap(nv, -1);
  for (std::size_t v = 0; v < nv; ++v) {
    if (!vert_alive[v]) continue;
    remap[v] = static_cast<int>(out.mesh.vertices.size());
    out.mesh.vertices.push_back(mesh.vertices[v]);
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!tri_alive[t]) continue;
    const auto& tri = mesh.triangles[t];
    out.mesh.triangles.push_back({remap[tri[0]], remap[tri[1]], remap[tri[2]]});
  }
  return out;
}

}  // namespace detail

/// Collapses edges shorter than fuse_factor * L0 (shortest first) to their
/// midpoint when the link condition holds and no surviving triangle becomes
/// degenerate, flips, or gains an edge longer than split_factor * L0. Sweeps
/// repeat until one collapses nothing or max_passes is reached.
inline FuseResult fuse_close_vertices(const TriMesh& input, const RemeshParams& params) {
  require_manifold(input, "fuse_close_vertices");
  FuseResult out{input};
  for (int pass = 0; pass < params.max_passes; ++pass) {
    FuseResult step = detail::fuse_pass(out.mesh, params);
    out.mesh = std::move(step.mesh);
    out.collapses += step.collapses;
    out.skipped = step.skipped;
    if (step.collapses == 0) break;
  }
  return out;
}

}  // namespace sponge

#endif  // SPONGE_REMESH_HPP
