#ifndef SPONGE_GROWTH_HPP
#define SPONGE_GROWTH_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "sponge/errors.hpp"
#include "sponge/tet_mesh.hpp"
#include "sponge/transport.hpp"
#include "sponge/tri_mesh.hpp"

namespace sponge {

struct GrowthParams {
  double perturb_radius = 0.06;      // m, half-width of the per-axis normal offset
  double probe_offset_max = 0.125;   // m, sampling depth along the normal
  int probe_samples = 4;
  double t_give = 0.1;
  double iroquois_threshold = 0.05;
  double growth_rate = 1.0;          // Gr
  double l_max = 0.1;                // m, asymptotic maximum growth
  double half_saturation = 0.25;     // K
  double kinetic_order = 2.0;        // n
  double max_growth = 0.01;          // m per iteration

  friend bool operator==(const GrowthParams&, const GrowthParams&) = default;
};

/// Per-vertex nutrient, normalized by the wall concentration, in [0, 1].
using VertexNutrients = std::vector<double>;

/// Distance attenuation 1 / (20 d + 1) on d in [0, 1].
inline double attenuation(double d) {
  if (!(d >= 0.0 && d <= 1.0)) throw ContractError("attenuation: d must lie in [0, 1]");
  return 1.0 / (20.0 * d + 1.0);
}

/// Halichondrid skew: N' = normalize(N + offset), each offset component
/// uniform in [-radius, radius]. Draws are made in vertex order, then x, y, z.
template <typename Rng>
std::vector<Vec3> perturb_normals(std::span<const Vec3> normals, double radius, Rng& rng) {
  std::vector<Vec3> out(normals.begin(), normals.end());
  if (radius == 0.0) return out;
  std::uniform_real_distribution<double> offset(-radius, radius);
  for (auto& n : out) {
    constexpr int kMaxRedraws = 16;
    for (int attempt = 0;; ++attempt) {
      const double ox = offset(rng);
      const double oy = offset(rng);
      const double oz = offset(rng);
      const Vec3 skewed = n + Vec3{ox, oy, oz};
      if (norm(skewed) >= 1e-12) {
        n = normalize(skewed);
        break;
      }
      if (attempt == kMaxRedraws) {
        throw ContractError("perturb_normals: offset keeps cancelling the normal");
      }
    }
  }
  return out;
}

template <typename Rng>
std::vector<Vec3> perturb_normals(const std::vector<Vec3>& normals, double radius, Rng& rng) {
  return perturb_normals(std::span<const Vec3>(normals), radius, rng);
}

/// Attenuated mean of the normalized field sampled at depths
/// k / samples * probe_offset_max, k = 1..samples, along the normal.
inline double sample_vertex_concentration(const Vec3& vertex, const Vec3& normal,
                                          std::span<const double> field, const TetMesh& box,
                                          const GrowthParams& params, double c_wall) {
  const int m = params.probe_samples;
  double sum = 0.0;
  for (int k = 1; k <= m; ++k) {
    const double d = static_cast<double>(k) / m;
    const Vec3 p = vertex + (d * params.probe_offset_max) * normal;
    sum += probe(box, field, p) / c_wall * attenuation(d);
  }
  return std::clamp(sum / m, 0.0, 1.0);
}

inline double sample_vertex_concentration(const Vec3& vertex, const Vec3& normal,
                                          const ConcentrationField& field, const TetMesh& box,
                                          const GrowthParams& params, double c_wall) {
  return sample_vertex_concentration(vertex, normal, std::span<const double>(field.concentration),
                                     box, params, c_wall);
}

/// One donor update: every neighbor gains t_give * c(x), then x loses
/// N_neigh * t_give * c(x). All writes are clamped to [0, 1].
inline void donate(std::span<const std::vector<int>> neighbors, std::span<double> c, int x,
                   double t_give) {
  const double give = t_give * c[x];
  for (int y : neighbors[x]) c[y] = std::clamp(c[y] + give, 0.0, 1.0);
  const double count = static_cast<double>(neighbors[x].size());
  c[x] = std::clamp(c[x] - count * give, 0.0, 1.0);
}

/// Two sequential sweeps in ascending vertex order. Sweep one donates from
/// each vertex; sweep two donates from each neighbor of each vertex in turn.
inline VertexNutrients translocate(std::span<const std::vector<int>> neighbors,
                                   VertexNutrients c, double t_give) {
  if (!(t_give >= 0.0 && t_give <= 1.0)) {
    throw ContractError("translocate: t_give must lie in [0, 1]");
  }
  if (c.size() != neighbors.size()) {
    throw ContractError("translocate: nutrients and adjacency differ in size");
  }
  for (auto& v : c) v = std::clamp(v, 0.0, 1.0);
  const int n = static_cast<int>(c.size());
  for (int x = 0; x < n; ++x) donate(neighbors, c, x, t_give);
  for (int x = 0; x < n; ++x) {
    for (int y : neighbors[x]) donate(neighbors, c, y, t_give);
  }
  return c;
}

inline VertexNutrients translocate(const TriMesh& mesh, VertexNutrients c, double t_give) {
  const auto nbrs = vertex_neighbors(mesh);
  return translocate(std::span<const std::vector<int>>(nbrs), std::move(c), t_give);
}

/// Saturating growth law clamped to [0, max_growth]; zero below the
/// Iroquois threshold.
inline double growth_length(double c, const GrowthParams& params) {
  if (!(c >= 0.0 && c <= 1.0)) throw ContractError("growth_length: C must lie in [0, 1]");
  if (c < params.iroquois_threshold) return 0.0;
  const double cn = std::pow(c, params.kinetic_order);
  const double raw =
      params.growth_rate * params.l_max * cn / (params.half_saturation + cn);
  return std::clamp(raw, 0.0, params.max_growth);
}

/// Displaces each vertex along its (perturbed) normal by its growth length,
/// then clamps it into the domain. Connectivity is unchanged.
inline TriMesh apply_growth(TriMesh mesh, std::span<const Vec3> normals,
                            std::span<const double> nutrients, const GrowthParams& params,
                            const Box& domain) {
  if (normals.size() != mesh.vertices.size() || nutrients.size() != mesh.vertices.size()) {
    throw ContractError("apply_growth: per-vertex arrays do not match the mesh");
  }
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const double len = growth_length(nutrients[i], params);
    if (len == 0.0) continue;
    mesh.vertices[i] = domain.clamp(mesh.vertices[i] + len * normals[i]);
  }
  return mesh;
}

}  // namespace sponge

#endif  // SPONGE_GROWTH_HPP
