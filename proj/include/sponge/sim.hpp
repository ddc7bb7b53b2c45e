#ifndef SPONGE_SIM_HPP
#define SPONGE_SIM_HPP

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sponge/config.hpp"
#include "sponge/errors.hpp"
#include "sponge/flow.hpp"
#include "sponge/growth.hpp"
#include "sponge/remesh.hpp"
#include "sponge/tet_mesh.hpp"
#include "sponge/transport.hpp"
#include "sponge/tri_mesh.hpp"

namespace sponge {

using Rng = std::mt19937_64;

struct IterationRecord {
  int iteration = 0;
  int flow_newton = 0;
  int flow_linear_max = 0;
  double flow_residual = 0.0;  // relative to the first residual
  bool flow_continuation = false;
  int transport_newton = 0;
  int transport_linear_max = 0;
  double transport_residual = 0.0;
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  double volume = 0.0;
  int splits = 0;
  bool split_limit_reached = false;
  int collapses = 0;
  int collapses_skipped = 0;
  double min_edge = 0.0;
  double max_edge = 0.0;
  std::size_t short_edges = 0;  // below the fuse band after remeshing
  std::size_t edges = 0;
  double seconds = 0.0;         // wall clock, not part of any emitted file
};

struct SimState {
  int iteration = 0;
  TriMesh mesh;
  std::optional<FlowField> flow;
  std::optional<ConcentrationField> concentration;
  VertexNutrients nutrients;
  Vec3 offset;               // placement jitter
  double target_edge = 0.0;  // L0
  std::vector<IterationRecord> log;
};

/// Carries the last consistent state and the stage that failed.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& stage, int iteration, const std::string& detail,
                  std::shared_ptr<const SimState> last)
      : Error("iteration " + std::to_string(iteration) + ", stage " + stage + ": " + detail),
        stage_(stage),
        iteration_(iteration),
        last_(std::move(last)) {}
  const std::string& stage() const { return stage_; }
  int iteration() const { return iteration_; }
  const SimState* last_state() const { return last_.get(); }

 private:
  std::string stage_;
  int iteration_;
  std::shared_ptr<const SimState> last_;
};

/// Uniform x/y offset in [-jitter, jitter]; redrawn while the sponge would
/// come within one grid cell of the inlet or outlet or leave the box.
inline Vec3 randomize_position(const SimConfig& cfg, Rng& rng) {
  const double range = cfg.sponge.jitter;
  if (range == 0.0) return {};
  std::uniform_real_distribution<double> u(-range, range);
  const Vec3 h = cfg.box.spacing();
  const double half_x = 0.5 * cfg.box.size.x;
  const double half_y = 0.5 * cfg.box.size.y;
  const double r = cfg.sponge.radius;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double ox = u(rng);
    const double oy = u(rng);
    if (std::abs(ox) + r <= half_x - h.x && std::abs(oy) + r <= half_y) return {ox, oy, 0.0};
  }
  throw ConfigError("sponge.jitter: no admissible sponge position after 64 draws");
}

/// Icosphere on the substratum with its lower cap clamped flat.
inline TriMesh initial_sponge(const SimConfig& cfg, const Vec3& offset) {
  const Box domain = cfg.box.domain();
  const Vec3 center{domain.lo.x + 0.5 * cfg.box.size.x + offset.x,
                    domain.lo.y + 0.5 * cfg.box.size.y + offset.y,
                    domain.lo.z + cfg.sponge.center_height * cfg.sponge.radius};
  TriMesh mesh = make_icosphere(cfg.sponge.radius, cfg.sponge.subdivisions, center);
  for (auto& v : mesh.vertices) v = domain.clamp(v);
  return mesh;
}

namespace sim_detail {

inline void record_mesh(IterationRecord& rec, const TriMesh& mesh, double fuse_length) {
  rec.vertices = mesh.vertices.size();
  rec.triangles = mesh.triangles.size();
  rec.volume = enclosed_volume(mesh);
  const auto edges = unique_edges(mesh);
  rec.edges = edges.size();
  rec.min_edge = std::numeric_limits<double>::infinity();
  rec.max_edge = 0.0;
  rec.short_edges = 0;
  for (const auto& [a, b] : edges) {
    const double len = distance(mesh.vertices[a], mesh.vertices[b]);
    rec.min_edge = std::min(rec.min_edge, len);
    rec.max_edge = std::max(rec.max_edge, len);
    rec.short_edges += len < fuse_length ? 1 : 0;
  }
}

}  // namespace sim_detail

class Simulation {
 public:
  using Observer = std::function<void(const SimState&)>;

  /// Validates the config, draws the placement and builds the box mesh.
  explicit Simulation(SimConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
    validate(cfg_);
    box_ = build_box_mesh(cfg_.box.domain(), cfg_.box.resolution, cfg_.box.max_nodes);
    state_.offset = randomize_position(cfg_, rng_);
    state_.mesh = initial_sponge(cfg_, state_.offset);
    const TriMesh sphere = make_icosphere(cfg_.sponge.radius, cfg_.sponge.subdivisions);
    state_.target_edge =
        cfg_.remesh.target_edge > 0.0 ? cfg_.remesh.target_edge : mean_edge_length(sphere);
    remesh_ = cfg_.remesh;
    remesh_.target_edge = state_.target_edge;
  }

  const SimConfig& config() const { return cfg_; }
  const TetMesh& box() const { return box_; }
  const SimState& state() const { return state_; }
  const RemeshParams& remesh_params() const { return remesh_; }

  /// One growth iteration; on failure the state is left at the previous
  /// iteration and SimulationError names the stage.
  void step() {
    const auto start = std::chrono::steady_clock::now();
    const int it = state_.iteration + 1;
    std::string stage = "classify";
    try {
      IterationRecord rec;
      rec.iteration = it;
      const TriMesh& mesh = state_.mesh;
      const auto classes = classify_nodes(box_, mesh, cfg_.sponge.snap_fraction);

      stage = "flow";
      FlowField flow =
          solve_stationary_flow(box_, classes, cfg_.fluid, cfg_.solver.flow(), state_.flow);
      rec.flow_newton = flow.report.iterations;
      rec.flow_linear_max = flow.report.max_linear_iterations;
      rec.flow_residual = flow.report.relative_residual();
      rec.flow_continuation = flow.used_continuation;

      stage = "transport";
      ConcentrationField conc =
          solve_nutrient(box_, classes, flow, cfg_.transport, cfg_.solver.transport());
      rec.transport_newton = conc.report.iterations;
      rec.transport_linear_max = conc.report.max_linear_iterations;
      rec.transport_residual = conc.report.relative_residual();

      stage = "growth";
      const auto normals = vertex_normals(mesh);
      const auto skewed = perturb_normals(normals, cfg_.growth.perturb_radius, rng_);
      VertexNutrients c(mesh.vertices.size());
      for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = sample_vertex_concentration(mesh.vertices[i], skewed[i], conc, box_, cfg_.growth,
                                           cfg_.transport.wall_concentration);
      }
      c = translocate(mesh, std::move(c), cfg_.growth.t_give);
      TriMesh grown = apply_growth(mesh, skewed, c, cfg_.growth, cfg_.box.domain());

      stage = "remesh";
      SplitResult split = split_long_edges(grown, remesh_);
      const Box domain = cfg_.box.domain();
      for (auto& v : split.mesh.vertices) v = domain.clamp(v);
      FuseResult fused = fuse_close_vertices(split.mesh, remesh_);
      rec.splits = split.splits;
      rec.split_limit_reached = split.pass_limit_reached;
      rec.collapses = fused.collapses;
      rec.collapses_skipped = fused.skipped;

      stage = "check_mesh";
      const MeshReport report = check_mesh(fused.mesh);
      if (!report.manifold()) {
        throw MeshError("grown mesh is not a closed oriented manifold (" +
                        std::to_string(report.offending_edges.size()) + " offending edges)");
      }
      sim_detail::record_mesh(rec, fused.mesh, remesh_.fuse_length());
      rec.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      state_.iteration = it;
      state_.mesh = std::move(fused.mesh);
      state_.flow = std::move(flow);
      state_.concentration = std::move(conc);
      state_.nutrients = std::move(c);
      state_.log.push_back(rec);
    } catch (const SimulationError&) {
      throw;
    } catch (const Error& e) {
      throw SimulationError(stage, it, e.what(), std::make_shared<const SimState>(state_));
    }
  }

  /// Runs the configured number of iterations. The observer sees the initial
  /// state and then every completed iteration.
  const SimState& run(const Observer& observer = {}) {
    if (observer) observer(state_);
    while (state_.iteration < cfg_.iterations) {
      step();
      if (observer) observer(state_);
    }
    return state_;
  }

 private:
  SimConfig cfg_;
  Rng rng_;
  TetMesh box_;
  RemeshParams remesh_;
  SimState state_;
};

inline SimState run(const SimConfig& cfg, const Simulation::Observer& observer = {}) {
  Simulation sim(cfg);
  return sim.run(observer);
}

/// Standard deviation of vertex distances from the vertex centroid.
inline double radial_roughness(const TriMesh& mesh) {
  const Vec3 c = vertex_centroid(mesh);
  double sum = 0.0, sum2 = 0.0;
  for (const auto& v : mesh.vertices) {
    const double r = distance(v, c);
    sum += r;
    sum2 += r * r;
  }
  const double n = static_cast<double>(mesh.vertices.size());
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, sum2 / n - mean * mean));
}

}  // namespace sponge

#endif  // SPONGE_SIM_HPP
