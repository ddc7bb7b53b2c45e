#ifndef SPONGE_MANIFEST_HPP
#define SPONGE_MANIFEST_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"
#include "sponge/config.hpp"
#include "sponge/export.hpp"
#include "sponge/sim.hpp"

#ifndef SPONGE_VERSION
#define SPONGE_VERSION "0.0.0"
#endif

namespace sponge {

inline constexpr const char* kVersion = SPONGE_VERSION;

inline nlohmann::ordered_json to_json(const IterationRecord& r) {
  return {{"iteration", r.iteration},
          {"flow_newton_iterations", r.flow_newton},
          {"flow_linear_iterations_max", r.flow_linear_max},
          {"flow_relative_residual", r.flow_residual},
          {"flow_viscosity_continuation", r.flow_continuation},
          {"transport_newton_iterations", r.transport_newton},
          {"transport_linear_iterations_max", r.transport_linear_max},
          {"transport_relative_residual", r.transport_residual},
          {"vertices", r.vertices},
          {"triangles", r.triangles},
          {"edges", r.edges},
          {"volume", r.volume},
          {"splits", r.splits},
          {"split_pass_limit_reached", r.split_limit_reached},
          {"collapses", r.collapses},
          {"collapses_rejected", r.collapses_skipped},
          {"min_edge", r.min_edge},
          {"max_edge", r.max_edge},
          {"edges_below_fuse_band", r.short_edges}};
}

/// Writes per-iteration artifacts into a directory and keeps run_manifest.json
/// current after every iteration. Wall-clock timings are deliberately left out
/// so every file is a function of (config, seed, version).
class RunWriter {
 public:
  RunWriter(const SimConfig& cfg, std::filesystem::path dir) : cfg_(cfg), dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError(dir_.string() + ": " + ec.message());
  }

  void operator()(const SimState& s, const TetMesh& box) {
    nlohmann::ordered_json files = nlohmann::ordered_json::object();
    if (cfg_.output.emit_obj) {
      const std::string name = fmt::format("sponge_{:04d}.obj", s.iteration);
      export_surface(s.mesh, dir_ / name);
      files["obj"] = name;
    }
    if (cfg_.output.emit_vtk && s.flow && s.concentration) {
      const std::string name = fmt::format("fields_{:04d}.vtk", s.iteration);
      export_volume_fields(box, *s.flow, *s.concentration, dir_ / name);
      files["vtk"] = name;
    }
    nlohmann::ordered_json entry = s.log.empty() || s.log.back().iteration != s.iteration
                                       ? nlohmann::ordered_json{{"iteration", s.iteration}}
                                       : to_json(s.log.back());
    if (s.iteration == 0) {
      const auto rep = check_mesh(s.mesh);
      entry["vertices"] = rep.vertices;
      entry["triangles"] = rep.triangles;
      entry["volume"] = enclosed_volume(s.mesh);
    }
    entry["files"] = files;
    iterations_.push_back(std::move(entry));
    status_ = "running";
    write_manifest(s);
  }

  void finish(const SimState& s, const std::string& status) {
    status_ = status;
    write_manifest(s);
  }

  std::filesystem::path manifest_path() const { return dir_ / "run_manifest.json"; }

 private:
  void write_manifest(const SimState& s) {
    nlohmann::ordered_json m;
    m["version"] = kVersion;
    m["seed"] = cfg_.seed;
    m["status"] = status_;
    m["config"] = serialize_config(cfg_);
    m["target_edge"] = s.target_edge;
    m["placement_offset"] = {s.offset.x, s.offset.y, s.offset.z};
    m["iterations"] = iterations_;
    write_text(manifest_path(), m.dump(2) + "\n");
  }

  SimConfig cfg_;
  std::filesystem::path dir_;
  std::string status_ = "running";
  std::vector<nlohmann::ordered_json> iterations_;
};

}  // namespace sponge

#endif  // SPONGE_MANIFEST_HPP
