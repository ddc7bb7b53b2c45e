#include <cstdio>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "sponge/config.hpp"
#include "sponge/manifest.hpp"
#include "sponge/sim.hpp"

namespace {

int level_rank(const std::string& level) {
  if (level == "off") return 0;
  if (level == "error") return 1;
  if (level == "warn") return 2;
  if (level == "info") return 3;
  return 4;
}

struct Logger {
  int rank = 3;
  template <typename... Args>
  void log(int at, const char* tag, fmt::format_string<Args...> f, Args&&... args) const {
    if (at > rank) return;
    fmt::print(stderr, "[{}] {}\n", tag, fmt::format(f, std::forward<Args>(args)...));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sponge growth simulator"};
  app.set_version_flag("--version", std::string(sponge::kVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a growth simulation");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> iterations;
  std::optional<std::string> emit;
  std::optional<std::string> log_level;
  run->add_option("config", config_path, "Configuration file (key = value lines)")->required();
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--iterations", iterations, "Number of growth iterations");
  run->add_option("--emit", emit, "Artifacts to write: obj, vtk, obj,vtk or none");
  run->add_option("--log-level", log_level, "off, error, warn, info or debug");

  CLI11_PARSE(app, argc, argv);

  Logger logger;
  sponge::SimConfig cfg;
  try {
    cfg = sponge::load_config_file(config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output.directory = *out_dir;
    if (iterations) cfg.iterations = *iterations;
    if (emit) sponge::config_detail::parse_emit("--emit", *emit, cfg.output);
    if (log_level) cfg.output.log_level = *log_level;
    sponge::validate(cfg);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: stage config: {}\n", e.what());
    return 2;
  }
  logger.rank = level_rank(cfg.output.log_level);

  std::optional<sponge::Simulation> sim;
  try {
    sim.emplace(cfg);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: stage setup: {}\n", e.what());
    return 3;
  }
  logger.log(3, "info", "box {} nodes, {} tets; sponge {} vertices, L0 = {:.4g} m",
             sim->box().num_nodes(), sim->box().num_tets(), sim->state().mesh.vertices.size(),
             sim->state().target_edge);

  std::optional<sponge::RunWriter> writer;
  try {
    writer.emplace(cfg, cfg.output.directory);
    sim->run([&](const sponge::SimState& s) {
      (*writer)(s, sim->box());
      if (s.log.empty()) return;
      const auto& r = s.log.back();
      logger.log(3, "info",
                 "iteration {}/{}: flow newton {} (linear <= {}), transport newton {} "
                 "(linear <= {}), {} vertices, volume {:.6e} m^3, {:.2f} s",
                 r.iteration, cfg.iterations, r.flow_newton, r.flow_linear_max,
                 r.transport_newton, r.transport_linear_max, r.vertices, r.volume, r.seconds);
      logger.log(4, "debug", "  splits {}, collapses {} ({} rejected), edges [{:.4g}, {:.4g}]",
                 r.splits, r.collapses, r.collapses_skipped, r.min_edge, r.max_edge);
      if (r.flow_continuation) logger.log(2, "warn", "  flow needed viscosity continuation");
    });
    writer->finish(sim->state(), "completed");
  } catch (const sponge::SimulationError& e) {
    if (writer && e.last_state()) writer->finish(*e.last_state(), "failed: " + e.stage());
    fmt::print(stderr, "error: stage {}: {}\n", e.stage(), e.what());
    return 4;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: stage output: {}\n", e.what());
    return 5;
  }
  logger.log(3, "info", "wrote {}", writer->manifest_path().string());
  return 0;
}
