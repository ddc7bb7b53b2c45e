#include <gtest/gtest.h>

#include <filesystem>

#include "sponge/manifest.hpp"
#include "sponge/sim.hpp"

using namespace sponge;

namespace {

SimConfig small_config(int iterations) {
  SimConfig cfg = load_config("box.resolution = 3\nsponge.subdivisions = 2\n");
  cfg.iterations = iterations;
  return cfg;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::vector<std::string> listing(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

TEST(Placement, ZeroJitterIsCentered) {
  SimConfig cfg;
  cfg.sponge.jitter = 0.0;
  Rng rng(3);
  EXPECT_EQ(randomize_position(cfg, rng), Vec3{});
  const TriMesh m = initial_sponge(cfg, {});
  const Box b = bounding_box(m);
  EXPECT_NEAR(0.5 * (b.lo.x + b.hi.x), 0.25, 1e-12);
  EXPECT_NEAR(0.5 * (b.lo.y + b.hi.y), 0.25, 1e-12);
  EXPECT_EQ(b.lo.z, 0.0);
}

TEST(Placement, DeterministicAndUnbiased) {
  const SimConfig cfg;
  Rng a(11), b(11);
  EXPECT_EQ(randomize_position(cfg, a), randomize_position(cfg, b));
  Rng rng(5);
  Vec3 mean;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const Vec3 o = randomize_position(cfg, rng);
    EXPECT_LE(std::abs(o.x), cfg.sponge.jitter);
    EXPECT_LE(std::abs(o.y), cfg.sponge.jitter);
    EXPECT_EQ(o.z, 0.0);
    mean += o / static_cast<double>(draws);
  }
  EXPECT_NEAR(mean.x, 0.0, 0.002);
  EXPECT_NEAR(mean.y, 0.0, 0.002);
}

TEST(Simulation, ZeroIterationsEmitsInitialMeshOnly) {
  SimConfig cfg = small_config(0);
  const auto dir = temp_dir("sponge_sim_zero");
  RunWriter writer(cfg, dir);
  Simulation sim(cfg);
  const SimState& s = sim.run([&](const SimState& st) { writer(st, sim.box()); });
  writer.finish(s, "completed");
  EXPECT_EQ(s.iteration, 0);
  EXPECT_TRUE(s.log.empty());
  EXPECT_EQ(listing(dir), (std::vector<std::string>{"run_manifest.json", "sponge_0000.obj"}));
  EXPECT_EQ(read_obj(dir / "sponge_0000.obj").triangles, s.mesh.triangles);
  std::filesystem::remove_all(dir);
}

TEST(Simulation, TargetEdgeIsUnclampedIcosphereMean) {
  const SimConfig cfg = small_config(0);
  Simulation sim(cfg);
  EXPECT_DOUBLE_EQ(sim.state().target_edge, mean_edge_length(make_icosphere(0.06, 2)));
  EXPECT_DOUBLE_EQ(sim.remesh_params().target_edge, sim.state().target_edge);
}

TEST(Simulation, GrowthIsMonotoneContainedAndWithinBudgets) {
  const SimConfig cfg = small_config(10);
  const Box domain = cfg.box.domain();
  double previous = 0.0;
  int observed = 0;
  const SimState s = run(cfg, [&](const SimState& st) {
    const double v = enclosed_volume(st.mesh);
    EXPECT_GE(v, previous * (1.0 - 1e-3)) << "iteration " << st.iteration;
    previous = v;
    for (const auto& p : st.mesh.vertices) {
      EXPECT_TRUE(domain.contains(p)) << "iteration " << st.iteration;
    }
    EXPECT_TRUE(check_mesh(st.mesh).manifold());
    ++observed;
  });
  EXPECT_EQ(observed, 11);
  ASSERT_EQ(s.log.size(), 10u);
  for (const auto& r : s.log) {
    EXPECT_LE(r.flow_newton, cfg.solver.flow_max_iter);
    EXPECT_LE(r.flow_linear_max, cfg.solver.linear_max_iter);
    EXPECT_LE(r.transport_newton, cfg.solver.transport_max_iter);
    EXPECT_LE(r.transport_linear_max, cfg.solver.linear_max_iter);
  }
  EXPECT_GT(enclosed_volume(s.mesh), enclosed_volume(initial_sponge(cfg, s.offset)));
}

TEST(Simulation, RepeatRunsAreByteIdentical) {
  SimConfig cfg = small_config(3);
  cfg.output.emit_vtk = true;
  auto run_into = [&](const std::filesystem::path& dir) {
    RunWriter writer(cfg, dir);
    Simulation sim(cfg);
    const SimState& s = sim.run([&](const SimState& st) { writer(st, sim.box()); });
    writer.finish(s, "completed");
  };
  const auto a = temp_dir("sponge_sim_a");
  const auto b = temp_dir("sponge_sim_b");
  run_into(a);
  run_into(b);
  const auto names = listing(a);
  ASSERT_EQ(names, listing(b));
  EXPECT_EQ(names.size(), 4u + 3u + 1u);
  for (const auto& n : names) EXPECT_EQ(read_text(a / n), read_text(b / n)) << n;
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(Simulation, DifferentSeedsDiffer) {
  SimConfig a = small_config(1), b = small_config(1);
  b.seed = 2;
  EXPECT_NE(run(a).mesh.vertices, run(b).mesh.vertices);
}

TEST(Simulation, SolverFailureNamesStageAndKeepsState) {
  SimConfig cfg = small_config(2);
  cfg.solver.flow_rel_tol = 1e-300;
  cfg.solver.flow_max_iter = 1;
  cfg.solver.viscosity_continuation = false;
  Simulation sim(cfg);
  try {
    sim.step();
    FAIL() << "expected a SimulationError";
  } catch (const SimulationError& e) {
    EXPECT_EQ(e.stage(), "flow");
    EXPECT_EQ(e.iteration(), 1);
    ASSERT_NE(e.last_state(), nullptr);
    EXPECT_EQ(e.last_state()->iteration, 0);
  }
  EXPECT_EQ(sim.state().iteration, 0);
}

TEST(Simulation, InvalidConfigIsRejectedUpFront) {
  SimConfig cfg;
  cfg.fluid.viscosity = -1.0;
  EXPECT_THROW(Simulation{cfg}, ConfigError);
}

TEST(Roughness, SphereIsSmoothBumpIsNot) {
  const TriMesh sphere = make_icosphere(2.0, 3, {1, 2, 3});
  EXPECT_LT(radial_roughness(sphere), 1e-12);
  TriMesh bumpy = sphere;
  bumpy.vertices[0] = bumpy.vertices[0] + 0.5 * (bumpy.vertices[0] - Vec3{1, 2, 3});
  EXPECT_GT(radial_roughness(bumpy), 0.01);
}
