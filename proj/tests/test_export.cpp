#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "sponge/export.hpp"

using namespace sponge;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   (name + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int count_prefix(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) n += line.rfind(prefix, 0) == 0 ? 1 : 0;
  return n;
}

}  // namespace

TEST(Obj, IcosahedronRecordCounts) {
  const std::string text = obj_string(make_icosphere(1.0, 0));
  EXPECT_EQ(count_prefix(text, "v "), 12);
  EXPECT_EQ(count_prefix(text, "f "), 20);
}

TEST(Obj, RoundTripThroughFile) {
  const auto dir = temp_dir("sponge_obj");
  const TriMesh m = make_icosphere(0.06, 3, {0.25, 0.2, 0.015});
  export_surface(m, dir / "a.obj");
  const TriMesh back = read_obj(dir / "a.obj");
  EXPECT_EQ(back.triangles, m.triangles);
  ASSERT_EQ(back.vertices.size(), m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    EXPECT_LE(distance(back.vertices[i], m.vertices[i]), 1e-9);
  }
  export_surface(m, dir / "b.obj");
  EXPECT_EQ(read_text(dir / "a.obj"), read_text(dir / "b.obj"));
  std::filesystem::remove_all(dir);
}

TEST(Obj, ReaderAcceptsCommonVariants) {
  const TriMesh m = parse_obj(
      "# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2//1 3\nf -3 -2 -1\n");
  ASSERT_EQ(m.triangles.size(), 2u);
  EXPECT_EQ(m.triangles[0], (Triangle{0, 1, 2}));
  EXPECT_EQ(m.triangles[1], (Triangle{0, 1, 2}));
  EXPECT_THROW(parse_obj("v 0 0 0\nf 1 2 3\n"), IoError);
  EXPECT_THROW(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n"), IoError);
  EXPECT_THROW(parse_obj("v 0 0\n"), IoError);
  EXPECT_THROW(parse_obj("v 0 0 0\nf a b c\n"), IoError);
}

TEST(Obj, UnwritablePathIsAnIoError) {
  EXPECT_THROW(export_surface(make_icosphere(1.0, 0), "/nonexistent/dir/x.obj"), IoError);
  EXPECT_THROW(read_obj("/nonexistent/dir/x.obj"), IoError);
}

TEST(Vtk, RoundTripsFields) {
  const TetMesh box = build_box_mesh({{0, 0, 0}, {0.5, 0.5, 0.5}}, 3);
  const std::size_t n = box.num_nodes();
  FlowField flow;
  ConcentrationField conc;
  for (std::size_t a = 0; a < n; ++a) {
    const Vec3& p = box.nodes[a];
    flow.velocity.push_back({0.05 * p.z, -0.01 * p.x, 1e-7 * p.y});
    conc.concentration.push_back(p.x * p.y + 0.25);
  }
  flow.pressure.assign(n, 0.0);
  const VtkGrid g = parse_vtk(vtk_string(box, flow, conc));
  ASSERT_EQ(g.points.size(), 125u);
  ASSERT_EQ(g.cells.size(), box.num_tets());
  for (std::size_t e = 0; e < box.num_tets(); ++e) {
    EXPECT_EQ(g.cell_types[e], 10);
    for (int k = 0; k < 4; ++k) EXPECT_EQ(g.cells[e][k], box.tets[e][k]);
  }
  for (std::size_t a = 0; a < n; ++a) {
    EXPECT_LE(distance(g.points[a], box.nodes[a]), 1e-9);
    EXPECT_LE(distance(g.velocity[a], flow.velocity[a]), 1e-9 * (1.0 + norm(flow.velocity[a])));
    EXPECT_NEAR(g.concentration[a], conc.concentration[a], 1e-9);
  }
}

TEST(Vtk, ZeroFlowWritesZeroVelocity) {
  const TetMesh box = build_box_mesh({{0, 0, 0}, {0.5, 0.5, 0.5}}, 2);
  FlowField flow;
  flow.velocity.assign(box.num_nodes(), Vec3{});
  flow.pressure.assign(box.num_nodes(), 0.0);
  ConcentrationField conc;
  conc.concentration.assign(box.num_nodes(), 1.0);
  const VtkGrid g = parse_vtk(vtk_string(box, flow, conc));
  EXPECT_EQ(g.points.size(), 27u);
  for (const auto& u : g.velocity) EXPECT_EQ(u, Vec3{});
}

TEST(Vtk, MismatchedFieldsAreRejected) {
  const TetMesh box = build_box_mesh({{0, 0, 0}, {0.5, 0.5, 0.5}}, 2);
  FlowField flow;
  flow.velocity.assign(3, Vec3{});
  ConcentrationField conc;
  conc.concentration.assign(box.num_nodes(), 1.0);
  EXPECT_THROW(vtk_string(box, flow, conc), ContractError);
}
