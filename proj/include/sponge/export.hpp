#ifndef SPONGE_EXPORT_HPP
#define SPONGE_EXPORT_HPP

#include <cerrno>
#include <cstring>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "sponge/errors.hpp"
#include "sponge/flow.hpp"
#include "sponge/tet_mesh.hpp"
#include "sponge/transport.hpp"
#include "sponge/tri_mesh.hpp"

namespace sponge {

class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string obj_string(const TriMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 48 + mesh.triangles.size() * 24);
  for (const auto& v : mesh.vertices) {
    fmt::format_to(std::back_inserter(out), "v {:.9g} {:.9g} {:.9g}\n", v.x, v.y, v.z);
  }
  for (const auto& t : mesh.triangles) {
    fmt::format_to(std::back_inserter(out), "f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1);
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": " + std::strerror(errno));
  out << text;
  out.close();
  if (!out) throw IoError(path.string() + ": write failed");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": " + std::strerror(errno));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void export_surface(const TriMesh& mesh, const std::filesystem::path& path) {
  write_text(path, obj_string(mesh));
}

/// Reads `v` and triangular `f` records; face tokens may carry /vt/vn suffixes.
inline TriMesh parse_obj(const std::string& text) {
  TriMesh mesh;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z)) {
        throw IoError("OBJ line " + std::to_string(line_no) + ": malformed vertex");
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        int i = 0;
        const std::string head = tok.substr(0, tok.find('/'));
        const auto [end, ec] = std::from_chars(head.data(), head.data() + head.size(), i);
        if (ec != std::errc{} || end != head.data() + head.size() || i == 0) {
          throw IoError("OBJ line " + std::to_string(line_no) + ": bad face index '" + tok + "'");
        }
        idx.push_back(i > 0 ? i - 1 : static_cast<int>(mesh.vertices.size()) + i);
      }
      if (idx.size() != 3) {
        throw IoError("OBJ line " + std::to_string(line_no) + ": only triangles are supported");
      }
      mesh.triangles.push_back({idx[0], idx[1], idx[2]});
    }
  }
  for (const auto& t : mesh.triangles) {
    for (int v : t) {
      if (v < 0 || v >= static_cast<int>(mesh.vertices.size())) {
        throw IoError("OBJ: face index out of range");
      }
    }
  }
  return mesh;
}

inline TriMesh read_obj(const std::filesystem::path& path) { return parse_obj(read_text(path)); }

/// Legacy ASCII VTK unstructured grid with point data "velocity" and
/// "concentration".
inline std::string vtk_string(const TetMesh& box, const FlowField& flow,
                              const ConcentrationField& conc) {
  const std::size_t n = box.num_nodes();
  if (flow.velocity.size() != n || conc.concentration.size() != n) {
    throw ContractError("export_volume_fields: fields do not match the box mesh");
  }
  std::string out;
  auto put = std::back_inserter(out);
  out += "# vtk DataFile Version 3.0\nsponge growth fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  fmt::format_to(put, "POINTS {} double\n", n);
  for (const auto& p : box.nodes) fmt::format_to(put, "{:.9g} {:.9g} {:.9g}\n", p.x, p.y, p.z);
  fmt::format_to(put, "CELLS {} {}\n", box.num_tets(), 5 * box.num_tets());
  for (const auto& t : box.tets) fmt::format_to(put, "4 {} {} {} {}\n", t[0], t[1], t[2], t[3]);
  fmt::format_to(put, "CELL_TYPES {}\n", box.num_tets());
  for (std::size_t e = 0; e < box.num_tets(); ++e) out += "10\n";
  fmt::format_to(put, "POINT_DATA {}\nVECTORS velocity double\n", n);
  for (const auto& u : flow.velocity) fmt::format_to(put, "{:.9g} {:.9g} {:.9g}\n", u.x, u.y, u.z);
  out += "SCALARS concentration double 1\nLOOKUP_TABLE default\n";
  for (double c : conc.concentration) fmt::format_to(put, "{:.9g}\n", c);
  return out;
}

inline void export_volume_fields(const TetMesh& box, const FlowField& flow,
                                 const ConcentrationField& conc,
                                 const std::filesystem::path& path) {
  write_text(path, vtk_string(box, flow, conc));
}

struct VtkGrid {
  std::vector<Vec3> points;
  std::vector<std::vector<int>> cells;
  std::vector<int> cell_types;
  std::vector<Vec3> velocity;
  std::vector<double> concentration;
};

/// Reader for the subset of legacy VTK written above.
inline VtkGrid parse_vtk(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  for (int i = 0; i < 4; ++i) {
    if (!std::getline(in, line)) throw IoError("VTK: truncated header");
    if (i == 0 && line.rfind("# vtk DataFile", 0) != 0) throw IoError("VTK: bad magic line");
    if (i == 2 && line != "ASCII") throw IoError("VTK: only ASCII is supported");
    if (i == 3 && line != "DATASET UNSTRUCTURED_GRID") throw IoError("VTK: unexpected dataset");
  }
  VtkGrid g;
  std::string key;
  std::size_t npts = 0;
  auto fail = [](const std::string& what) { throw IoError("VTK: malformed " + what); };
  while (in >> key) {
    if (key == "POINTS") {
      std::string type;
      in >> npts >> type;
      g.points.resize(npts);
      for (auto& p : g.points) {
        if (!(in >> p.x >> p.y >> p.z)) fail("POINTS");
      }
    } else if (key == "CELLS") {
      std::size_t nc = 0, total = 0;
      in >> nc >> total;
      g.cells.resize(nc);
      for (auto& c : g.cells) {
        int k = 0;
        in >> k;
        c.resize(k);
        for (int& v : c) in >> v;
      }
      if (!in) fail("CELLS");
    } else if (key == "CELL_TYPES") {
      std::size_t nc = 0;
      in >> nc;
      g.cell_types.resize(nc);
      for (int& t : g.cell_types) in >> t;
      if (!in) fail("CELL_TYPES");
    } else if (key == "POINT_DATA") {
      std::size_t n = 0;
      in >> n;
      if (n != npts) fail("POINT_DATA count");
    } else if (key == "VECTORS") {
      std::string name, type;
      in >> name >> type;
      std::vector<Vec3> data(npts);
      for (auto& v : data) in >> v.x >> v.y >> v.z;
      if (!in) fail("VECTORS");
      if (name == "velocity") g.velocity = std::move(data);
    } else if (key == "SCALARS") {
      std::string name, type, lookup, table;
      int comps = 1;
      in >> name >> type >> comps >> lookup >> table;
      std::vector<double> data(npts);
      for (double& v : data) in >> v;
      if (!in) fail("SCALARS");
      if (name == "concentration") g.concentration = std::move(data);
    } else {
      fail("section '" + key + "'");
    }
  }
  return g;
}

}  // namespace sponge

#endif  // SPONGE_EXPORT_HPP
