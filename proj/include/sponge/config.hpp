#ifndef SPONGE_CONFIG_HPP
#define SPONGE_CONFIG_HPP

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "sponge/errors.hpp"
#include "sponge/flow.hpp"
#include "sponge/growth.hpp"
#include "sponge/remesh.hpp"
#include "sponge/tet_mesh.hpp"
#include "sponge/transport.hpp"

namespace sponge {

struct BoxConfig {
  Vec3 size{0.5, 0.5, 0.5};
  int resolution = 4;
  std::size_t max_nodes = kDefaultNodeBudget;

  Box domain() const { return {{0.0, 0.0, 0.0}, size}; }
  Vec3 spacing() const { return size / static_cast<double>(1 << (resolution - 1)); }
  friend bool operator==(const BoxConfig&, const BoxConfig&) = default;
};

struct SpongeConfig {
  double radius = 0.06;
  int subdivisions = 3;
  double jitter = 0.05;         // half-width of the x/y placement offset, m
  double center_height = 0.25;  // icosphere center above the substratum, in radii
  double snap_fraction = 0.25;  // node-to-surface snap distance, in grid spacings
  friend bool operator==(const SpongeConfig&, const SpongeConfig&) = default;
};

struct SolverSettings {
  double flow_rel_tol = 1e-3;
  int flow_max_iter = 100;
  double transport_rel_tol = 1e-6;
  int transport_max_iter = 25;
  double linear_rel_tol = 1e-6;
  int linear_max_iter = 100;
  bool viscosity_continuation = true;

  FlowSolverConfig flow() const {
    FlowSolverConfig cfg;
    cfg.newton.rel_tol = flow_rel_tol;
    cfg.newton.max_iter = flow_max_iter;
    cfg.newton.linear = {linear_rel_tol, linear_max_iter};
    cfg.viscosity_continuation = viscosity_continuation;
    return cfg;
  }
  TransportSolverConfig transport() const {
    TransportSolverConfig cfg;
    cfg.newton.rel_tol = transport_rel_tol;
    cfg.newton.max_iter = transport_max_iter;
    cfg.newton.linear = {linear_rel_tol, linear_max_iter};
    return cfg;
  }
  friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

struct OutputConfig {
  std::string directory = "out";
  bool emit_obj = true;
  bool emit_vtk = false;
  std::string log_level = "info";
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct SimConfig {
  BoxConfig box;
  SpongeConfig sponge;
  FluidParams fluid;
  TransportParams transport;
  GrowthParams growth;
  RemeshParams remesh;
  SolverSettings solver;
  int iterations = 50;
  std::uint64_t seed = 1;
  OutputConfig output;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

namespace config_detail {

struct Field {
  std::string key;
  std::function<void(SimConfig&, const std::string&)> parse;
  std::function<std::string(const SimConfig&)> print;
};

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

inline long long to_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long out = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

inline std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  if (!v.empty() && v[0] == '-') throw ConfigError(key + ": expected a non-negative integer");
  const unsigned long long out = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline std::string fmt_double(double v) { return fmt::format("{}", v); }  // shortest round-trip

template <typename Get>
Field real(std::string key, Get get) {
  return {key,
          [get, key](SimConfig& c, const std::string& v) { get(c) = to_double(key, v); },
          [get](const SimConfig& c) { return fmt_double(get(const_cast<SimConfig&>(c))); }};
}

template <typename Get>
Field integer(std::string key, Get get) {
  return {key,
          [get, key](SimConfig& c, const std::string& v) {
            const long long x = to_integer(key, v);
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
              throw ConfigError(key + ": integer out of range");
            }
            get(c) = static_cast<int>(x);
          },
          [get](const SimConfig& c) { return std::to_string(get(const_cast<SimConfig&>(c))); }};
}

template <typename Get>
Field unsigned_integer(std::string key, Get get) {
  return {key,
          [get, key](SimConfig& c, const std::string& v) {
            get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(to_unsigned(key, v));
          },
          [get](const SimConfig& c) { return std::to_string(get(const_cast<SimConfig&>(c))); }};
}

template <typename Get>
Field boolean(std::string key, Get get) {
  return {key,
          [get, key](SimConfig& c, const std::string& v) { get(c) = to_bool(key, v); },
          [get](const SimConfig& c) {
            return std::string(get(const_cast<SimConfig&>(c)) ? "true" : "false");
          }};
}

template <typename Get>
Field text(std::string key, Get get) {
  return {key, [get](SimConfig& c, const std::string& v) { get(c) = v; },
          [get](const SimConfig& c) { return get(const_cast<SimConfig&>(c)); }};
}

inline void parse_emit(const std::string& key, const std::string& v, OutputConfig& out) {
  out.emit_obj = out.emit_vtk = false;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item == "obj") out.emit_obj = true;
    else if (item == "vtk") out.emit_vtk = true;
    else if (item == "none" || item.empty()) continue;
    else throw ConfigError(key + ": unknown format '" + item + "' (expected obj, vtk, none)");
  }
}

inline std::string print_emit(const OutputConfig& out) {
  if (out.emit_obj && out.emit_vtk) return "obj,vtk";
  if (out.emit_obj) return "obj";
  if (out.emit_vtk) return "vtk";
  return "none";
}

// Every accepted key, in serialization order.
inline const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = [] {
    std::vector<Field> f;
    f.push_back(real("box.length_x", [](SimConfig& c) -> double& { return c.box.size.x; }));
    f.push_back(real("box.length_y", [](SimConfig& c) -> double& { return c.box.size.y; }));
    f.push_back(real("box.length_z", [](SimConfig& c) -> double& { return c.box.size.z; }));
    f.push_back(integer("box.resolution", [](SimConfig& c) -> int& { return c.box.resolution; }));
    f.push_back(unsigned_integer("box.max_nodes",
                                 [](SimConfig& c) -> std::size_t& { return c.box.max_nodes; }));
    f.push_back(real("sponge.radius", [](SimConfig& c) -> double& { return c.sponge.radius; }));
    f.push_back(integer("sponge.subdivisions",
                        [](SimConfig& c) -> int& { return c.sponge.subdivisions; }));
    f.push_back(real("sponge.jitter", [](SimConfig& c) -> double& { return c.sponge.jitter; }));
    f.push_back(real("sponge.center_height",
                     [](SimConfig& c) -> double& { return c.sponge.center_height; }));
    f.push_back(real("sponge.snap_fraction",
                     [](SimConfig& c) -> double& { return c.sponge.snap_fraction; }));
    f.push_back(real("fluid.density", [](SimConfig& c) -> double& { return c.fluid.density; }));
    f.push_back(real("fluid.viscosity", [](SimConfig& c) -> double& { return c.fluid.viscosity; }));
    f.push_back(real("fluid.inlet_speed",
                     [](SimConfig& c) -> double& { return c.fluid.inlet_speed; }));
    f.push_back(real("fluid.body_force_x",
                     [](SimConfig& c) -> double& { return c.fluid.body_force.x; }));
    f.push_back(real("fluid.body_force_y",
                     [](SimConfig& c) -> double& { return c.fluid.body_force.y; }));
    f.push_back(real("fluid.body_force_z",
                     [](SimConfig& c) -> double& { return c.fluid.body_force.z; }));
    f.push_back(real("transport.diffusivity",
                     [](SimConfig& c) -> double& { return c.transport.diffusivity; }));
    f.push_back(real("transport.wall_concentration",
                     [](SimConfig& c) -> double& { return c.transport.wall_concentration; }));
    f.push_back(real("growth.perturb_radius",
                     [](SimConfig& c) -> double& { return c.growth.perturb_radius; }));
    f.push_back(real("growth.probe_offset_max",
                     [](SimConfig& c) -> double& { return c.growth.probe_offset_max; }));
    f.push_back(integer("growth.probe_samples",
                        [](SimConfig& c) -> int& { return c.growth.probe_samples; }));
    f.push_back(real("growth.t_give", [](SimConfig& c) -> double& { return c.growth.t_give; }));
    f.push_back(real("growth.iroquois_threshold",
                     [](SimConfig& c) -> double& { return c.growth.iroquois_threshold; }));
    f.push_back(real("growth.growth_rate",
                     [](SimConfig& c) -> double& { return c.growth.growth_rate; }));
    f.push_back(real("growth.l_max", [](SimConfig& c) -> double& { return c.growth.l_max; }));
    f.push_back(real("growth.half_saturation",
                     [](SimConfig& c) -> double& { return c.growth.half_saturation; }));
    f.push_back(real("growth.kinetic_order",
                     [](SimConfig& c) -> double& { return c.growth.kinetic_order; }));
    f.push_back(real("growth.max_growth",
                     [](SimConfig& c) -> double& { return c.growth.max_growth; }));
    f.push_back(real("remesh.target_edge",
                     [](SimConfig& c) -> double& { return c.remesh.target_edge; }));
    f.push_back(real("remesh.split_factor",
                     [](SimConfig& c) -> double& { return c.remesh.split_factor; }));
    f.push_back(real("remesh.fuse_factor",
                     [](SimConfig& c) -> double& { return c.remesh.fuse_factor; }));
    f.push_back(integer("remesh.max_passes",
                        [](SimConfig& c) -> int& { return c.remesh.max_passes; }));
    f.push_back(real("solver.flow_rel_tol",
                     [](SimConfig& c) -> double& { return c.solver.flow_rel_tol; }));
    f.push_back(integer("solver.flow_max_iter",
                        [](SimConfig& c) -> int& { return c.solver.flow_max_iter; }));
    f.push_back(real("solver.transport_rel_tol",
                     [](SimConfig& c) -> double& { return c.solver.transport_rel_tol; }));
    f.push_back(integer("solver.transport_max_iter",
                        [](SimConfig& c) -> int& { return c.solver.transport_max_iter; }));
    f.push_back(real("solver.linear_rel_tol",
                     [](SimConfig& c) -> double& { return c.solver.linear_rel_tol; }));
    f.push_back(integer("solver.linear_max_iter",
                        [](SimConfig& c) -> int& { return c.solver.linear_max_iter; }));
    f.push_back(boolean("solver.viscosity_continuation",
                        [](SimConfig& c) -> bool& { return c.solver.viscosity_continuation; }));
    f.push_back(integer("run.iterations", [](SimConfig& c) -> int& { return c.iterations; }));
    f.push_back(unsigned_integer("run.seed", [](SimConfig& c) -> std::uint64_t& { return c.seed; }));
    f.push_back(text("output.directory",
                     [](SimConfig& c) -> std::string& { return c.output.directory; }));
    f.push_back({"output.emit",
                 [](SimConfig& c, const std::string& v) { parse_emit("output.emit", v, c.output); },
                 [](const SimConfig& c) { return print_emit(c.output); }});
    f.push_back(text("output.log_level",
                     [](SimConfig& c) -> std::string& { return c.output.log_level; }));
    return f;
  }();
  return kFields;
}

}  // namespace config_detail

/// Checks every parameter invariant; the message names the offending key.
inline void validate(const SimConfig& c) {
  auto need = [](bool ok, const char* key, const std::string& why) {
    if (!ok) throw ConfigError(std::string(key) + ": " + why);
  };
  need(c.box.size.x > 0, "box.length_x", "must be positive");
  need(c.box.size.y > 0, "box.length_y", "must be positive");
  need(c.box.size.z > 0, "box.length_z", "must be positive");
  need(c.box.resolution >= 1 && c.box.resolution <= 21, "box.resolution", "must be in [1, 21]");
  need(c.box.max_nodes > 0, "box.max_nodes", "must be positive");
  need(c.sponge.radius > 0, "sponge.radius", "must be positive");
  need(c.sponge.subdivisions >= 0 && c.sponge.subdivisions <= 7, "sponge.subdivisions",
       "must be in [0, 7]");
  need(c.sponge.jitter >= 0, "sponge.jitter", "must be non-negative");
  need(c.sponge.center_height >= -1 && c.sponge.center_height <= 1, "sponge.center_height",
       "must be in [-1, 1] radii");
  need(c.sponge.snap_fraction >= 0 && c.sponge.snap_fraction < 1, "sponge.snap_fraction",
       "must be in [0, 1)");
  need(c.fluid.density > 0, "fluid.density", "must be positive");
  need(c.fluid.viscosity > 0, "fluid.viscosity", "must be positive");
  need(c.fluid.inlet_speed >= 0, "fluid.inlet_speed", "must be non-negative");
  need(c.transport.diffusivity > 0, "transport.diffusivity", "must be positive");
  need(c.transport.wall_concentration > 0, "transport.wall_concentration", "must be positive");
  const GrowthParams& g = c.growth;
  need(g.perturb_radius >= 0, "growth.perturb_radius", "must be non-negative");
  need(g.probe_offset_max > 0, "growth.probe_offset_max", "must be positive");
  need(g.probe_samples >= 2, "growth.probe_samples", "must be at least 2");
  need(g.t_give >= 0 && g.t_give <= 1, "growth.t_give", "must be in [0, 1]");
  need(g.iroquois_threshold >= 0 && g.iroquois_threshold <= 1, "growth.iroquois_threshold",
       "must be in [0, 1]");
  need(g.growth_rate > 0, "growth.growth_rate", "must be positive");
  need(g.l_max > 0, "growth.l_max", "must be positive");
  need(g.half_saturation > 0, "growth.half_saturation", "must be positive");
  need(g.kinetic_order >= 1, "growth.kinetic_order", "must be at least 1");
  need(g.max_growth >= 0, "growth.max_growth", "must be non-negative");
  need(c.remesh.target_edge >= 0, "remesh.target_edge", "must be non-negative (0 = capture)");
  need(c.remesh.split_factor > 1, "remesh.split_factor", "must exceed 1");
  need(c.remesh.fuse_factor > 0 && c.remesh.fuse_factor < 1, "remesh.fuse_factor",
       "must be in (0, 1)");
  need(c.remesh.fuse_factor < c.remesh.split_factor, "remesh.fuse_factor",
       "must be below remesh.split_factor");
  need(c.remesh.max_passes >= 1, "remesh.max_passes", "must be at least 1");
  need(c.solver.flow_rel_tol > 0, "solver.flow_rel_tol", "must be positive");
  need(c.solver.flow_max_iter >= 1, "solver.flow_max_iter", "must be at least 1");
  need(c.solver.transport_rel_tol > 0, "solver.transport_rel_tol", "must be positive");
  need(c.solver.transport_max_iter >= 1, "solver.transport_max_iter", "must be at least 1");
  need(c.solver.linear_rel_tol > 0, "solver.linear_rel_tol", "must be positive");
  need(c.solver.linear_max_iter >= 1, "solver.linear_max_iter", "must be at least 1");
  need(c.iterations >= 0, "run.iterations", "must be non-negative");
  const std::string& lvl = c.output.log_level;
  need(lvl == "off" || lvl == "error" || lvl == "warn" || lvl == "info" || lvl == "debug",
       "output.log_level", "must be one of off, error, warn, info, debug");

  // Placement: the jittered sponge keeps one grid cell clear of the inlet
  // and outlet, and fits laterally and vertically.
  const Vec3 h = c.box.spacing();
  const double reach = c.sponge.radius + c.sponge.jitter;
  need(reach <= 0.5 * c.box.size.x - h.x, "sponge.jitter",
       "sponge radius plus jitter leaves less than one grid cell to the inlet/outlet");
  need(reach <= 0.5 * c.box.size.y, "sponge.jitter", "sponge does not fit across the box");
  need((c.sponge.center_height + 1.0) * c.sponge.radius <= c.box.size.z, "sponge.radius",
       "sponge is taller than the box");
}

/// Parses `key = value` lines; '#' starts a comment. Unknown keys are errors.
/// growth.probe_offset_max defaults to two grid spacings of the configured box.
inline SimConfig load_config(const std::string& text) {
  using namespace config_detail;
  std::map<std::string, const Field*> index;
  for (const auto& f : fields()) index.emplace(f.key, &f);

  SimConfig cfg;
  bool offset_given = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    try {
      it->second->parse(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
    offset_given |= key == "growth.probe_offset_max";
  }
  if (!offset_given && cfg.box.resolution >= 1 && cfg.box.resolution <= 21) {
    const Vec3 h = cfg.box.spacing();
    cfg.growth.probe_offset_max = 2.0 * std::min({h.x, h.y, h.z});
  }
  validate(cfg);
  return cfg;
}

inline SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

/// Full document with every key; load_config(serialize_config(c)) == c.
inline std::string serialize_config(const SimConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : config_detail::fields()) {
    const std::string sec = f.key.substr(0, f.key.find('.'));
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += "# " + sec + "\n";
      section = sec;
    }
    out += f.key + " = " + f.print(cfg) + "\n";
  }
  return out;
}

}  // namespace sponge

#endif  // SPONGE_CONFIG_HPP
