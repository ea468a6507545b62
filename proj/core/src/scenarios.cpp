#include "qmrom/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "qmrom/errors.hpp"
#include "qmrom/vk_beam.hpp"

namespace qmrom {
namespace {

using json = nlohmann::ordered_json;

std::string_view kind_name(GeometryKind k) {
  switch (k) {
    case GeometryKind::beam: return "beam";
    case GeometryKind::arch: return "arch";
    case GeometryKind::vk_beam: return "vk_beam";
  }
  return "beam";
}

GeometryKind parse_kind(const std::string& s) {
  if (s == "beam") return GeometryKind::beam;
  if (s == "arch") return GeometryKind::arch;
  if (s == "vk_beam") return GeometryKind::vk_beam;
  throw InvalidArgument("unknown geometry kind '" + s + "'");
}

void require_keys(const json& j, std::initializer_list<std::string_view> allowed,
                  const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidArgument("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

json to_json(const ScenarioConfig& c) {
  const auto& g = c.geometry;
  const auto& m = c.material;
  const auto& ic = c.integrator;
  json forcing = json::array();
  for (const auto& t : c.forcing.terms) {
    forcing.push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}});
  }
  json methods = json::array();
  for (Method mt : c.methods) methods.push_back(std::string(method_name(mt)));
  return json{
      {"schema_version", c.schema_version},
      {"name", c.name},
      {"geometry",
       {{"kind", std::string(kind_name(g.kind))},
        {"length", g.length},
        {"height", g.height},
        {"radius", g.radius},
        {"arch_length", g.arch_length == ArchLength::chord ? "chord" : "arc"},
        {"nx", g.nx},
        {"ny", g.ny}}},
      {"material",
       {{"youngs_modulus", m.youngs_modulus},
        {"poisson_ratio", m.poisson_ratio},
        {"density", m.density},
        {"thickness", m.thickness}}},
      {"clamped", c.clamped},
      {"load",
       {{"edge_set", c.load.edge_set},
        {"amplitude", c.load.amplitude},
        {"direction", c.load.direction}}},
      {"forcing", forcing},
      {"damping", {{"mass", c.rayleigh_mass}, {"stiffness", c.rayleigh_stiffness}}},
      {"integrator",
       {{"alpha", ic.alpha},
        {"dt", ic.dt},
        {"t_end", ic.t_end},
        {"dt_save", ic.dt_save},
        {"displacement_ceiling", ic.displacement_ceiling},
        {"newton",
         {{"rel_tol", ic.newton.rel_tol},
          {"abs_tol", ic.newton.abs_tol},
          {"max_iter", ic.newton.max_iter}}}}},
      {"methods", methods},
      {"mode_counts", c.mode_counts},
      {"probe", {{"x", c.probe.x}, {"y", c.probe.y}, {"component", c.probe.component}}},
  };
}

ScenarioConfig from_json(const json& j) {
  require_keys(j,
               {"schema_version", "name", "geometry", "material", "clamped", "load", "forcing",
                "damping", "integrator", "methods", "mode_counts", "probe"},
               "scenario");
  ScenarioConfig c;
  if (!j.contains("schema_version")) throw InvalidArgument("missing schema_version");
  c.schema_version = j.at("schema_version").get<int>();
  if (c.schema_version != ScenarioConfig::kSchemaVersion) {
    throw InvalidArgument("unsupported schema_version " + std::to_string(c.schema_version));
  }
  read(j, "name", c.name);
  if (const auto it = j.find("geometry"); it != j.end()) {
    const json& g = *it;
    require_keys(g, {"kind", "length", "height", "radius", "arch_length", "nx", "ny"}, "geometry");
    if (g.contains("kind")) c.geometry.kind = parse_kind(g.at("kind").get<std::string>());
    read(g, "length", c.geometry.length);
    read(g, "height", c.geometry.height);
    read(g, "radius", c.geometry.radius);
    if (g.contains("arch_length")) {
      const auto s = g.at("arch_length").get<std::string>();
      if (s == "chord") {
        c.geometry.arch_length = ArchLength::chord;
      } else if (s == "arc") {
        c.geometry.arch_length = ArchLength::arc;
      } else {
        throw InvalidArgument("arch_length must be 'chord' or 'arc'");
      }
    }
    read(g, "nx", c.geometry.nx);
    read(g, "ny", c.geometry.ny);
  }
  if (const auto it = j.find("material"); it != j.end()) {
    require_keys(*it, {"youngs_modulus", "poisson_ratio", "density", "thickness"}, "material");
    read(*it, "youngs_modulus", c.material.youngs_modulus);
    read(*it, "poisson_ratio", c.material.poisson_ratio);
    read(*it, "density", c.material.density);
    read(*it, "thickness", c.material.thickness);
  }
  read(j, "clamped", c.clamped);
  if (const auto it = j.find("load"); it != j.end()) {
    require_keys(*it, {"edge_set", "amplitude", "direction"}, "load");
    read(*it, "edge_set", c.load.edge_set);
    read(*it, "amplitude", c.load.amplitude);
    read(*it, "direction", c.load.direction);
  }
  if (const auto it = j.find("forcing"); it != j.end()) {
    if (!it->is_array()) throw InvalidArgument("forcing must be an array");
    for (const auto& t : *it) {
      require_keys(t, {"amplitude", "frequency"}, "forcing term");
      Forcing::Term term;
      read(t, "amplitude", term.amplitude);
      read(t, "frequency", term.frequency);
      c.forcing.terms.push_back(term);
    }
  }
  if (const auto it = j.find("damping"); it != j.end()) {
    require_keys(*it, {"mass", "stiffness"}, "damping");
    read(*it, "mass", c.rayleigh_mass);
    read(*it, "stiffness", c.rayleigh_stiffness);
  }
  if (const auto it = j.find("integrator"); it != j.end()) {
    require_keys(*it, {"alpha", "dt", "t_end", "dt_save", "displacement_ceiling", "newton"},
                 "integrator");
    auto& ic = c.integrator;
    read(*it, "alpha", ic.alpha);
    read(*it, "dt", ic.dt);
    read(*it, "t_end", ic.t_end);
    read(*it, "dt_save", ic.dt_save);
    read(*it, "displacement_ceiling", ic.displacement_ceiling);
    if (const auto nt = it->find("newton"); nt != it->end()) {
      require_keys(*nt, {"rel_tol", "abs_tol", "max_iter"}, "newton");
      read(*nt, "rel_tol", ic.newton.rel_tol);
      read(*nt, "abs_tol", ic.newton.abs_tol);
      read(*nt, "max_iter", ic.newton.max_iter);
    }
  }
  if (const auto it = j.find("methods"); it != j.end()) {
    for (const auto& m : *it) c.methods.push_back(parse_method(m.get<std::string>()));
  }
  read(j, "mode_counts", c.mode_counts);
  if (const auto it = j.find("probe"); it != j.end()) {
    require_keys(*it, {"x", "y", "component"}, "probe");
    read(*it, "x", c.probe.x);
    read(*it, "y", c.probe.y);
    read(*it, "component", c.probe.component);
  }
  c.validate();
  return c;
}

ScenarioConfig make_beam(std::string name, int nx, double t_end) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.geometry = {GeometryKind::beam, 2.0, 0.05, 0.0, ArchLength::chord, nx, 2};
  c.clamped = {"left", "right"};
  c.load = {"top", 5e5, {0.0, -1.0}};
  c.forcing.terms = {{1.0, 72.0}, {1.0, 100.0}};
  c.integrator.alpha = 0.1;
  c.integrator.dt = 1e-4;
  c.integrator.dt_save = 1e-4;
  c.integrator.t_end = t_end;
  c.methods = all_methods();
  c.probe = {1.0, 0.025, 1};
  return c;
}

ScenarioConfig make_arch(std::string name, int nx, double t_end) {
  ScenarioConfig c = make_beam(std::move(name), nx, t_end);
  c.geometry.kind = GeometryKind::arch;
  c.geometry.radius = 8.0;
  c.load = {"top", 3e5, {0.0, -1.0}};
  c.forcing.terms = {{1.0, 115.0}, {1.0, 150.0}};
  return c;
}

ScenarioConfig make_cantilever(std::string name, int nx, double t_end) {
  ScenarioConfig c = make_beam(std::move(name), nx, t_end);
  c.clamped = {"left"};
  c.load = {"right", 3e6, {0.0, -1.0}};
  c.forcing.terms = {{1.0, 20.0}, {1.0, 48.0}};
  c.probe = {2.0, 0.025, 1};
  return c;
}

ScenarioConfig make_vk(std::string name, int n_elements, double t_end) {
  ScenarioConfig c = make_beam(std::move(name), n_elements, t_end);
  c.geometry.kind = GeometryKind::vk_beam;
  c.geometry.ny = 1;
  c.probe = {1.0, 0.0, 1};
  return c;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (schema_version != kSchemaVersion) throw InvalidArgument("unsupported schema_version");
  const auto& g = geometry;
  if (!(g.length > 0.0) || !(g.height > 0.0)) throw InvalidArgument("geometry must be positive");
  if (g.nx < 1 || g.ny < 1) throw InvalidArgument("mesh resolution must be at least 1");
  if (g.kind == GeometryKind::arch) {
    if (!(g.radius > 0.0)) throw InvalidArgument("arch radius must be positive");
    if (g.arch_length == ArchLength::chord && g.length >= 2.0 * g.radius) {
      throw InvalidArgument("arch chord exceeds the diameter");
    }
  }
  if (g.kind == GeometryKind::vk_beam) {
    for (const auto& s : clamped) {
      if (s != "left" && s != "right") {
        throw InvalidArgument("von Karman beam can only clamp 'left' or 'right'");
      }
    }
    if (std::find(clamped.begin(), clamped.end(), "left") == clamped.end()) {
      throw InvalidArgument("von Karman beam needs a clamped left end");
    }
  }
  material.validate();
  for (const auto& t : forcing.terms) {
    if (!(t.frequency > 0.0)) throw InvalidArgument("forcing frequencies must be positive");
    if (!std::isfinite(t.amplitude)) throw InvalidArgument("forcing amplitude must be finite");
  }
  if (!std::isfinite(load.amplitude)) throw InvalidArgument("load amplitude must be finite");
  if (std::hypot(load.direction[0], load.direction[1]) == 0.0) {
    throw InvalidArgument("load direction must be nonzero");
  }
  if (rayleigh_mass < 0.0 || rayleigh_stiffness < 0.0) {
    throw InvalidArgument("Rayleigh factors must be non-negative");
  }
  integrator.validate();
  for (Index n : mode_counts) {
    if (n < 1) throw InvalidArgument("mode counts must be positive");
  }
  if (probe.component < 0 || probe.component > (g.kind == GeometryKind::vk_beam ? 2 : 1)) {
    throw InvalidArgument("probe component out of range");
  }
}

std::string scenario_to_json(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

ScenarioConfig scenario_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed scenario: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write scenario file " + path.string());
  out << scenario_to_json(config);
}

std::string scenario_hash(const ScenarioConfig& config) {
  const std::string canonical = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

const std::map<std::string, ScenarioConfig, std::less<>>& builtin_scenarios() {
  static const auto table = [] {
    std::map<std::string, ScenarioConfig, std::less<>> t;
    auto add = [&](ScenarioConfig c, std::vector<Index> modes) {
      c.mode_counts = std::move(modes);
      t.emplace(c.name, std::move(c));
    };
    add(make_beam("beam_cc", 80, 0.2), {5, 10, 15, 20});
    add(make_beam("beam_cc_desk", 40, 0.05), {5, 10});
    add(make_arch("arch", 82, 0.2), {5, 10, 15, 20});
    add(make_arch("arch_desk", 42, 0.05), {5, 10});
    add(make_cantilever("cantilever", 80, 0.2), {5, 10, 15, 20});
    add(make_cantilever("cantilever_desk", 40, 0.05), {5, 10});
    add(make_vk("beam_cc_vk", 80, 0.2), {5, 10, 15, 20});
    add(make_vk("beam_cc_vk_desk", 40, 0.05), {5, 10});
    return t;
  }();
  return table;
}

const ScenarioConfig& builtin_scenario(std::string_view name) {
  const auto& table = builtin_scenarios();
  const auto it = table.find(name);
  if (it == table.end()) throw NotFound("unknown scenario '" + std::string(name) + "'");
  return it->second;
}

Mesh build_mesh(const Geometry& g) {
  switch (g.kind) {
    case GeometryKind::beam: return generate_beam_mesh(g.length, g.height, g.nx, g.ny);
    case GeometryKind::arch:
      return generate_arch_mesh(g.length, g.height, g.radius, g.nx, g.ny, g.arch_length);
    case GeometryKind::vk_beam: break;
  }
  throw InvalidArgument("geometry kind has no continuum mesh");
}

std::unique_ptr<StructuralModel> build_model(const ScenarioConfig& config) {
  config.validate();
  const Point2 dir(config.load.direction[0], config.load.direction[1]);
  std::unique_ptr<StructuralModel> model;
  if (config.geometry.kind == GeometryKind::vk_beam) {
    const bool both = std::find(config.clamped.begin(), config.clamped.end(), "right") !=
                      config.clamped.end();
    auto vk = std::make_unique<VkBeamModel>(config.geometry.length, config.geometry.height,
                                            config.geometry.nx, config.material, both);
    vk->set_load_pattern(vk->distributed_load(config.load.amplitude * dir.y() / dir.norm()));
    model = std::move(vk);
  } else {
    Mesh mesh = build_mesh(config.geometry);
    for (const auto& s : config.clamped) {
      if (!mesh.edge_sets.contains(s)) throw InvalidArgument("unknown clamped edge set '" + s + "'");
    }
    if (!mesh.edge_sets.contains(config.load.edge_set)) {
      throw InvalidArgument("unknown load edge set '" + config.load.edge_set + "'");
    }
    auto fe = std::make_unique<FEModel>(std::move(mesh), config.material, config.clamped);
    fe->set_load_pattern(fe->assemble_load_pattern(config.load.edge_set, config.load.amplitude, dir));
    if (config.rayleigh_mass > 0.0 || config.rayleigh_stiffness > 0.0) {
      fe->set_rayleigh_damping(config.rayleigh_mass, config.rayleigh_stiffness);
    }
    model = std::move(fe);
  }
  model->set_forcing(config.forcing);
  return model;
}

Index probe_dof(const StructuralModel& model, const ScenarioConfig& config) {
  const auto& p = config.probe;
  Index dof = -1;
  if (const auto* vk = dynamic_cast<const VkBeamModel*>(&model)) {
    Index best = 0;
    for (Index i = 1; i < vk->node_count(); ++i) {
      if (std::abs(vk->node_x(i) - p.x) < std::abs(vk->node_x(best) - p.x)) best = i;
    }
    dof = vk->dof(best, static_cast<VkBeamModel::Component>(p.component));
  } else if (const auto* fe = dynamic_cast<const FEModel*>(&model)) {
    const auto& nodes = fe->mesh().nodes;
    const Point2 target(p.x, p.y);
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < static_cast<Index>(nodes.size()); ++i) {
      const double d = (nodes[static_cast<std::size_t>(i)] - target).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    dof = fe->dof(best, p.component);
  } else {
    throw InvalidArgument("probe_dof needs a finite element or von Karman beam model");
  }
  if (dof < 0) throw InvalidArgument("probe point lies on a constrained dof");
  return dof;
}

}  // namespace qmrom
