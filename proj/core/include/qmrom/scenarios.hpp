#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qmrom/fem.hpp"
#include "qmrom/integrate.hpp"
#include "qmrom/mesh.hpp"
#include "qmrom/reduction.hpp"

namespace qmrom {

enum class GeometryKind { beam, arch, vk_beam };

struct Geometry {
  GeometryKind kind = GeometryKind::beam;
  double length = 2.0;     // m
  double height = 0.05;    // m
  double radius = 0.0;     // m, arch only
  ArchLength arch_length = ArchLength::chord;
  int nx = 80;             // cells (elements for the von Karman beam) along the length
  int ny = 2;              // cells through the height (continuum only)
  bool operator==(const Geometry&) const = default;
};

/// Uniform traction (N/m) on an edge set. The von Karman beam takes the
/// transverse component as a distributed line load.
struct Traction {
  std::string edge_set = "top";
  double amplitude = 0.0;
  std::array<double, 2> direction{0.0, -1.0};
  bool operator==(const Traction&) const = default;
};

/// Output point: the node nearest (x, y) and a displacement component
/// (0 = x, 1 = y; the von Karman beam adds 2 = rotation).
struct Probe {
  double x = 0.0;
  double y = 0.0;
  int component = 1;
  bool operator==(const Probe&) const = default;
};

struct ScenarioConfig {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::string name;
  Geometry geometry;
  Material material;
  std::vector<std::string> clamped;
  Traction load;
  Forcing forcing;
  double rayleigh_mass = 0.0;
  double rayleigh_stiffness = 0.0;
  IntegratorConfig integrator;
  std::vector<Method> methods;
  std::vector<Index> mode_counts;
  Probe probe;

  /// Structural checks that do not need the mesh; build_model checks edge sets.
  void validate() const;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Human-readable JSON; see docs/formats.md.
std::string scenario_to_json(const ScenarioConfig& config);
/// Throws InvalidArgument on malformed input or an unsupported schema version.
ScenarioConfig scenario_from_json(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioConfig& config, const std::filesystem::path& path);

/// 64-bit FNV-1a digest of the canonical JSON form, as 16 hex digits.
std::string scenario_hash(const ScenarioConfig& config);

/// beam_cc, arch, cantilever, beam_cc_vk and their *_desk variants.
const std::map<std::string, ScenarioConfig, std::less<>>& builtin_scenarios();
/// Throws NotFound for unknown names.
const ScenarioConfig& builtin_scenario(std::string_view name);

/// Mesh of a continuum scenario.
Mesh build_mesh(const Geometry& geometry);
/// Model with load pattern, forcing and damping applied.
std::unique_ptr<StructuralModel> build_model(const ScenarioConfig& config);
/// Free dof observed by the probe; InvalidArgument if it is constrained.
Index probe_dof(const StructuralModel& model, const ScenarioConfig& config);

}  // namespace qmrom
