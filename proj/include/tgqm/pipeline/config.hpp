#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tgqm/affordance/affordance.hpp"
#include "tgqm/geom/mesh.hpp"
#include "tgqm/hand/hand.hpp"
#include "tgqm/metrics/metrics.hpp"

namespace tgqm {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ObjectLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One object of a run: either a bundled procedural shape or a mesh file.
struct ObjectSpec {
  std::string id;
  std::string builtin;          // empty when `path` is used
  std::filesystem::path path;   // OFF or OBJ
};

struct LoadedObject {
  std::string id;
  Mesh mesh;
};

struct RenderOptions {
  bool enabled = false;
  std::filesystem::path directory;  // rasters named <record hash>.grim
  int width = 128;
  int height = 128;
  double fov_deg = 60.0;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::uint64_t samples = 1000;
  int workers = 1;  // 0 = one per hardware thread
  std::vector<ObjectSpec> objects;
  MetricConfig metrics;
  AffordanceConfig affordance;
  std::string affordance_preset = "default";
  HandConfig hand;
  RenderOptions render;

  /// Throws ConfigError. Single-grasp commands pass require_objects=false.
  void validate(bool require_objects = true) const;
};

/// Parses a run configuration. Relative mesh paths resolve against
/// `base_dir`. Unknown keys are rejected. Throws ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
/// Fully explicit form (absolute paths, every field present).
nlohmann::json to_json(const RunConfig& cfg);

AffordanceConfig affordance_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AffordanceConfig& cfg);

/// Loads every object; throws ObjectLoadError naming the failing entry.
std::vector<LoadedObject> load_objects(const RunConfig& cfg);

}  // namespace tgqm
