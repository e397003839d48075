#include "tgqm/pipeline/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "tgqm/geom/io.hpp"
#include "tgqm/geom/shapes.hpp"

namespace tgqm {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

// Thresholds may be written as numbers or as the strings "-inf"/"inf".
double threshold(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "-inf" || s == "-infinity") return -std::numeric_limits<double>::infinity();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(where + ": expected a number or \"-inf\"");
}

json threshold_json(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  return v;
}

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') return false;
  }
  return true;
}

}  // namespace

AffordanceConfig affordance_from_json(const json& j) {
  check_keys(j, {"preset", "tau_eps", "tau_ug", "tau_delta", "viab_eps", "viab_eh_sum", "viab_ei"},
             "affordance");
  AffordanceConfig c;
  if (j.contains("preset")) {
    try {
      c = AffordanceConfig::preset(j.at("preset").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("affordance.preset: ") + e.what());
    }
  }
  const std::pair<const char*, double*> fields[] = {
      {"tau_eps", &c.tau_eps},   {"tau_ug", &c.tau_ug},           {"tau_delta", &c.tau_delta},
      {"viab_eps", &c.viab_eps}, {"viab_eh_sum", &c.viab_eh_sum}, {"viab_ei", &c.viab_ei}};
  for (const auto& [key, dst] : fields) {
    if (j.contains(key)) *dst = threshold(j.at(key), std::string("affordance.") + key);
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json to_json(const AffordanceConfig& c) {
  return {{"tau_eps", threshold_json(c.tau_eps)},     {"tau_ug", threshold_json(c.tau_ug)},
          {"tau_delta", threshold_json(c.tau_delta)}, {"viab_eps", threshold_json(c.viab_eps)},
          {"viab_eh_sum", threshold_json(c.viab_eh_sum)},
          {"viab_ei", threshold_json(c.viab_ei)}};
}

void RunConfig::validate(bool require_objects) const {
  if (samples < 1) throw ConfigError("samples must be at least 1");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (require_objects && objects.empty()) throw ConfigError("object list is empty");
  std::set<std::string> ids;
  for (const auto& o : objects) {
    if (!valid_id(o.id)) throw ConfigError("invalid object id '" + o.id + "'");
    if (!ids.insert(o.id).second) throw ConfigError("duplicate object id '" + o.id + "'");
    if (o.builtin.empty() == o.path.empty()) {
      throw ConfigError("object '" + o.id + "' needs exactly one of builtin or mesh");
    }
  }
  try {
    metrics.validate();
    hand.validate();
    affordance.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (render.enabled) {
    if (render.directory.empty()) throw ConfigError("render.directory is required");
    if (render.width < 8 || render.height < 8) throw ConfigError("render size must be >= 8");
    if (!(render.fov_deg > 0 && render.fov_deg < 180)) throw ConfigError("render.fov_deg out of range");
  }
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  check_keys(j, {"seed", "samples", "workers", "objects", "friction", "metrics", "affordance", "hand",
                 "render"},
             "run config");
  RunConfig c;
  read(j, "seed", c.seed, "run config");
  read(j, "samples", c.samples, "run config");
  read(j, "workers", c.workers, "run config");

  if (j.contains("objects")) {
    const json& objs = j.at("objects");
    if (!objs.is_array()) throw ConfigError("objects must be an array");
    if (objs.empty()) throw ConfigError("object list is empty");
    for (const json& o : objs) {
      ObjectSpec s;
      if (o.is_string()) {
        const std::string v = o.get<std::string>();
        const std::filesystem::path p(v);
        const std::string ext = p.extension().string();
        if (ext == ".off" || ext == ".OFF" || ext == ".obj" || ext == ".OBJ") {
          s.id = p.stem().string();
          s.path = p;
        } else {
          s.id = v;
          s.builtin = v;
        }
      } else {
        check_keys(o, {"id", "builtin", "mesh"}, "objects[]");
        std::string mesh;
        read(o, "builtin", s.builtin, "objects[]");
        read(o, "mesh", mesh, "objects[]");
        s.path = mesh;
        read(o, "id", s.id, "objects[]");
        if (s.id.empty()) s.id = s.builtin.empty() ? s.path.stem().string() : s.builtin;
      }
      if (!s.path.empty() && s.path.is_relative() && !base_dir.empty()) s.path = base_dir / s.path;
      c.objects.push_back(std::move(s));
    }
  }

  if (j.contains("friction")) {
    const json& f = j.at("friction");
    check_keys(f, {"mu", "cone_edges"}, "friction");
    read(f, "mu", c.metrics.friction.mu, "friction");
    read(f, "cone_edges", c.metrics.friction.cone_edges, "friction");
  }
  if (j.contains("metrics")) {
    const json& m = j.at("metrics");
    check_keys(m, {"kappa", "epsilon_directions", "epsilon_refine_starts", "wrist_axis"}, "metrics");
    read(m, "kappa", c.metrics.kappa, "metrics");
    read(m, "epsilon_directions", c.metrics.epsilon_directions, "metrics");
    read(m, "epsilon_refine_starts", c.metrics.epsilon_refine_starts, "metrics");
    if (m.contains("wrist_axis")) {
      std::string a;
      read(m, "wrist_axis", a, "metrics");
      for (auto& ch : a) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      if (a == "roll") {
        c.metrics.wrist_axis = WristAxis::Roll;
      } else if (a == "pitch") {
        c.metrics.wrist_axis = WristAxis::Pitch;
      } else {
        throw ConfigError("metrics.wrist_axis must be ROLL or PITCH");
      }
    }
  }
  if (j.contains("affordance")) {
    c.affordance = affordance_from_json(j.at("affordance"));
    if (j.at("affordance").contains("preset")) {
      c.affordance_preset = j.at("affordance").at("preset").get<std::string>();
    }
  }
  if (j.contains("hand")) {
    const json& h = j.at("hand");
    check_keys(h, {"palm_radius", "link1", "link2", "joint_limit_deg", "standoff_factor",
                   "proxy_spacing", "closing_step_deg", "merge_distance"},
               "hand");
    read(h, "palm_radius", c.hand.palm_radius, "hand");
    read(h, "link1", c.hand.link1, "hand");
    read(h, "link2", c.hand.link2, "hand");
    read(h, "joint_limit_deg", c.hand.joint_limit_deg, "hand");
    read(h, "standoff_factor", c.hand.standoff_factor, "hand");
    read(h, "proxy_spacing", c.hand.proxy_spacing, "hand");
    read(h, "closing_step_deg", c.hand.closing_step_deg, "hand");
    read(h, "merge_distance", c.hand.merge_distance, "hand");
  }
  if (j.contains("render")) {
    const json& r = j.at("render");
    check_keys(r, {"enabled", "directory", "width", "height", "fov_deg"}, "render");
    std::string dir;
    read(r, "enabled", c.render.enabled, "render");
    read(r, "directory", dir, "render");
    read(r, "width", c.render.width, "render");
    read(r, "height", c.render.height, "render");
    read(r, "fov_deg", c.render.fov_deg, "render");
    c.render.directory = dir;
    if (!dir.empty() && c.render.directory.is_relative() && !base_dir.empty()) {
      c.render.directory = base_dir / c.render.directory;
    }
  }
  c.validate(false);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

json to_json(const RunConfig& c) {
  json objs = json::array();
  for (const auto& o : c.objects) {
    json e = {{"id", o.id}};
    if (o.builtin.empty()) {
      e["mesh"] = std::filesystem::absolute(o.path).lexically_normal().string();
    } else {
      e["builtin"] = o.builtin;
    }
    objs.push_back(e);
  }
  json aff = to_json(c.affordance);
  aff["preset"] = c.affordance_preset;
  return {
      {"seed", c.seed},
      {"samples", c.samples},
      {"workers", c.workers},
      {"objects", objs},
      {"friction", {{"mu", c.metrics.friction.mu}, {"cone_edges", c.metrics.friction.cone_edges}}},
      {"metrics",
       {{"kappa", c.metrics.kappa},
        {"epsilon_directions", c.metrics.epsilon_directions},
        {"epsilon_refine_starts", c.metrics.epsilon_refine_starts},
        {"wrist_axis", c.metrics.wrist_axis == WristAxis::Roll ? "ROLL" : "PITCH"}}},
      {"affordance", aff},
      {"hand",
       {{"palm_radius", c.hand.palm_radius},
        {"link1", c.hand.link1},
        {"link2", c.hand.link2},
        {"joint_limit_deg", c.hand.joint_limit_deg},
        {"standoff_factor", c.hand.standoff_factor},
        {"proxy_spacing", c.hand.proxy_spacing},
        {"closing_step_deg", c.hand.closing_step_deg},
        {"merge_distance", c.hand.merge_distance}}},
      {"render",
       {{"enabled", c.render.enabled},
        {"directory", c.render.directory.empty()
                          ? std::string()
                          : std::filesystem::absolute(c.render.directory).lexically_normal().string()},
        {"width", c.render.width},
        {"height", c.render.height},
        {"fov_deg", c.render.fov_deg}}},
  };
}

std::vector<LoadedObject> load_objects(const RunConfig& cfg) {
  if (cfg.objects.empty()) throw ObjectLoadError("object list is empty");
  std::vector<LoadedObject> out;
  for (const auto& o : cfg.objects) {
    try {
      if (!o.builtin.empty()) {
        out.push_back({o.id, shapes::builtin(o.builtin).to_mesh()});
      } else {
        out.push_back({o.id, load_mesh(o.path)});
      }
    } catch (const std::exception& e) {
      throw ObjectLoadError("object '" + o.id + "': " + e.what());
    }
  }
  return out;
}

}  // namespace tgqm
