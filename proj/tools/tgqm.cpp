// Command-line front end: evaluate, sample, optimize, render, verify.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tgqm/affordance/affordance.hpp"
#include "tgqm/geom/io.hpp"
#include "tgqm/geom/shapes.hpp"
#include "tgqm/hand/hand.hpp"
#include "tgqm/metrics/metrics.hpp"
#include "tgqm/pipeline/config.hpp"
#include "tgqm/pipeline/dataset.hpp"
#include "tgqm/pipeline/pipeline.hpp"
#include "tgqm/pipeline/report.hpp"
#include "tgqm/pipeline/scene.hpp"
#include "tgqm/render/render.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tgqm;

namespace {

enum Exit { kOk = 0, kInputError = 1, kMiss = 2, kEmpty = 3, kVerifyFailed = 4 };

// Thrown for anything the user can fix by changing arguments or files.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// A mesh argument is a file path, or the name of a bundled shape when no
// such file exists.
LoadedObject load_mesh_arg(const std::string& arg) {
  const fs::path p(arg);
  if (fs::exists(p)) {
    try {
      return {p.stem().string(), load_mesh(p)};
    } catch (const std::exception& e) {
      throw InputError("cannot load mesh '" + arg + "': " + e.what());
    }
  }
  for (const auto& name : shapes::builtin_names()) {
    if (name == arg) return {name, shapes::builtin(name).to_mesh()};
  }
  throw InputError("no such mesh file or bundled shape: '" + arg + "'");
}

RunConfig load_config_arg(const std::string& path) {
  if (path.empty()) return RunConfig{};
  try {
    return load_run_config(path);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
}

Pregrasp pregrasp_arg(const std::vector<double>& v) {
  std::array<double, 6> a{};
  std::copy(v.begin(), v.end(), a.begin());
  const Pregrasp p = Pregrasp::from_array(a);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("pregrasp: ") + e.what());
  }
  return p;
}

UseDirection use_dir_arg(const std::vector<double>& v) {
  for (double x : v) {
    if (!(x >= -1.0 && x <= 1.0)) throw InputError("use direction values must lie in [-1, 1]");
  }
  return {v[0], v[1]};
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string mesh, config, scene;
  std::vector<double> pregrasp, use_dir;
  bool json = false;
};

int run_evaluate(const EvaluateArgs& a) {
  const RunConfig cfg = load_config_arg(a.config);
  const LoadedObject obj = load_mesh_arg(a.mesh);
  const Pregrasp p0 = pregrasp_arg(a.pregrasp);
  const UseDirection d = use_dir_arg(a.use_dir);

  Grasp grasp;
  const GraspRecord r = evaluate_sample(obj, 0, p0, d, cfg, &grasp);
  if (!a.scene.empty()) {
    write_scene_obj(a.scene, obj.mesh, grasp, direction_map(obj.mesh, d), cfg.hand);
  }

  if (a.json) {
    json j = to_json(r);
    j.erase("index");
    j["mesh"] = a.mesh;
    j["scores"] = task_scores_json(r.phi, cfg.affordance);
    json contacts = json::array();
    for (const Contact& c : grasp.contacts) contacts.push_back(to_json(c));
    j["contacts"] = contacts;
    print_json(j);
  } else {
    std::cout << "object        " << r.object_id << '\n'
              << "reached       " << (r.reached ? "yes" : "no") << '\n'
              << "contacts      " << r.n_contacts << '\n';
    if (r.use_valid()) {
      std::cout << "use point     " << fmt(r.use_point.x()) << ' ' << fmt(r.use_point.y()) << ' '
                << fmt(r.use_point.z()) << '\n';
    } else {
      std::cout << "use point     none\n";
    }
    const MetricVector& f = r.phi;
    std::cout << "eps           " << fmt(f.eps) << (f.force_closure ? "" : "  (no force closure)")
              << '\n'
              << "inertia       " << fmt(f.inertia) << '\n'
              << "effort_impact " << fmt(f.effort_impact) << '\n'
              << "effort_hold  ";
    for (double e : f.effort_hold) std::cout << ' ' << fmt(e);
    std::cout << '\n'
              << "discharge     " << fmt(f.discharge) << '\n'
              << "use_force     " << fmt(f.use_force) << '\n'
              << "use_geometry  " << fmt(f.use_geometry) << '\n'
              << "viable        " << (r.viable ? "yes" : "no") << '\n';
    for (Task t : {Task::Beat, Task::Cut, Task::Pick}) {
      const TaskScore s = score_task(t, f, cfg.affordance);
      std::cout << "score " << task_name(t) << std::string(8 - task_name(t).size(), ' ')
                << (s.gated() ? "gated" : fmt(s.score)) << '\n';
    }
  }
  return r.reached ? kOk : kMiss;
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string config, out;
  std::vector<std::string> objects;
  std::optional<std::uint64_t> count, seed;
  std::optional<int> workers;
  bool json = false;
  bool quiet = false;
};

int resolve_workers(const std::optional<int>& flag, int from_config) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TGQM_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0 || v > 4096) {
      throw InputError(std::string("TGQM_THREADS must be a non-negative integer, got '") + env +
                       "'");
    }
    return static_cast<int>(v);
  }
  return from_config;
}

int run_sample(const SampleArgs& a) {
  RunConfig cfg = load_config_arg(a.config);
  for (const auto& o : a.objects) {
    ObjectSpec s;
    const fs::path p(o);
    std::string ext = p.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (fs::exists(p) || ext == ".off" || ext == ".obj") {
      s.id = p.stem().string();
      s.path = fs::absolute(p);
    } else {
      s.id = o;
      s.builtin = o;
    }
    cfg.objects.push_back(s);
  }
  if (a.count) cfg.samples = *a.count;
  if (a.seed) cfg.seed = *a.seed;
  cfg.workers = resolve_workers(a.workers, cfg.workers);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw InputError(e.what());
  }

  std::function<void(std::uint64_t)> progress;
  if (!a.quiet && !a.json) {
    const std::uint64_t step = std::max<std::uint64_t>(1, cfg.samples / 20);
    progress = [&, step](std::uint64_t done) {
      if (done % step == 0 || done == cfg.samples) {
        std::cerr << "\r" << done << "/" << cfg.samples << std::flush;
        if (done == cfg.samples) std::cerr << '\n';
      }
    };
  }
  const fs::path parent = fs::path(a.out).parent_path();
  std::error_code ec;
  if (!parent.empty()) fs::create_directories(parent, ec);
  const DatasetSummary s = generate_dataset(cfg, a.out, progress);

  if (a.json) {
    print_json({{"out", a.out},
                {"sidecar", sidecar_path(a.out).string()},
                {"format", format_for_path(a.out) == DatasetFormat::Csv ? "csv" : "binary"},
                {"seed", cfg.seed},
                {"total", s.total},
                {"reached", s.reached},
                {"viable", s.viable},
                {"use_invalid", s.use_invalid},
                {"viability_rate", s.viability_rate},
                {"workers", s.workers},
                {"wall_seconds", s.wall_seconds}});
  } else {
    std::printf("wrote %llu records to %s (%d workers, %.2f s)\n",
                static_cast<unsigned long long>(s.total), a.out.c_str(), s.workers,
                s.wall_seconds);
    std::printf("reached %llu, viable %llu, viability rate %.4f%%\n",
                static_cast<unsigned long long>(s.reached),
                static_cast<unsigned long long>(s.viable), 100.0 * s.viability_rate);
  }
  return kOk;
}

// ---------------------------------------------------------------- optimize

struct OptimizeArgs {
  std::string dataset, task, preset, config, scene;
  std::size_t top_k = 10;
  bool json = false;
};

std::optional<RunConfig> dataset_config(const std::string& dataset, const std::string& override_path) {
  if (!override_path.empty()) return load_config_arg(override_path);
  if (!fs::exists(sidecar_path(dataset))) return std::nullopt;
  try {
    return load_sidecar(dataset);
  } catch (const std::exception& e) {
    throw InputError(std::string("bad sidecar: ") + e.what());
  }
}

// Re-runs the policy for a stored record so the grasp can be exported.
void export_scene(const GraspRecord& r, const RunConfig& cfg, const std::string& dataset,
                  const fs::path& out) {
  const ObjectSpec* spec = nullptr;
  for (const auto& o : cfg.objects) {
    if (o.id == r.object_id) spec = &o;
  }
  if (!spec) throw InputError("object '" + r.object_id + "' is not in the run config");
  RunConfig one = cfg;
  one.objects = {*spec};
  const LoadedObject obj = load_objects(one).front();

  // Binary rows hold rounded inputs; the exact ones come from the seed.
  Pregrasp p0;
  UseDirection d;
  if (format_for_path(dataset) == DatasetFormat::Binary) {
    std::tie(p0, d) = draw_sample(cfg.seed, r.index);
  } else {
    p0 = Pregrasp::from_array(r.p0);
    d = {r.d[0], r.d[1]};
  }
  const Grasp g = execute_policy(obj.mesh, p0, cfg.hand);
  write_scene_obj(out, obj.mesh, g, direction_map(obj.mesh, d), cfg.hand);
}

int run_optimize(const OptimizeArgs& a) {
  Task task;
  try {
    task = parse_task(a.task);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (!fs::exists(a.dataset)) throw InputError("no such dataset: " + a.dataset);
  if (a.top_k < 1) throw InputError("--top-k must be at least 1");
  const std::optional<RunConfig> cfg = dataset_config(a.dataset, a.config);

  AffordanceConfig aff;
  std::string preset_label = "default";
  if (!a.preset.empty()) {
    try {
      aff = AffordanceConfig::preset(a.preset);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    preset_label = a.preset;
  } else if (cfg) {
    aff = cfg->affordance;
    preset_label = cfg->affordance_preset;
  }

  ObjectIdLookup ids;
  if (cfg) {
    std::vector<std::string> names;
    for (const auto& o : cfg->objects) names.push_back(o.id);
    ids = make_id_lookup(names);
  }

  std::vector<RankedRecord> ranked;
  try {
    ranked = argmax_search(a.dataset, task, aff, a.top_k, ids);
  } catch (const EmptyResult& e) {
    std::cerr << "empty result: " << e.what() << '\n';
    return kEmpty;
  }

  if (!a.scene.empty()) {
    if (!cfg) throw InputError("--scene needs the run config (sidecar missing; pass --config)");
    export_scene(ranked.front().record, *cfg, a.dataset, a.scene);
  }

  if (a.json) {
    json results = json::array();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      json j = to_json(ranked[i].record);
      j["rank"] = i + 1;
      j["score"] = json_number(ranked[i].score);
      results.push_back(j);
    }
    print_json({{"dataset", a.dataset},
                {"task", std::string(task_name(task))},
                {"preset", preset_label},
                {"top_k", a.top_k},
                {"results", results},
                {"scene", a.scene.empty() ? json(nullptr) : json(a.scene)}});
  } else {
    std::printf("%-4s %-14s %-12s %-10s %-10s %-10s %-10s %s\n", "rank", "score", "object", "index",
                "eps", "delta", "u_g", "sum_e_h");
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const GraspRecord& r = ranked[i].record;
      std::printf("%-4zu %-14s %-12s %-10llu %-10s %-10s %-10s %s\n", i + 1,
                  fmt(ranked[i].score).c_str(), r.object_id.c_str(),
                  static_cast<unsigned long long>(r.index), fmt(r.phi.eps).c_str(),
                  fmt(r.phi.discharge).c_str(), fmt(r.phi.use_geometry).c_str(),
                  fmt(r.phi.effort_hold_sum()).c_str());
    }
    if (!a.scene.empty()) std::printf("scene written to %s\n", a.scene.c_str());
  }
  return kOk;
}

// ------------------------------------------------------------------ render

struct RenderArgs {
  std::string mesh, out, pgm, config;
  std::vector<double> pregrasp;
  int width = 128, height = 128;
  double fov = 60.0;
  double noise = 0.0;
  std::uint64_t noise_seed = 0;
  bool json = false;
};

int run_render(const RenderArgs& a) {
  const RunConfig cfg = load_config_arg(a.config);
  const LoadedObject obj = load_mesh_arg(a.mesh);
  const Pregrasp p0 = pregrasp_arg(a.pregrasp);
  CameraParams cam;
  cam.width = a.width;
  cam.height = a.height;
  cam.fov_deg = a.fov;
  cam.noise_sigma = a.noise;
  cam.noise_seed = a.noise_seed;
  try {
    cam.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const RangeImage img = render_depth(obj.mesh, p0, cam, cfg.hand);
  write_grim(a.out, img);
  if (!a.pgm.empty()) write_pgm(a.pgm, img);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : img.depth) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const std::size_t finite = img.finite_count();
  if (a.json) {
    print_json({{"out", a.out},
                {"pgm", a.pgm.empty() ? json(nullptr) : json(a.pgm)},
                {"width", img.width},
                {"height", img.height},
                {"finite_pixels", finite},
                {"min_depth", finite ? json_number(lo) : json(nullptr)},
                {"max_depth", finite ? json_number(hi) : json(nullptr)}});
  } else {
    std::printf("wrote %dx%d raster to %s, %zu object pixels", img.width, img.height,
                a.out.c_str(), finite);
    if (finite) std::printf(", depth %.4f..%.4f m", lo, hi);
    std::printf("\n");
  }
  return kOk;
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
  std::string dataset, config;
  double fraction = 0.01;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
  bool json = false;
};

int run_verify(const VerifyArgs& a) {
  if (!fs::exists(a.dataset)) throw InputError("no such dataset: " + a.dataset);
  if (!(a.fraction >= 0.0 && a.fraction <= 1.0)) throw InputError("--fraction must lie in [0, 1]");
  const std::optional<RunConfig> cfg = dataset_config(a.dataset, a.config);
  if (!cfg) throw InputError("no run config for " + a.dataset + " (sidecar missing; pass --config)");

  const VerifyReport rep = verify_dataset(a.dataset, *cfg, a.fraction, a.seed, a.tolerance);
  const bool ok = rep.mismatched == 0;
  if (a.json) {
    print_json({{"dataset", a.dataset},
                {"fraction", a.fraction},
                {"tolerance", a.tolerance},
                {"records", rep.records},
                {"checked", rep.checked},
                {"mismatched", rep.mismatched},
                {"max_deviation", json_number(rep.max_deviation)},
                {"worst_index", rep.checked ? json(rep.worst_index) : json(nullptr)},
                {"ok", ok}});
  } else {
    std::printf("checked %llu of %llu records, %llu mismatched, max deviation %s",
                static_cast<unsigned long long>(rep.checked),
                static_cast<unsigned long long>(rep.records),
                static_cast<unsigned long long>(rep.mismatched), fmt(rep.max_deviation).c_str());
    if (rep.mismatched) std::printf(" (record %llu)", static_cast<unsigned long long>(rep.worst_index));
    std::printf("\n");
  }
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-oriented grasp quality engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tgqm 0.1.0");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Run the grasp policy and print the metric vector");
  evaluate->add_option("--mesh", ev.mesh, "OFF/OBJ file or bundled shape name")->required();
  evaluate->add_option("--pregrasp", ev.pregrasp, "theta phi roll offset_x offset_y spread")
      ->required()
      ->expected(6);
  evaluate->add_option("--use-dir", ev.use_dir, "d_theta d_phi")->required()->expected(2);
  evaluate->add_option("--config", ev.config, "JSON run config (hand, friction, metrics, affordance)");
  evaluate->add_option("--scene", ev.scene, "write the grasp as an OBJ scene");
  evaluate->add_flag("--json", ev.json, "machine-readable output");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Generate a dataset");
  sample->add_option("--config", sa.config, "JSON run config");
  sample->add_option("--object", sa.objects, "extra object: mesh path or bundled shape name");
  sample->add_option("--out", sa.out, "output dataset (.csv or binary)")->required();
  sample->add_option("--count", sa.count, "number of samples");
  sample->add_option("--seed", sa.seed, "64-bit run seed");
  sample->add_option("--workers", sa.workers, "worker threads, 0 = all cores")
      ->check(CLI::NonNegativeNumber);
  sample->add_flag("--json", sa.json, "machine-readable summary");
  sample->add_flag("--quiet", sa.quiet, "no progress output");

  OptimizeArgs op;
  auto* optimize = app.add_subcommand("optimize", "Brute-force affordance argmax over a dataset");
  optimize->add_option("--dataset", op.dataset)->required();
  optimize->add_option("--task", op.task, "beat, cut or pick")->required();
  optimize->add_option("--preset", op.preset, "affordance preset (default: the run's)");
  optimize->add_option("--top-k", op.top_k, "number of results");
  optimize->add_option("--config", op.config, "run config instead of the dataset sidecar");
  optimize->add_option("--scene", op.scene, "export the best grasp as an OBJ scene");
  optimize->add_flag("--json", op.json, "machine-readable output");

  RenderArgs re;
  auto* render = app.add_subcommand("render", "Render the camera-in-hand range image of a pregrasp");
  render->add_option("--mesh", re.mesh, "OFF/OBJ file or bundled shape name")->required();
  render->add_option("--pregrasp", re.pregrasp)->required()->expected(6);
  render->add_option("--out", re.out, "GRIM raster path")->required();
  render->add_option("--pgm", re.pgm, "also write a 16-bit PGM preview");
  render->add_option("--config", re.config, "JSON run config (hand overrides)");
  render->add_option("--width", re.width);
  render->add_option("--height", re.height);
  render->add_option("--fov", re.fov, "vertical field of view, degrees");
  render->add_option("--noise", re.noise, "Gaussian depth noise sigma, meters");
  render->add_option("--noise-seed", re.noise_seed);
  render->add_flag("--json", re.json, "machine-readable output");

  VerifyArgs ve;
  auto* verify = app.add_subcommand("verify", "Recompute a sample of dataset records");
  verify->add_option("--dataset", ve.dataset)->required();
  verify->add_option("--fraction", ve.fraction, "fraction of records to recompute");
  verify->add_option("--seed", ve.seed, "selection seed");
  verify->add_option("--tolerance", ve.tolerance, "max relative deviation");
  verify->add_option("--config", ve.config, "run config instead of the dataset sidecar");
  verify->add_flag("--json", ve.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*evaluate) return run_evaluate(ev);
    if (*sample) return run_sample(sa);
    if (*optimize) return run_optimize(op);
    if (*render) return run_render(re);
    if (*verify) return run_verify(ve);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kInputError;
  } catch (const ObjectLoadError& e) {
    std::cerr << "object error: " << e.what() << '\n';
    return kInputError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kInputError;
  } catch (const GeometryError& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 70;
  }
  return kInputError;
}
