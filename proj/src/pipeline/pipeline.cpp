#include "tgqm/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "tgqm/render/render.hpp"

namespace tgqm {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Pregrasp sample_pregrasp(Rng& rng) {
  Pregrasp p;
  p.approach_theta = 2.0 * uniform01(rng) - 1.0;
  p.approach_phi = 2.0 * uniform01(rng) - 1.0;
  p.roll = 2.0 * uniform01(rng) - 1.0;
  p.offset_x = 2.0 * uniform01(rng) - 1.0;
  p.offset_y = 2.0 * uniform01(rng) - 1.0;
  p.spread = uniform01(rng);
  return p;
}

UseDirection sample_use_direction(Rng& rng) {
  UseDirection d;
  d.d_theta = 2.0 * uniform01(rng) - 1.0;
  d.d_phi = 2.0 * uniform01(rng) - 1.0;
  return d;
}

Rng sample_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

std::pair<Pregrasp, UseDirection> draw_sample(std::uint64_t seed, std::uint64_t index) {
  Rng rng = sample_rng(seed, index);
  const Pregrasp p = sample_pregrasp(rng);
  const UseDirection d = sample_use_direction(rng);
  return {p, d};
}

std::optional<UsePoint> direction_map(const Mesh& mesh, const UseDirection& d) {
  const auto hit = mesh.ray_farthest_hit(Ray{mesh.center_of_mass(), d.vector()});
  if (!hit) return std::nullopt;
  return UsePoint{hit->point, -hit->normal, hit->triangle};
}

GraspRecord evaluate_sample(const LoadedObject& object, std::uint64_t index, const Pregrasp& p0,
                            const UseDirection& d, const RunConfig& cfg, Grasp* grasp_out) {
  GraspRecord r;
  r.object_id = object.id;
  r.index = index;
  r.p0 = p0.to_array();
  r.d = {d.d_theta, d.d_phi};
  const Grasp g = execute_policy(object.mesh, p0, cfg.hand);
  const auto use = direction_map(object.mesh, d);
  if (use) {
    r.use_point = use->point;
    r.use_normal = use->inward_normal;
  } else {
    r.use_point.setConstant(std::nan(""));
    r.use_normal.setConstant(std::nan(""));
  }
  r.n_contacts = static_cast<int>(g.contacts.size());
  r.reached = g.reached_object;
  r.phi = compute_phi(object.mesh, g, use, cfg.metrics);
  r.viable = r.reached && is_viable(r.phi, cfg.affordance);
  if (grasp_out) *grasp_out = g;
  return r;
}

std::filesystem::path sidecar_path(const std::filesystem::path& dataset) {
  std::filesystem::path p = dataset;
  p += ".run.json";
  return p;
}

RunConfig load_sidecar(const std::filesystem::path& dataset) {
  const auto path = sidecar_path(dataset);
  std::ifstream in(path);
  if (!in) throw ConfigError("missing sidecar " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("sidecar " + path.string() + ": " + e.what());
  }
  if (!j.contains("config")) throw ConfigError("sidecar " + path.string() + " has no config");
  return run_config_from_json(j.at("config"));
}

DatasetSummary generate_dataset(const RunConfig& cfg, const std::filesystem::path& out,
                                const std::function<void(std::uint64_t)>& progress) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<LoadedObject> objects = load_objects(cfg);
  if (cfg.render.enabled) std::filesystem::create_directories(cfg.render.directory);
  CameraParams cam;
  cam.width = cfg.render.width;
  cam.height = cfg.render.height;
  cam.fov_deg = cfg.render.fov_deg;

  int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, workers);
  constexpr std::uint64_t kBatch = 32;
  const std::uint64_t batches = (cfg.samples + kBatch - 1) / kBatch;
  const std::uint64_t window = 4 * static_cast<std::uint64_t>(workers);

  std::mutex mu;
  std::condition_variable cv;
  std::map<std::uint64_t, std::vector<GraspRecord>> done;
  std::uint64_t written = 0;  // batches handed to the writer
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;

  auto work = [&] {
    try {
      while (!abort) {
        const std::uint64_t b = next++;
        if (b >= batches) return;
        {
          std::unique_lock lock(mu);
          cv.wait(lock, [&] { return abort || b < written + window; });
        }
        if (abort) return;
        std::vector<GraspRecord> recs;
        const std::uint64_t end = std::min(cfg.samples, (b + 1) * kBatch);
        for (std::uint64_t i = b * kBatch; i < end; ++i) {
          const auto [p0, d] = draw_sample(cfg.seed, i);
          const LoadedObject& obj = objects[i % objects.size()];
          recs.push_back(evaluate_sample(obj, i, p0, d, cfg));
          if (cfg.render.enabled) {
            write_grim(cfg.render.directory / (record_hash(recs.back()) + ".grim"),
                       render_depth(obj.mesh, p0, cam, cfg.hand));
          }
        }
        std::lock_guard lock(mu);
        done.emplace(b, std::move(recs));
        cv.notify_all();
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      abort = true;
      cv.notify_all();
    }
  };

  DatasetSummary s;
  s.workers = workers;
  DatasetWriter writer(out, format_for_path(out));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  try {
    for (std::uint64_t b = 0; b < batches; ++b) {
      std::vector<GraspRecord> recs;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return abort || done.count(b) > 0; });
        if (abort) break;
        recs = std::move(done.at(b));
        done.erase(b);
      }
      for (const auto& r : recs) {
        writer.write(r);
        ++s.total;
        s.reached += r.reached;
        s.viable += r.viable;
        s.use_invalid += !r.use_valid();
      }
      {
        std::lock_guard lock(mu);
        written = b + 1;
      }
      cv.notify_all();
      if (progress) progress(s.total);
    }
  } catch (...) {
    {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      abort = true;
    }
    cv.notify_all();
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  writer.close();

  s.viability_rate = s.total ? static_cast<double>(s.viable) / static_cast<double>(s.total) : 0.0;
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json side = {
      {"format", format_for_path(out) == DatasetFormat::Csv ? "csv" : "binary"},
      {"config", to_json(cfg)},
      {"summary",
       {{"total", s.total}, {"reached", s.reached}, {"viable", s.viable}, {"use_invalid", s.use_invalid},
        {"viability_rate", s.viability_rate}}},
  };
  std::ofstream sc(sidecar_path(out));
  sc << side.dump(2) << '\n';
  if (!sc) throw IoError("cannot write " + sidecar_path(out).string());
  return s;
}

bool ranks_before(const RankedRecord& a, const RankedRecord& b) {
  if (a.score != b.score) return a.score > b.score;
  const auto& x = a.record;
  const auto& y = b.record;
  if (x.object_id != y.object_id) return x.object_id < y.object_id;
  if (x.p0 != y.p0) return x.p0 < y.p0;
  if (x.d != y.d) return x.d < y.d;
  return x.index < y.index;
}

std::vector<RankedRecord> argmax_search(const std::filesystem::path& dataset, Task task,
                                        const AffordanceConfig& cfg, std::size_t top_k,
                                        const ObjectIdLookup& ids) {
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  cfg.validate();
  // Max-heap under ranks_before keeps the worst retained record on top.
  std::vector<RankedRecord> heap;
  for_each_record(
      dataset,
      [&](const GraspRecord& r) {
        const TaskScore s = score_task(task, r.phi, cfg);
        if (s.gated()) return;
        RankedRecord rr{r, s.score};
        if (heap.size() < top_k) {
          heap.push_back(std::move(rr));
          std::push_heap(heap.begin(), heap.end(), ranks_before);
        } else if (ranks_before(rr, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), ranks_before);
          heap.back() = std::move(rr);
          std::push_heap(heap.begin(), heap.end(), ranks_before);
        }
      },
      ids);
  if (heap.empty()) {
    throw EmptyResult("no record of " + dataset.string() + " passes the " +
                      std::string(task_name(task)) + " gates");
  }
  std::sort_heap(heap.begin(), heap.end(), ranks_before);
  return heap;
}

double deviation(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) {
    return std::isnan(a) && std::isnan(b) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (std::isinf(a) || std::isinf(b)) return a == b ? 0.0 : std::numeric_limits<double>::infinity();
  const double m = std::max(std::abs(a), std::abs(b));
  return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

namespace {

double record_deviation(const GraspRecord& a, const GraspRecord& b) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (a.object_id != b.object_id || a.reached != b.reached || a.viable != b.viable ||
      a.n_contacts != b.n_contacts) {
    return kInf;
  }
  double m = 0.0;
  for (int i = 0; i < 6; ++i) m = std::max(m, deviation(a.p0[i], b.p0[i]));
  for (int i = 0; i < 2; ++i) m = std::max(m, deviation(a.d[i], b.d[i]));
  for (int i = 0; i < 3; ++i) {
    m = std::max(m, deviation(a.use_point[i], b.use_point[i]));
    m = std::max(m, deviation(a.use_normal[i], b.use_normal[i]));
  }
  const auto x = a.phi.to_array();
  const auto y = b.phi.to_array();
  for (int i = 0; i < 12; ++i) m = std::max(m, deviation(x[i], y[i]));
  return m;
}

}  // namespace

VerifyReport verify_dataset(const std::filesystem::path& dataset, const RunConfig& cfg,
                            double fraction, std::uint64_t seed, double tolerance) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in [0, 1]");
  std::vector<std::string> names;
  for (const auto& o : cfg.objects) names.push_back(o.id);
  const std::vector<GraspRecord> recs = read_dataset(dataset, make_id_lookup(names));
  VerifyReport rep;
  rep.records = recs.size();
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(recs.size())));
  if (k == 0) return rep;

  std::ifstream probe(dataset, std::ios::binary);
  char magic[4] = {};
  probe.read(magic, 4);
  const bool binary = std::string(magic, 4) == "TGQM";

  const std::vector<LoadedObject> objects = load_objects(cfg);
  std::vector<std::size_t> order(recs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(k);
  std::sort(order.begin(), order.end());

  for (std::size_t i : order) {
    const GraspRecord& stored = recs[i];
    const LoadedObject* obj = nullptr;
    for (const auto& o : objects) {
      if (o.id == stored.object_id) obj = &o;
    }
    double dev = std::numeric_limits<double>::infinity();
    if (obj) {
      Pregrasp p0;
      UseDirection d;
      if (binary) {
        std::tie(p0, d) = draw_sample(cfg.seed, stored.index);
      } else {
        p0 = Pregrasp::from_array(stored.p0);
        d = {stored.d[0], stored.d[1]};
      }
      GraspRecord fresh = evaluate_sample(*obj, stored.index, p0, d, cfg);
      if (binary) fresh = quantize_float32(fresh);
      dev = record_deviation(fresh, stored);
    }
    ++rep.checked;
    if (dev > tolerance) ++rep.mismatched;
    if (dev > rep.max_deviation) {
      rep.max_deviation = dev;
      rep.worst_index = stored.index;
    }
  }
  return rep;
}

}  // namespace tgqm
