#include <cmath>
#include <filesystem>
#include <optional>
#include <string>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "tgqm/affordance/affordance.hpp"
#include "tgqm/geom/io.hpp"
#include "tgqm/geom/shapes.hpp"
#include "tgqm/hand/hand.hpp"
#include "tgqm/lp/simplex.hpp"
#include "tgqm/metrics/metrics.hpp"
#include "tgqm/pipeline/config.hpp"
#include "tgqm/pipeline/dataset.hpp"
#include "tgqm/pipeline/pipeline.hpp"
#include "tgqm/pipeline/report.hpp"
#include "tgqm/pipeline/scene.hpp"
#include "tgqm/render/render.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tgqm;

namespace {

py::object to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: {
      // Infinities travel as strings in JSON; Python has real ones.
      const auto& s = j.get_ref<const std::string&>();
      if (s == "inf") return py::float_(INFINITY);
      if (s == "-inf") return py::float_(-INFINITY);
      return py::str(s);
    }
    case json::value_t::array: {
      py::list l;
      for (const auto& v : j) l.append(to_py(v));
      return l;
    }
    case json::value_t::object: {
      py::dict d;
      for (const auto& [k, v] : j.items()) d[py::str(k)] = to_py(v);
      return d;
    }
    default: return py::none();
  }
}

json from_py(const py::handle& o) {
  if (o.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(o)) return o.cast<bool>();
  if (py::isinstance<py::int_>(o)) return o.cast<std::int64_t>();
  if (py::isinstance<py::float_>(o)) {
    const double v = o.cast<double>();
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  }
  if (py::isinstance<py::str>(o)) return o.cast<std::string>();
  if (py::isinstance<py::dict>(o)) {
    json j = json::object();
    for (const auto& [k, v] : o.cast<py::dict>()) j[py::str(k).cast<std::string>()] = from_py(v);
    return j;
  }
  if (py::isinstance<py::list>(o) || py::isinstance<py::tuple>(o)) {
    json j = json::array();
    for (const auto& v : o) j.push_back(from_py(v));
    return j;
  }
  throw py::type_error("unsupported value in configuration: " + py::repr(o).cast<std::string>());
}

// Accepts a dict, a path to a JSON file, or None for defaults.
RunConfig config_arg(const py::object& cfg) {
  if (cfg.is_none()) return RunConfig{};
  if (py::isinstance<py::dict>(cfg)) return run_config_from_json(from_py(cfg), fs::current_path());
  return load_run_config(cfg.cast<fs::path>());
}

Pregrasp pregrasp_arg(const std::array<double, 6>& v) {
  const Pregrasp p = Pregrasp::from_array(v);
  p.validate();
  return p;
}

py::array_t<double> vec3s(const std::vector<Vec3>& pts) {
  py::array_t<double> a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  auto m = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int k = 0; k < 3; ++k) m(i, k) = pts[i][k];
  }
  return a;
}

py::array_t<double> depth_array(const RangeImage& img) {
  py::array_t<double> a({img.height, img.width});
  std::copy(img.depth.begin(), img.depth.end(), a.mutable_data());
  return a;
}

RangeImage image_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw py::value_error("depth image must be two-dimensional");
  RangeImage img;
  img.height = static_cast<int>(a.shape(0));
  img.width = static_cast<int>(a.shape(1));
  img.depth.assign(a.data(), a.data() + a.size());
  return img;
}

CameraParams camera(int width, int height, double fov_deg) {
  CameraParams c;
  c.width = width;
  c.height = height;
  c.fov_deg = fov_deg;
  c.validate();
  return c;
}

Mesh mesh_from_arrays(const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
                      const py::array_t<long long, py::array::c_style | py::array::forcecast>& t) {
  if (v.ndim() != 2 || v.shape(1) != 3) throw py::value_error("vertices must be (n, 3)");
  if (t.ndim() != 2 || t.shape(1) != 3) throw py::value_error("triangles must be (m, 3)");
  std::vector<Vec3> verts(v.shape(0));
  for (py::ssize_t i = 0; i < v.shape(0); ++i) verts[i] = Vec3(v.at(i, 0), v.at(i, 1), v.at(i, 2));
  std::vector<Triangle> tris(t.shape(0));
  for (py::ssize_t i = 0; i < t.shape(0); ++i) {
    for (int k = 0; k < 3; ++k) {
      const long long idx = t.at(i, k);
      if (idx < 0 || idx >= v.shape(0)) throw py::index_error("triangle index out of range");
      tris[i][k] = static_cast<int>(idx);
    }
  }
  return Mesh::from_triangles(std::move(verts), std::move(tris));
}

py::dict evaluate(const Mesh& mesh, const std::array<double, 6>& p0v,
                  const std::array<double, 2>& dv, const py::object& cfg_arg) {
  const RunConfig cfg = config_arg(cfg_arg);
  const Pregrasp p0 = pregrasp_arg(p0v);
  for (double x : dv) {
    if (!(x >= -1.0 && x <= 1.0)) throw py::value_error("use direction values must lie in [-1, 1]");
  }
  const LoadedObject obj{"mesh", mesh};
  Grasp g;
  const GraspRecord r = evaluate_sample(obj, 0, p0, {dv[0], dv[1]}, cfg, &g);
  json j = to_json(r);
  j.erase("index");
  j.erase("object_id");
  j["scores"] = task_scores_json(r.phi, cfg.affordance);
  j["contacts"] = json::array();
  for (const Contact& c : g.contacts) j["contacts"].push_back(to_json(c));
  j["wrist"] = {g.pose.wrist.x(), g.pose.wrist.y(), g.pose.wrist.z()};
  j["joints"] = g.joints;
  return to_py(j).cast<py::dict>();
}

// Column-oriented view of a dataset for numerical work.
py::dict dataset_arrays(const fs::path& path, const std::vector<std::string>& ids) {
  const std::vector<GraspRecord> recs = read_dataset(path, make_id_lookup(ids));
  const auto n = static_cast<py::ssize_t>(recs.size());
  py::array_t<double> p0({n, py::ssize_t{6}}), d({n, py::ssize_t{2}}), phi({n, py::ssize_t{12}}),
      use({n, py::ssize_t{3}}), normal({n, py::ssize_t{3}});
  py::array_t<bool> viable(n), reached(n);
  py::array_t<std::int64_t> contacts(n), index(n);
  py::list object_ids, hashes;
  auto mp = p0.mutable_unchecked<2>();
  auto md = d.mutable_unchecked<2>();
  auto mf = phi.mutable_unchecked<2>();
  auto mu = use.mutable_unchecked<2>();
  auto mn = normal.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const GraspRecord& r = recs[i];
    for (int k = 0; k < 6; ++k) mp(i, k) = r.p0[k];
    for (int k = 0; k < 2; ++k) md(i, k) = r.d[k];
    const auto f = r.phi.to_array();
    for (int k = 0; k < 12; ++k) mf(i, k) = f[k];
    for (int k = 0; k < 3; ++k) {
      mu(i, k) = r.use_point[k];
      mn(i, k) = r.use_normal[k];
    }
    viable.mutable_at(i) = r.viable;
    reached.mutable_at(i) = r.reached;
    contacts.mutable_at(i) = r.n_contacts;
    index.mutable_at(i) = static_cast<std::int64_t>(r.index);
    object_ids.append(r.object_id);
    hashes.append(record_hash(r));
  }
  py::dict out;
  out["object_id"] = object_ids;
  out["hash"] = hashes;
  out["index"] = index;
  out["p0"] = p0;
  out["d"] = d;
  out["phi"] = phi;
  out["use_point"] = use;
  out["use_normal"] = normal;
  out["n_contacts"] = contacts;
  out["reached"] = reached;
  out["viable"] = viable;
  return out;
}

}  // namespace

PYBIND11_MODULE(_tgqm, m) {
  m.doc() = "Task-oriented grasp quality engine";

  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ObjectLoadError>(m, "ObjectLoadError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<EmptyResult>(m, "EmptyResult", PyExc_LookupError);
  py::register_exception<lp::NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  py::class_<Mesh>(m, "Mesh")
      .def_static("from_arrays", &mesh_from_arrays, py::arg("vertices"), py::arg("triangles"))
      .def_property_readonly("vertices", [](const Mesh& me) { return vec3s(me.vertices()); })
      .def_property_readonly("triangles",
                             [](const Mesh& me) {
                               py::array_t<int> a({static_cast<py::ssize_t>(me.triangle_count()),
                                                   py::ssize_t{3}});
                               auto w = a.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < me.triangle_count(); ++i) {
                                 for (int k = 0; k < 3; ++k) w(i, k) = me.triangles()[i][k];
                               }
                               return a;
                             })
      .def_property_readonly("volume", &Mesh::volume)
      .def_property_readonly("center_of_mass",
                             [](const Mesh& me) { return std::vector<double>(me.center_of_mass().data(), me.center_of_mass().data() + 3); })
      .def_property_readonly("inertia_tensor",
                             [](const Mesh& me) {
                               py::array_t<double> a({3, 3});
                               auto w = a.mutable_unchecked<2>();
                               for (int i = 0; i < 3; ++i)
                                 for (int k = 0; k < 3; ++k) w(i, k) = me.inertia_tensor()(i, k);
                               return a;
                             })
      .def_property_readonly("bounding_radius", &Mesh::bounding_radius)
      .def("__repr__", [](const Mesh& me) {
        return "<Mesh " + std::to_string(me.vertices().size()) + " vertices, " +
               std::to_string(me.triangle_count()) + " triangles>";
      });

  m.def("load_mesh", [](const fs::path& p) { return load_mesh(p); }, py::arg("path"),
        "Load an OFF or OBJ file.");
  m.def("builtin_names", &shapes::builtin_names);
  m.def("builtin_mesh", [](const std::string& name) { return shapes::builtin(name).to_mesh(); },
        py::arg("name"), "One of the bundled procedural shapes.");
  m.def("save_off", [](const fs::path& p, const Mesh& me) { write_off(p, me); }, py::arg("path"),
        py::arg("mesh"));

  m.def("evaluate", &evaluate, py::arg("mesh"), py::arg("pregrasp"), py::arg("use_dir"),
        py::arg("config") = py::none(),
        "Run the grasp policy for a 6-value pregrasp and a 2-value use direction and return\n"
        "the metric vector, task scores and contacts. `config` is a dict or JSON path.");

  m.def("draw_sample",
        [](std::uint64_t seed, std::uint64_t index) {
          const auto [p0, d] = draw_sample(seed, index);
          return py::make_tuple(p0.to_array(), std::array<double, 2>{d.d_theta, d.d_phi});
        },
        py::arg("seed"), py::arg("index"), "The (pregrasp, use direction) of a run's sample.");

  m.def("score",
        [](const std::string& task, const py::dict& phi, const std::string& preset) {
          const json j = from_py(phi);
          auto get = [&](const char* k) {
            const json& v = j.at(k);
            if (v.is_string()) return v.get<std::string>() == "inf" ? MetricVector::kInf : -MetricVector::kInf;
            return v.get<double>();
          };
          MetricVector f;
          f.eps = get("eps");
          f.inertia = get("inertia");
          f.effort_impact = get("effort_impact");
          for (int k = 0; k < 6; ++k) {
            const json& v = j.at("effort_hold").at(k);
            f.effort_hold[k] = v.is_string() ? MetricVector::kInf : v.get<double>();
          }
          f.discharge = get("discharge");
          f.use_force = get("use_force");
          f.use_geometry = get("use_geometry");
          return score_task(parse_task(task), f, AffordanceConfig::preset(preset)).score;
        },
        py::arg("task"), py::arg("phi"), py::arg("preset") = "default",
        "Affordance score of a metric dict (as returned by evaluate) for beat, cut or pick.");

  m.def("generate_dataset",
        [](const py::object& cfg_arg, const fs::path& out, std::optional<std::uint64_t> samples,
           std::optional<std::uint64_t> seed, std::optional<int> workers) {
          RunConfig cfg = config_arg(cfg_arg);
          if (samples) cfg.samples = *samples;
          if (seed) cfg.seed = *seed;
          if (workers) cfg.workers = *workers;
          DatasetSummary s;
          {
            py::gil_scoped_release release;
            s = generate_dataset(cfg, out);
          }
          py::dict d;
          d["total"] = s.total;
          d["reached"] = s.reached;
          d["viable"] = s.viable;
          d["use_invalid"] = s.use_invalid;
          d["viability_rate"] = s.viability_rate;
          d["wall_seconds"] = s.wall_seconds;
          d["workers"] = s.workers;
          return d;
        },
        py::arg("config"), py::arg("out"), py::arg("samples") = py::none(),
        py::arg("seed") = py::none(), py::arg("workers") = py::none(),
        "Generate a CSV (.csv) or binary dataset plus its <out>.run.json sidecar.");

  m.def("read_records",
        [](const fs::path& path, const std::vector<std::string>& ids) {
          py::list out;
          for (const auto& r : read_dataset(path, make_id_lookup(ids))) out.append(to_py(to_json(r)));
          return out;
        },
        py::arg("path"), py::arg("object_ids") = std::vector<std::string>{},
        "Records as dicts. Binary files need object_ids to map hashes back to names.");
  m.def("read_arrays", &dataset_arrays, py::arg("path"),
        py::arg("object_ids") = std::vector<std::string>{},
        "Dataset columns as numpy arrays (phi columns: eps, inertia, e_i, e_h x6, delta, u_tau, u_g).");
  m.def("load_sidecar", [](const fs::path& p) { return to_py(to_json(load_sidecar(p))); },
        py::arg("dataset"));

  m.def("argmax_search",
        [](const fs::path& path, const std::string& task, const std::string& preset,
           std::size_t top_k, const std::vector<std::string>& ids) {
          const auto ranked =
              argmax_search(path, parse_task(task), AffordanceConfig::preset(preset), top_k,
                            make_id_lookup(ids));
          py::list out;
          for (const auto& r : ranked) {
            json j = to_json(r.record);
            j["score"] = json_number(r.score);
            out.append(to_py(j));
          }
          return out;
        },
        py::arg("dataset"), py::arg("task"), py::arg("preset") = "default", py::arg("top_k") = 1,
        py::arg("object_ids") = std::vector<std::string>{});

  m.def("verify_dataset",
        [](const fs::path& path, double fraction, std::uint64_t seed, double tolerance) {
          const VerifyReport r = verify_dataset(path, load_sidecar(path), fraction, seed, tolerance);
          py::dict d;
          d["records"] = r.records;
          d["checked"] = r.checked;
          d["mismatched"] = r.mismatched;
          d["max_deviation"] = r.max_deviation;
          d["worst_index"] = r.worst_index;
          return d;
        },
        py::arg("dataset"), py::arg("fraction") = 0.01, py::arg("seed") = 0,
        py::arg("tolerance") = 1e-6);

  m.def("render_depth",
        [](const Mesh& mesh, const std::array<double, 6>& p0, int width, int height, double fov) {
          return depth_array(render_depth(mesh, pregrasp_arg(p0), camera(width, height, fov)));
        },
        py::arg("mesh"), py::arg("pregrasp"), py::arg("width") = 128, py::arg("height") = 128,
        py::arg("fov_deg") = 60.0,
        "Camera-in-hand range image (meters along the optical axis, inf = background).");
  m.def("depth_to_cloud",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& depth,
           double fov, int n, std::uint64_t seed) {
          const RangeImage img = image_from_array(depth);
          return vec3s(depth_to_cloud(img, camera(img.width, img.height, fov), n, seed).points);
        },
        py::arg("depth"), py::arg("fov_deg") = 60.0, py::arg("n") = 1024, py::arg("seed") = 0);
  m.def("read_grim", [](const fs::path& p) { return depth_array(read_grim(p)); }, py::arg("path"));
  m.def("write_grim",
        [](const fs::path& p, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
          write_grim(p, image_from_array(a));
        },
        py::arg("path"), py::arg("depth"));

  m.def("export_scene",
        [](const fs::path& out, const Mesh& mesh, const std::array<double, 6>& p0,
           const std::array<double, 2>& d, const py::object& cfg_arg) {
          const RunConfig cfg = config_arg(cfg_arg);
          const Grasp g = execute_policy(mesh, pregrasp_arg(p0), cfg.hand);
          write_scene_obj(out, mesh, g, direction_map(mesh, {d[0], d[1]}), cfg.hand);
        },
        py::arg("path"), py::arg("mesh"), py::arg("pregrasp"), py::arg("use_dir"),
        py::arg("config") = py::none(), "OBJ scene of the grasp for external viewing.");

  m.attr("RECORD_SIZE") = kBinaryRecordSize;
  m.attr("__version__") = "0.1.0";
}
