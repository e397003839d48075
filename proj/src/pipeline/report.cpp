#include "tgqm/pipeline/report.hpp"

#include <cmath>
#include <string>

namespace tgqm {

using json = nlohmann::json;

json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

json vec(const Vec3& v) {
  return json::array({json_number(v.x()), json_number(v.y()), json_number(v.z())});
}

template <std::size_t N>
json arr(const std::array<double, N>& a) {
  json out = json::array();
  for (double v : a) out.push_back(json_number(v));
  return out;
}

}  // namespace

json to_json(const MetricVector& phi) {
  return {{"eps", json_number(phi.eps)},
          {"inertia", json_number(phi.inertia)},
          {"effort_impact", json_number(phi.effort_impact)},
          {"effort_hold", arr(phi.effort_hold)},
          {"effort_hold_sum", json_number(phi.effort_hold_sum())},
          {"discharge", json_number(phi.discharge)},
          {"use_force", json_number(phi.use_force)},
          {"use_geometry", json_number(phi.use_geometry)},
          {"force_closure", phi.force_closure},
          {"use_valid", phi.use_valid},
          {"use_rank_deficient", phi.use_rank_deficient}};
}

json to_json(const GraspRecord& r) {
  json j = {{"object_id", r.object_id},
            {"index", r.index},
            {"hash", record_hash(r)},
            {"p0", arr(r.p0)},
            {"d", arr(r.d)},
            {"n_contacts", r.n_contacts},
            {"reached", r.reached},
            {"viable", r.viable},
            {"phi", to_json(r.phi)}};
  if (r.use_valid()) {
    j["use_point"] = {{"point", vec(r.use_point)}, {"inward_normal", vec(r.use_normal)}};
  } else {
    j["use_point"] = nullptr;
  }
  return j;
}

json to_json(const Contact& c) {
  return {{"point", vec(c.point)},
          {"normal", vec(c.normal)},
          {"source", c.source == ContactSource::Palm ? "palm" : "link"},
          {"finger", c.finger},
          {"link", c.link}};
}

json task_scores_json(const MetricVector& phi, const AffordanceConfig& cfg) {
  json out = json::object();
  for (Task t : {Task::Beat, Task::Cut, Task::Pick}) {
    const TaskScore s = score_task(t, phi, cfg);
    out[std::string(task_name(t))] = {{"score", json_number(s.score)}, {"gated", s.gated()}};
  }
  return out;
}

}  // namespace tgqm
