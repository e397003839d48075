#include "tgqm/affordance/affordance.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace tgqm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string normalized(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool all_finite(const std::array<double, 6>& e) {
  for (double v : e) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

std::string_view task_name(Task t) {
  switch (t) {
    case Task::Beat: return "beat";
    case Task::Cut: return "cut";
    case Task::Pick: return "pick";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  const std::string n = normalized(name);
  if (n == "beat") return Task::Beat;
  if (n == "cut") return Task::Cut;
  if (n == "pick") return Task::Pick;
  throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

AffordanceConfig AffordanceConfig::preset_default() { return {}; }

AffordanceConfig AffordanceConfig::preset_no_robustness() {
  AffordanceConfig c;
  c.tau_eps = kDisabled;
  return c;
}

AffordanceConfig AffordanceConfig::preset_extra_robustness() {
  AffordanceConfig c;
  c.tau_eps = 0.5;
  return c;
}

AffordanceConfig AffordanceConfig::preset(std::string_view name) {
  std::string n = normalized(name);
  if (n.size() > 8 && n.ends_with("required")) n.resize(n.size() - 8);
  if (n == "default") return preset_default();
  if (n == "norobustness") return preset_no_robustness();
  if (n == "extrarobustness") return preset_extra_robustness();
  throw std::invalid_argument("unknown affordance preset '" + std::string(name) + "'");
}

void AffordanceConfig::validate() const {
  for (double v : {tau_eps, tau_ug, tau_delta, viab_eps, viab_eh_sum, viab_ei}) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("affordance thresholds must be finite or -inf");
    }
  }
}

TaskScore f_beat(const MetricVector& phi, const AffordanceConfig& cfg) {
  TaskScore s{Task::Beat, kNegInf};
  if (phi.eps < cfg.tau_eps || phi.discharge < cfg.tau_delta || !all_finite(phi.effort_hold)) {
    return s;
  }
  if (phi.effort_impact == 0.0) {
    s.score = kBeatCap;
  } else if (std::isinf(phi.effort_impact)) {
    s.score = 0.0;
  } else {
    s.score = std::min(kBeatCap, phi.inertia / phi.effort_impact);
  }
  return s;
}

TaskScore f_cut(const MetricVector& phi, const AffordanceConfig& cfg) {
  TaskScore s{Task::Cut, kNegInf};
  if (phi.eps < cfg.tau_eps || phi.use_geometry < cfg.tau_ug) return s;
  s.score = phi.use_force;
  return s;
}

TaskScore f_pick(const MetricVector& phi) {
  TaskScore s{Task::Pick, kNegInf};
  if (!all_finite(phi.effort_hold)) return s;
  s.score = -phi.effort_hold_sum();
  return s;
}

TaskScore score_task(Task task, const MetricVector& phi, const AffordanceConfig& cfg) {
  switch (task) {
    case Task::Beat: return f_beat(phi, cfg);
    case Task::Cut: return f_cut(phi, cfg);
    case Task::Pick: return f_pick(phi);
  }
  throw std::invalid_argument("unknown task");
}

bool is_viable(const MetricVector& phi, const AffordanceConfig& cfg) {
  return phi.eps > cfg.viab_eps && phi.effort_hold_sum() < cfg.viab_eh_sum &&
         phi.effort_impact < cfg.viab_ei;
}

}  // namespace tgqm
