#pragma once

#include <limits>
#include <string>
#include <string_view>

#include "tgqm/metrics/metrics.hpp"

namespace tgqm {

enum class Task { Beat, Cut, Pick };

std::string_view task_name(Task t);
/// Accepts "beat", "cut", "pick" (case-insensitive); throws std::invalid_argument.
Task parse_task(std::string_view name);

/// Task gates and viability thresholds. A gate set to -inf never fires.
struct AffordanceConfig {
  static constexpr double kDisabled = -std::numeric_limits<double>::infinity();

  double tau_eps = 0.3;
  double tau_ug = 10.0;
  double tau_delta = 0.95;
  double viab_eps = 0.15;
  double viab_eh_sum = 250.0;
  double viab_ei = 100.0;

  static AffordanceConfig preset_default();
  static AffordanceConfig preset_no_robustness();
  static AffordanceConfig preset_extra_robustness();
  /// "default", "no_robustness", "extra_robustness"; spaces, dashes and case
  /// are ignored, and a trailing "required" is allowed.
  static AffordanceConfig preset(std::string_view name);

  /// Throws std::invalid_argument on NaN or +inf thresholds.
  void validate() const;
};

struct TaskScore {
  Task task = Task::Pick;
  double score = -std::numeric_limits<double>::infinity();

  bool gated() const { return score == -std::numeric_limits<double>::infinity(); }
};

/// Largest finite value f_beat reports, used when E_i is zero.
inline constexpr double kBeatCap = 1e18;

TaskScore f_beat(const MetricVector& phi, const AffordanceConfig& cfg = {});
TaskScore f_cut(const MetricVector& phi, const AffordanceConfig& cfg = {});
TaskScore f_pick(const MetricVector& phi);
TaskScore score_task(Task task, const MetricVector& phi, const AffordanceConfig& cfg = {});

bool is_viable(const MetricVector& phi, const AffordanceConfig& cfg = {});

}  // namespace tgqm
