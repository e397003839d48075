#pragma once

#include <nlohmann/json.hpp>

#include "tgqm/affordance/affordance.hpp"
#include "tgqm/hand/hand.hpp"
#include "tgqm/metrics/metrics.hpp"
#include "tgqm/pipeline/dataset.hpp"

namespace tgqm {

/// JSON forms shared by the command line and the Python module. Infinities
/// become the strings "inf" / "-inf" and NaN becomes null.
nlohmann::json json_number(double v);
nlohmann::json to_json(const MetricVector& phi);
nlohmann::json to_json(const GraspRecord& r);
nlohmann::json to_json(const Contact& c);
/// Per-task {score, gated} for beat, cut and pick.
nlohmann::json task_scores_json(const MetricVector& phi, const AffordanceConfig& cfg);

}  // namespace tgqm
