#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "tgqm/affordance/affordance.hpp"
#include "tgqm/hand/hand.hpp"
#include "tgqm/metrics/metrics.hpp"
#include "tgqm/pipeline/config.hpp"
#include "tgqm/pipeline/dataset.hpp"

namespace tgqm {

/// Normalized spherical use direction, both coordinates in [-1, 1].
struct UseDirection {
  double d_theta = 0.0;
  double d_phi = 0.0;

  Vec3 vector() const { return spherical_direction(d_theta, d_phi); }
};

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);
/// p0 uniform in [-1, 1]^5 x [0, 1].
Pregrasp sample_pregrasp(Rng& rng);
UseDirection sample_use_direction(Rng& rng);

/// Generator for one sample, seeded from (seed, index) alone through
/// std::seed_seq so that no two (seed, index) pairs share a stream.
Rng sample_rng(std::uint64_t seed, std::uint64_t index);

/// Farthest surface crossing of the ray from the center of mass along d.
/// nullopt when the ray finds no surface (NoIntersection).
std::optional<UsePoint> direction_map(const Mesh& mesh, const UseDirection& d);

/// Draws (p0, d) for sample `index` of a run.
std::pair<Pregrasp, UseDirection> draw_sample(std::uint64_t seed, std::uint64_t index);

/// Runs the policy, the direction map and the metrics for one (p0, d).
GraspRecord evaluate_sample(const LoadedObject& object, std::uint64_t index, const Pregrasp& p0,
                            const UseDirection& d, const RunConfig& cfg, Grasp* grasp_out = nullptr);

struct DatasetSummary {
  std::uint64_t total = 0;
  std::uint64_t reached = 0;
  std::uint64_t viable = 0;
  std::uint64_t use_invalid = 0;
  double viability_rate = 0.0;  // viable / total
  double wall_seconds = 0.0;
  int workers = 1;
};

/// Path of the JSON file written next to a dataset.
std::filesystem::path sidecar_path(const std::filesystem::path& dataset);
/// Run configuration recorded in a dataset's sidecar.
RunConfig load_sidecar(const std::filesystem::path& dataset);

/// Generates cfg.samples records, sample i on object i mod |objects|, and
/// writes them in index order to `out` (format from the extension) plus a
/// sidecar. Output depends only on the config, never on the worker count.
/// `progress` (optional) is called from the writing thread.
DatasetSummary generate_dataset(const RunConfig& cfg, const std::filesystem::path& out,
                                const std::function<void(std::uint64_t done)>& progress = {});

class EmptyResult : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RankedRecord {
  GraspRecord record;
  double score = 0.0;
};

/// Strict ordering used by argmax_search: higher score first, then object
/// id, p0, d and row position ascending.
bool ranks_before(const RankedRecord& a, const RankedRecord& b);

/// Streams a dataset, scores each record for `task` and keeps the best
/// top_k. Gated records are skipped; throws EmptyResult if none remain.
std::vector<RankedRecord> argmax_search(const std::filesystem::path& dataset, Task task,
                                        const AffordanceConfig& cfg, std::size_t top_k,
                                        const ObjectIdLookup& ids = {});

struct VerifyReport {
  std::uint64_t records = 0;
  std::uint64_t checked = 0;
  std::uint64_t mismatched = 0;  // records with deviation above tolerance
  double max_deviation = 0.0;
  std::uint64_t worst_index = 0;
};

/// Relative deviation |a - b| / max(|a|, |b|), 0 when both are zero. Equal
/// infinities and NaNs compare as 0, any other non-finite mismatch as +inf.
double deviation(double a, double b);

/// Recomputes a seeded random fraction of records and compares every stored
/// field. CSV rows are recomputed from their stored p0 and d; binary rows,
/// whose inputs are rounded, from the run seed and their index.
VerifyReport verify_dataset(const std::filesystem::path& dataset, const RunConfig& cfg,
                            double fraction, std::uint64_t seed = 0, double tolerance = 1e-6);

}  // namespace tgqm
