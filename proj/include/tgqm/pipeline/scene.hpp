#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "tgqm/geom/mesh.hpp"
#include "tgqm/hand/hand.hpp"
#include "tgqm/metrics/metrics.hpp"

namespace tgqm {

struct SceneStyle {
  double link_width = 0.012;    // square cross-section of finger link boxes
  double palm_thickness = 0.01;
  double marker_radius = 0.006;
};

/// Writes an OBJ scene with named groups: `object`, `palm`, one
/// `finger<f>_link<l>` box per link in its final joint state, and
/// `use_point` (a small sphere) when a use point is given.
void write_scene_obj(std::ostream& out, const Mesh& mesh, const Grasp& grasp,
                     const std::optional<UsePoint>& use, const HandConfig& hand = {},
                     const SceneStyle& style = {});
void write_scene_obj(const std::filesystem::path& path, const Mesh& mesh, const Grasp& grasp,
                     const std::optional<UsePoint>& use, const HandConfig& hand = {},
                     const SceneStyle& style = {});

}  // namespace tgqm
