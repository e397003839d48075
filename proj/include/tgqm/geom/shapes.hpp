#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "tgqm/geom/mesh.hpp"

namespace tgqm::shapes {

using Vec2 = Eigen::Vector2d;

/// Closed, outward-oriented triangle soup. Several shells may be concatenated
/// into one mesh as long as their interiors do not overlap.
struct Shell {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  Shell& append(const Shell& other);
  Shell& translate(const Vec3& t);
  Shell& transform(const Mat3& rotation, const Vec3& t);
  Mesh to_mesh() const;
};

/// Axis-aligned box; each face is split into cells no longer than `max_edge`.
Shell box(const Vec3& min, const Vec3& max, double max_edge);

/// Subdivided icosahedron; 20·4^level triangles.
Shell icosphere(double radius, int level, const Vec3& center = Vec3::Zero());

/// Capped cylinder along z from z0 to z1.
Shell cylinder(double radius, double z0, double z1, int radial_segments,
               int height_segments);

Shell torus(double major_radius, double minor_radius, int major_segments,
            int minor_segments);

/// Prism: polygon (counter-clockwise in the (u, v) frame) swept along `w`
/// from s0 to s1. `star_center` must see every polygon vertex (caps are
/// fanned from it). Polygon edges and the sweep are split so no edge exceeds
/// `max_edge`.
Shell extrude(const std::vector<Vec2>& polygon, const Vec2& star_center,
              const Vec3& u, const Vec3& v, const Vec3& w, double s0, double s1,
              double max_edge);

/// Surface of revolution about z. `profile` holds (r, z) pairs. An open
/// profile must start and end on the axis (r = 0); a closed loop (first point
/// not on the axis) is revolved into a solid ring.
Shell revolve(const std::vector<Vec2>& profile, int segments);

// Bundled objects, dimensions in meters.
Shell hammer();
Shell knife();
Shell bottle();
Shell sword();
Shell screwdriver();
Shell axe();
Shell glass();
Shell l_block();

/// Names accepted by builtin().
const std::vector<std::string>& builtin_names();
/// Throws std::invalid_argument for an unknown name.
Shell builtin(const std::string& name);

}  // namespace tgqm::shapes
