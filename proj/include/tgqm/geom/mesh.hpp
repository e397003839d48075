#pragma once

#include <array>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace tgqm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Triangle = std::array<int, 3>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class DegenerateMesh : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class OpenSurface : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  bool empty() const { return (min.array() > max.array()).any(); }
};

/// Half-line with a unit direction.
struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  /// Normalizes `direction`; throws std::invalid_argument for a zero vector.
  static Ray through(const Vec3& origin, const Vec3& direction);
};

struct SurfaceHit {
  Vec3 point = Vec3::Zero();
  int triangle = -1;
  double distance = 0.0;
  Vec3 normal = Vec3::UnitZ();  // outward
};

struct ClosestPoint {
  Vec3 point = Vec3::Zero();
  int triangle = -1;
  double distance = std::numeric_limits<double>::infinity();
};

struct MassProperties {
  double volume = 0.0;
  Vec3 center_of_mass = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();  // unit density, about center_of_mass
};

class Bvh;

/// Signed-tetrahedron mass properties of a closed triangle surface, unit
/// density. `reference` is the apex shared by all tetrahedra; the result does
/// not depend on it for a closed surface. Inertia is about the center of mass.
MassProperties mass_properties(std::span<const Vec3> vertices,
                               std::span<const Triangle> triangles,
                               const Vec3& reference = Vec3::Zero());

/// Immutable watertight triangle mesh with cached mass properties and a
/// bounding-volume hierarchy. Copies share the hierarchy.
///
/// Internally every spatial structure is expressed relative to the minimum
/// corner of the input bounding box, so translating the input by a value that
/// is exact in floating point translates every query result exactly.
class Mesh {
 public:
  /// Builds a mesh from raw geometry. Drops triangles with area < 1e-12 m²,
  /// orients the surface outward and caches derived quantities.
  /// Throws DegenerateMesh / OpenSurface.
  static Mesh from_triangles(std::vector<Vec3> vertices,
                             std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Vec3>& normals() const { return normals_; }
  std::size_t triangle_count() const { return triangles_.size(); }

  double volume() const { return mass_.volume; }
  const Vec3& center_of_mass() const { return mass_.center_of_mass; }
  const Mat3& inertia_tensor() const { return mass_.inertia; }
  const MassProperties& mass() const { return mass_; }
  const Aabb& bounding_box() const { return box_; }
  double bounding_radius() const { return bounding_radius_; }

  /// Frame origin used by the internal structures (input bounding-box min).
  const Vec3& local_origin() const { return origin_; }
  /// Center of mass relative to local_origin(), computed in that frame.
  const Vec3& local_center_of_mass() const { return local_com_; }
  /// Bounding-box extent computed in the local frame.
  const Vec3& local_extent() const { return local_extent_; }

  std::optional<SurfaceHit> ray_first_hit(
      const Ray& ray,
      double max_distance = std::numeric_limits<double>::infinity()) const;
  std::optional<SurfaceHit> ray_farthest_hit(const Ray& ray) const;

  /// Same queries with the ray origin already expressed relative to
  /// local_origin(). Returned hit points are also local.
  std::optional<SurfaceHit> ray_first_hit_local(
      const Vec3& origin, const Vec3& direction,
      double max_distance = std::numeric_limits<double>::infinity()) const;

  /// Nearest surface point; stops looking beyond `max_distance`.
  ClosestPoint closest_point(
      const Vec3& p,
      double max_distance = std::numeric_limits<double>::infinity()) const;

  /// Triangles incident to each vertex.
  const std::vector<std::vector<int>>& vertex_triangles() const {
    return vertex_triangles_;
  }

 private:
  Mesh() = default;

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Vec3> normals_;
  std::vector<std::vector<int>> vertex_triangles_;
  MassProperties mass_;
  Aabb box_;
  double bounding_radius_ = 0.0;
  Vec3 origin_ = Vec3::Zero();
  Vec3 local_com_ = Vec3::Zero();
  Vec3 local_extent_ = Vec3::Zero();
  std::shared_ptr<const Bvh> bvh_;
};

/// Unit vector orthogonal to `n`, built from the coordinate axis along which
/// `n` has its smallest absolute component (first such axis on ties).
Vec3 orthogonal_unit(const Vec3& n);

}  // namespace tgqm
