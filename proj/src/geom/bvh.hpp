#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tgqm/geom/mesh.hpp"

namespace tgqm {

struct RayTriangleHit {
  double t = 0.0;
  int triangle = -1;
};

/// Binary AABB tree over triangles. Coordinates are whatever frame the
/// vertices are given in; Mesh feeds it local (origin-shifted) vertices.
class Bvh {
 public:
  Bvh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }

  std::optional<RayTriangleHit> first_hit(const Vec3& origin, const Vec3& dir,
                                          double t_min, double t_max) const;
  std::optional<RayTriangleHit> farthest_hit(const Vec3& origin,
                                             const Vec3& dir,
                                             double t_min) const;
  ClosestPoint closest_point(const Vec3& p, double max_distance) const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t left = 0;   // first triangle (leaf) or left child
    std::uint32_t right = 0;  // right child (interior only)
    std::uint32_t count = 0;  // triangles in a leaf, 0 for interior nodes
  };

  std::uint32_t build(std::uint32_t first, std::uint32_t count,
                      std::vector<Vec3>& centroids);

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
};

/// Möller–Trumbore; returns the parametric distance or nothing.
std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir,
                                         const Vec3& a, const Vec3& b,
                                         const Vec3& c);

/// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                         const Vec3& c);

}  // namespace tgqm
