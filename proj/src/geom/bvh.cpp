#include "bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tgqm {
namespace {

constexpr std::uint32_t kLeafSize = 4;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Slab test; returns the entry parameter or +inf on a miss.
double ray_box_entry(const Aabb& box, const Vec3& origin, const Vec3& inv_dir,
                     double t_min, double t_max) {
  double lo = t_min;
  double hi = t_max;
  for (int k = 0; k < 3; ++k) {
    double t0 = (box.min[k] - origin[k]) * inv_dir[k];
    double t1 = (box.max[k] - origin[k]) * inv_dir[k];
    if (std::isnan(t0) || std::isnan(t1)) {
      // Origin on a slab plane with a parallel direction.
      if (origin[k] < box.min[k] || origin[k] > box.max[k]) return kInf;
      continue;
    }
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return kInf;
  }
  return lo;
}

double box_distance_sq(const Aabb& box, const Vec3& p) {
  const Vec3 d = (box.min - p).cwiseMax(Vec3::Zero()).cwiseMax(p - box.max);
  return d.squaredNorm();
}

}  // namespace

std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir,
                                         const Vec3& a, const Vec3& b,
                                         const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  const double scale = e1.squaredNorm() * e2.squaredNorm();
  if (det * det <= 1e-30 * scale) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return e2.dot(q) * inv;
}

Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                         const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

Bvh::Bvh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const auto n = static_cast<std::uint32_t>(triangles_.size());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  std::vector<Vec3> centroids(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& t = triangles_[i];
    centroids[i] = (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
  }
  nodes_.reserve(2 * n / kLeafSize + 1);
  if (n > 0) build(0, n, centroids);
}

std::uint32_t Bvh::build(std::uint32_t first, std::uint32_t count,
                         std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroid_box;
  for (std::uint32_t i = first; i < first + count; ++i) {
    const auto& t = triangles_[order_[i]];
    for (int v : t) box.extend(vertices_[v]);
    centroid_box.extend(centroids[order_[i]]);
  }
  nodes_[index].box = box;

  const Vec3 ext = centroid_box.extent();
  int axis = 0;
  if (ext[1] > ext[axis]) axis = 1;
  if (ext[2] > ext[axis]) axis = 2;
  if (count <= kLeafSize || ext[axis] <= 0.0) {
    nodes_[index].left = first;
    nodes_[index].count = count;
    return index;
  }

  const std::uint32_t mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid,
                   order_.begin() + first + count,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (centroids[a][axis] != centroids[b][axis]) {
                       return centroids[a][axis] < centroids[b][axis];
                     }
                     return a < b;
                   });
  const std::uint32_t left = build(first, mid - first, centroids);
  const std::uint32_t right = build(mid, first + count - mid, centroids);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

std::optional<RayTriangleHit> Bvh::first_hit(const Vec3& origin,
                                             const Vec3& dir, double t_min,
                                             double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv = dir.cwiseInverse();
  RayTriangleHit best{t_max, -1};
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (ray_box_entry(node.box, origin, inv, t_min, best.t) == kInf) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.left; i < node.left + node.count; ++i) {
        const int tri = static_cast<int>(order_[i]);
        const auto& t = triangles_[tri];
        const auto hit = intersect_triangle(origin, dir, vertices_[t[0]],
                                            vertices_[t[1]], vertices_[t[2]]);
        if (!hit || *hit <= t_min || *hit > best.t) continue;
        // Equal distances resolve to the lowest triangle index.
        if (*hit < best.t || best.triangle < 0 || tri < best.triangle) {
          best = {*hit, tri};
        }
      }
      continue;
    }
    const double tl =
        ray_box_entry(nodes_[node.left].box, origin, inv, t_min, best.t);
    const double tr =
        ray_box_entry(nodes_[node.right].box, origin, inv, t_min, best.t);
    // Nearer child is pushed last so it is visited first.
    if (tl <= tr) {
      if (tr != kInf) stack[top++] = node.right;
      if (tl != kInf) stack[top++] = node.left;
    } else {
      if (tl != kInf) stack[top++] = node.left;
      if (tr != kInf) stack[top++] = node.right;
    }
  }
  if (best.triangle < 0) return std::nullopt;
  return best;
}

std::optional<RayTriangleHit> Bvh::farthest_hit(const Vec3& origin,
                                                const Vec3& dir,
                                                double t_min) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv = dir.cwiseInverse();
  RayTriangleHit best{-kInf, -1};
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (ray_box_entry(node.box, origin, inv, t_min, kInf) == kInf) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.left; i < node.left + node.count; ++i) {
        const int tri = static_cast<int>(order_[i]);
        const auto& t = triangles_[tri];
        const auto hit = intersect_triangle(origin, dir, vertices_[t[0]],
                                            vertices_[t[1]], vertices_[t[2]]);
        if (!hit || *hit <= t_min || *hit < best.t) continue;
        if (*hit > best.t || best.triangle < 0 || tri < best.triangle) {
          best = {*hit, tri};
        }
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  if (best.triangle < 0) return std::nullopt;
  return best;
}

ClosestPoint Bvh::closest_point(const Vec3& p, double max_distance) const {
  ClosestPoint best;
  if (nodes_.empty()) return best;
  double best_sq = max_distance == kInf ? kInf : max_distance * max_distance;
  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance_sq(node.box, p) > best_sq) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.left; i < node.left + node.count; ++i) {
        const int tri = static_cast<int>(order_[i]);
        const auto& t = triangles_[tri];
        const Vec3 q =
            closest_on_triangle(p, vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
        const double d = (q - p).squaredNorm();
        if (d < best_sq || (d == best_sq && best.triangle >= 0 && tri < best.triangle)) {
          best_sq = d;
          best.point = q;
          best.triangle = tri;
        }
      }
      continue;
    }
    const double dl = box_distance_sq(nodes_[node.left].box, p);
    const double dr = box_distance_sq(nodes_[node.right].box, p);
    if (dl <= dr) {
      if (dr <= best_sq) stack[top++] = node.right;
      if (dl <= best_sq) stack[top++] = node.left;
    } else {
      if (dl <= best_sq) stack[top++] = node.left;
      if (dr <= best_sq) stack[top++] = node.right;
    }
  }
  if (best.triangle >= 0) best.distance = std::sqrt(best_sq);
  return best;
}

}  // namespace tgqm
