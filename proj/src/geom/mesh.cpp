#include "tgqm/geom/mesh.hpp"

#include <cmath>
#include <sstream>

#include "bvh.hpp"

namespace tgqm {
namespace {

constexpr double kMinTriangleArea = 1e-12;
constexpr double kMinVolume = 1e-12;
constexpr double kOpenTolerance = 0.01;
constexpr double kMinHitDistance = 1e-9;

double signed_volume(std::span<const Vec3> vertices,
                     std::span<const Triangle> triangles, const Vec3& ref) {
  double six_v = 0.0;
  for (const auto& t : triangles) {
    six_v += (vertices[t[0]] - ref)
                 .dot((vertices[t[1]] - ref).cross(vertices[t[2]] - ref));
  }
  return six_v / 6.0;
}

}  // namespace

Ray Ray::through(const Vec3& origin, const Vec3& direction) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("ray direction must be a nonzero finite vector");
  }
  return Ray{origin, direction / n};
}

Vec3 orthogonal_unit(const Vec3& n) {
  int axis = 0;
  const Vec3 a = n.cwiseAbs();
  if (a[1] < a[axis]) axis = 1;
  if (a[2] < a[axis]) axis = 2;
  Vec3 e = Vec3::Zero();
  e[axis] = 1.0;
  return (e - e.dot(n) * n).normalized();
}

MassProperties mass_properties(std::span<const Vec3> vertices,
                               std::span<const Triangle> triangles,
                               const Vec3& reference) {
  // Second moments of the canonical tetrahedron (0, e1, e2, e3), scaled by
  // det(A) for the affine image A = [a b c].
  Mat3 canonical;
  canonical << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  canonical /= 120.0;

  double volume = 0.0;
  Vec3 first = Vec3::Zero();
  Mat3 second = Mat3::Zero();
  for (const auto& t : triangles) {
    Mat3 a;
    a.col(0) = vertices[t[0]] - reference;
    a.col(1) = vertices[t[1]] - reference;
    a.col(2) = vertices[t[2]] - reference;
    const double det = a.determinant();
    volume += det / 6.0;
    first += det / 24.0 * (a.col(0) + a.col(1) + a.col(2));
    second += det * a * canonical * a.transpose();
  }
  if (std::abs(volume) < kMinVolume) {
    throw DegenerateMesh("mesh encloses no volume");
  }

  MassProperties out;
  out.volume = volume;
  const Vec3 com_rel = first / volume;
  const Mat3 central = second - volume * com_rel * com_rel.transpose();
  out.inertia = central.trace() * Mat3::Identity() - central;
  out.center_of_mass = reference + com_rel;
  if (volume < 0.0) {
    out.volume = -volume;
    out.inertia = -out.inertia;
  }
  return out;
}

Mesh Mesh::from_triangles(std::vector<Vec3> vertices,
                          std::vector<Triangle> triangles) {
  const int nv = static_cast<int>(vertices.size());
  for (const auto& v : vertices) {
    if (!v.allFinite()) throw DegenerateMesh("non-finite vertex coordinate");
  }
  std::vector<Triangle> kept;
  kept.reserve(triangles.size());
  for (const auto& t : triangles) {
    for (int i : t) {
      if (i < 0 || i >= nv) {
        std::ostringstream msg;
        msg << "triangle index " << i << " out of range (" << nv << " vertices)";
        throw DegenerateMesh(msg.str());
      }
    }
    const double area = 0.5 * (vertices[t[1]] - vertices[t[0]])
                                  .cross(vertices[t[2]] - vertices[t[0]])
                                  .norm();
    if (area >= kMinTriangleArea) kept.push_back(t);
  }
  if (kept.empty()) throw DegenerateMesh("mesh has no non-degenerate triangles");

  Mesh m;
  for (const auto& v : vertices) m.box_.extend(v);
  m.origin_ = m.box_.min;

  std::vector<Vec3> local(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) local[i] = vertices[i] - m.origin_;
  Aabb local_box;
  for (const auto& v : local) local_box.extend(v);
  m.local_extent_ = local_box.max;

  // A closed surface encloses the same signed volume from any apex.
  const double diag = local_box.extent().norm();
  const Vec3 far_apex = local_box.max + diag * Vec3(0.31, 0.47, 0.83);
  const double v0 = signed_volume(local, kept, Vec3::Zero());
  const double v1 = signed_volume(local, kept, far_apex);
  if (std::abs(v0 - v1) > kOpenTolerance * std::max(std::abs(v0), kMinVolume)) {
    throw OpenSurface("signed volume depends on the reference point; surface is not closed");
  }
  if (std::abs(v0) < kMinVolume) throw DegenerateMesh("mesh encloses no volume");
  if (v0 < 0.0) {
    for (auto& t : kept) std::swap(t[1], t[2]);
  }

  MassProperties local_mass = mass_properties(local, kept);
  m.local_com_ = local_mass.center_of_mass;
  m.mass_ = local_mass;
  m.mass_.center_of_mass = m.origin_ + m.local_com_;

  m.normals_.reserve(kept.size());
  for (const auto& t : kept) {
    m.normals_.push_back(
        (local[t[1]] - local[t[0]]).cross(local[t[2]] - local[t[0]]).normalized());
  }
  m.vertex_triangles_.assign(vertices.size(), {});
  for (int i = 0; i < static_cast<int>(kept.size()); ++i) {
    for (int v : kept[i]) m.vertex_triangles_[v].push_back(i);
  }
  for (const auto& v : local) {
    m.bounding_radius_ = std::max(m.bounding_radius_, (v - m.local_com_).norm());
  }

  m.vertices_ = std::move(vertices);
  m.triangles_ = kept;
  m.bvh_ = std::make_shared<const Bvh>(std::move(local), std::move(kept));
  return m;
}

std::optional<SurfaceHit> Mesh::ray_first_hit_local(const Vec3& origin,
                                                    const Vec3& direction,
                                                    double max_distance) const {
  const auto hit = bvh_->first_hit(origin, direction, kMinHitDistance, max_distance);
  if (!hit) return std::nullopt;
  return SurfaceHit{origin + hit->t * direction, hit->triangle, hit->t,
                    normals_[hit->triangle]};
}

std::optional<SurfaceHit> Mesh::ray_first_hit(const Ray& ray,
                                              double max_distance) const {
  auto hit = ray_first_hit_local(ray.origin - origin_, ray.direction, max_distance);
  if (hit) hit->point = ray.origin + hit->distance * ray.direction;
  return hit;
}

std::optional<SurfaceHit> Mesh::ray_farthest_hit(const Ray& ray) const {
  const auto hit =
      bvh_->farthest_hit(ray.origin - origin_, ray.direction, kMinHitDistance);
  if (!hit) return std::nullopt;
  return SurfaceHit{ray.origin + hit->t * ray.direction, hit->triangle, hit->t,
                    normals_[hit->triangle]};
}

ClosestPoint Mesh::closest_point(const Vec3& p, double max_distance) const {
  ClosestPoint c = bvh_->closest_point(p - origin_, max_distance);
  if (c.triangle >= 0) c.point += origin_;
  return c;
}

}  // namespace tgqm
