#include "tgqm/pipeline/scene.hpp"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "tgqm/geom/io.hpp"
#include "tgqm/geom/shapes.hpp"

namespace tgqm {
namespace {

class ObjWriter {
 public:
  explicit ObjWriter(std::ostream& out) : out_(out) {}

  void group(const std::string& name, const std::vector<Vec3>& vertices,
             const std::vector<Triangle>& triangles) {
    out_ << "g " << name << '\n';
    char buf[96];
    for (const Vec3& v : vertices) {
      std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
      out_ << buf;
    }
    for (const Triangle& t : triangles) {
      out_ << "f " << base_ + t[0] + 1 << ' ' << base_ + t[1] + 1 << ' ' << base_ + t[2] + 1
           << '\n';
    }
    base_ += vertices.size();
  }

 private:
  std::ostream& out_;
  std::size_t base_ = 0;
};

// Oriented box spanned by a center, three half-axis vectors.
void box(const Vec3& c, const Vec3& a, const Vec3& b, const Vec3& h, std::vector<Vec3>& v,
         std::vector<Triangle>& t) {
  v.clear();
  for (int i = 0; i < 8; ++i) {
    v.push_back(c + ((i & 1) ? a : Vec3(-a)) + ((i & 2) ? b : Vec3(-b)) + ((i & 4) ? h : Vec3(-h)));
  }
  t = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
       {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  // Keep faces outward for a left-handed (a, b, h) triple.
  if (a.cross(b).dot(h) < 0) {
    for (auto& tri : t) std::swap(tri[1], tri[2]);
  }
}

}  // namespace

void write_scene_obj(std::ostream& out, const Mesh& mesh, const Grasp& grasp,
                     const std::optional<UsePoint>& use, const HandConfig& hand,
                     const SceneStyle& style) {
  ObjWriter w(out);
  w.group("object", mesh.vertices(), mesh.triangles());

  const HandPose& pose = grasp.pose;
  const Mat3& R = pose.rotation;
  std::vector<Vec3> v;
  std::vector<Triangle> t;

  const double half_t = 0.5 * style.palm_thickness;
  box(pose.to_world(Vec3(0, 0, -half_t)), hand.palm_radius * R.col(0),
      hand.palm_radius * R.col(1), half_t * R.col(2), v, t);
  w.group("palm", v, t);

  const double hw = 0.5 * style.link_width;
  for (int f = 0; f < 3; ++f) {
    const FingerGeometry g =
        finger_geometry(f, grasp.spread, grasp.joints[2 * f], grasp.joints[2 * f + 1], hand);
    const Vec3 side = R * Vec3::UnitZ().cross(g.closing).normalized();
    const Vec3 ends[3] = {pose.to_world(g.base), pose.to_world(g.joint), pose.to_world(g.tip)};
    for (int l = 0; l < 2; ++l) {
      const Vec3 axis = ends[l + 1] - ends[l];
      const Vec3 across = axis.normalized().cross(side);
      box(0.5 * (ends[l] + ends[l + 1]), 0.5 * axis, hw * side, hw * across, v, t);
      w.group("finger" + std::to_string(f) + "_link" + std::to_string(l), v, t);
    }
  }

  if (use) {
    const shapes::Shell s = shapes::icosphere(style.marker_radius, 1, use->point);
    w.group("use_point", s.vertices, s.triangles);
  }
}

void write_scene_obj(const std::filesystem::path& path, const Mesh& mesh, const Grasp& grasp,
                     const std::optional<UsePoint>& use, const HandConfig& hand,
                     const SceneStyle& style) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_scene_obj(out, mesh, grasp, use, hand, style);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace tgqm
