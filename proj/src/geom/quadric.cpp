#include "tgqm/geom/quadric.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace tgqm {

Curvatures local_quadric_curvatures(const Mesh& mesh, const SurfaceHit& hit) {
  Curvatures out;
  const auto& tris = mesh.triangles();
  const auto& verts = mesh.vertices();
  if (hit.triangle < 0 || hit.triangle >= static_cast<int>(tris.size())) {
    out.rank_deficient = true;
    return out;
  }

  std::vector<int> ring;
  for (int v : tris[hit.triangle]) {
    for (int t : mesh.vertex_triangles()[v]) {
      ring.insert(ring.end(), tris[t].begin(), tris[t].end());
    }
  }
  std::sort(ring.begin(), ring.end());
  ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
  if (ring.size() < 6) {
    out.rank_deficient = true;
    return out;
  }

  const Vec3 z = -mesh.normals()[hit.triangle];
  const Vec3 x = orthogonal_unit(z);
  const Vec3 y = z.cross(x);

  std::vector<Vec3> local;
  local.reserve(ring.size());
  double scale = 0.0;
  for (int v : ring) {
    const Vec3 d = verts[v] - hit.point;
    local.emplace_back(d.dot(x), d.dot(y), d.dot(z));
    scale = std::max(scale, std::hypot(local.back().x(), local.back().y()));
  }
  if (!(scale > 0.0)) {
    out.rank_deficient = true;
    return out;
  }

  // Fit in coordinates scaled to unit patch size for conditioning.
  Eigen::MatrixXd design(local.size(), 6);
  Eigen::VectorXd rhs(local.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    const double u = local[i].x() / scale;
    const double v = local[i].y() / scale;
    design.row(i) << u * u, u * v, v * v, u, v, 1.0;
    rhs[i] = local[i].z() / scale;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 6) {
    out.rank_deficient = true;
    return out;
  }
  const Eigen::VectorXd c = qr.solve(rhs);

  // z/s = a'(x/s)² + ... so the unscaled quadratic coefficients are a'/s.
  const double a = c[0] / scale;
  const double b = c[1] / scale;
  const double cc = c[2] / scale;
  const double mean = a + cc;
  const double radius = std::hypot(a - cc, b);
  out.k1 = mean + radius;
  out.k2 = mean - radius;
  return out;
}

}  // namespace tgqm
