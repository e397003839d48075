#pragma once

#include "tgqm/geom/mesh.hpp"

namespace tgqm {

/// Principal curvatures of a local quadric fit, k1 >= k2. Convex bumps have
/// positive curvature.
struct Curvatures {
  double k1 = 0.0;
  double k2 = 0.0;
  bool rank_deficient = false;
};

/// Fits z = ax² + bxy + cy² + dx + ey + f to the vertices of every triangle
/// sharing at least one vertex with `hit.triangle`, in a tangent frame at the
/// hit point whose z axis is the inward normal, and returns the eigenvalues of
/// the Hessian [[2a, b], [b, 2c]]. Fewer than six distinct vertices, or a
/// rank-deficient design matrix, gives (0, 0) with the flag set.
Curvatures local_quadric_curvatures(const Mesh& mesh, const SurfaceHit& hit);

}  // namespace tgqm
