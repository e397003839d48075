#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tgqm/geom/mesh.hpp"
#include "tgqm/hand/hand.hpp"
#include "tgqm/lp/simplex.hpp"
#include "tgqm/metrics/metrics.hpp"

namespace tgqm::oracle {

/// Exact ε for small wrench sets: the hull contains the origin iff the polar
/// polytope {y : w_k·y <= 1} is bounded, and then ε = 1 / max ‖y‖ over its
/// vertices. Returns 0 when some direction is unbounded (detected by a
/// vertex-free or ray-admitting polar). Callers only use it on sets they
/// know to be in force closure or want 0 for.
inline double exact_epsilon(const Eigen::Matrix<double, 6, Eigen::Dynamic>& w) {
  const int k = static_cast<int>(w.cols());
  if (k < 7) return 0.0;
  Eigen::FullPivLU<Eigen::MatrixXd> rank(w);
  if (rank.rank() < 6) return 0.0;
  double best = 0.0;
  std::vector<int> idx = {0, 1, 2, 3, 4, 5};
  while (true) {
    Eigen::Matrix<double, 6, 6> m;
    for (int r = 0; r < 6; ++r) m.row(r) = w.col(idx[r]).transpose();
    Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(m);
    if (lu.rank() == 6) {
      const Eigen::Matrix<double, 6, 1> y = lu.solve(Eigen::Matrix<double, 6, 1>::Ones());
      if ((w.transpose() * y).maxCoeff() <= 1.0 + 1e-9) best = std::max(best, y.norm());
    }
    int i = 5;
    while (i >= 0 && idx[i] == k - 6 + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < 6; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best > 0.0 ? 1.0 / best : 0.0;
}

/// Brute-force support minimization over `n` independent Gaussian-normalized
/// directions from a fixed-seed Mersenne twister (no refinement).
inline double dense_support_min(const Eigen::Matrix<double, 6, Eigen::Dynamic>& w, long n,
                                unsigned long seed = 12345) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double best = std::numeric_limits<double>::infinity();
  Eigen::Matrix<double, 6, 1> u;
  for (long i = 0; i < n; ++i) {
    for (int r = 0; r < 6; ++r) u[r] = g(rng);
    u.normalize();
    best = std::min(best, (w.transpose() * u).maxCoeff());
  }
  return best;
}

/// Random surface point (area weighted) with its outward normal.
inline Contact random_surface_contact(const Mesh& mesh, std::mt19937_64& rng) {
  const auto& v = mesh.vertices();
  const auto& t = mesh.triangles();
  std::vector<double> cdf(t.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    acc += 0.5 * (v[t[i][1]] - v[t[i][0]]).cross(v[t[i][2]] - v[t[i][0]]).norm();
    cdf[i] = acc;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double pick = u(rng) * acc;
  const int tri = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
  double a = u(rng), b = u(rng);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  Contact c;
  c.triangle = tri;
  c.point = v[t[tri][0]] + a * (v[t[tri][1]] - v[t[tri][0]]) + b * (v[t[tri][2]] - v[t[tri][0]]);
  c.normal = mesh.normals()[tri];
  c.source = ContactSource::Link;
  return c;
}

/// Monte-Carlo moment of inertia about a line for a body star-shaped about
/// `center`: rejection sampling in the bounding box, inside test by a ray
/// from the center.
inline double monte_carlo_line_inertia(const Mesh& mesh, const Vec3& center, const Vec3& point,
                                       const Vec3& axis, long samples, unsigned long seed) {
  std::mt19937_64 rng(seed);
  const Aabb box = mesh.bounding_box();
  std::uniform_real_distribution<double> ux(box.min.x(), box.max.x());
  std::uniform_real_distribution<double> uy(box.min.y(), box.max.y());
  std::uniform_real_distribution<double> uz(box.min.z(), box.max.z());
  const Vec3 a = axis.normalized();
  double sum = 0.0;
  for (long i = 0; i < samples; ++i) {
    const Vec3 p(ux(rng), uy(rng), uz(rng));
    const Vec3 d = p - center;
    const double r = d.norm();
    if (r > 0.0) {
      const auto hit = mesh.ray_first_hit(Ray{center, d / r});
      if (!hit || hit->distance < r) continue;
    }
    const Vec3 q = p - point;
    sum += (q - q.dot(a) * a).squaredNorm();
  }
  const Vec3 e = box.extent();
  return sum * (e.x() * e.y() * e.z()) / double(samples);
}

/// Contact wrenches rebuilt from scratch with a finely discretized cone: m
/// edges around each inward normal, tangent basis from the cross product with
/// the least-aligned coordinate axis, torques about the center of mass scaled
/// by 1 / bounding radius.
struct RefinedCone {
  Eigen::Matrix<double, 6, Eigen::Dynamic> w;
  std::vector<int> owner;
  int contacts = 0;
  double lambda = 1.0;
  Vec3 com = Vec3::Zero();
};

inline RefinedCone refined_cone(const std::vector<Contact>& cs, const Mesh& mesh, double mu,
                                int m = 64) {
  RefinedCone rc;
  rc.com = mesh.center_of_mass();
  rc.lambda = 1.0 / mesh.bounding_radius();
  rc.contacts = static_cast<int>(cs.size());
  const int edges = mu > 0.0 ? m : 1;
  rc.w.resize(6, static_cast<Eigen::Index>(cs.size()) * edges);
  int col = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Vec3 n = -cs[i].normal.normalized();
    Eigen::Index k;
    n.cwiseAbs().minCoeff(&k);
    const Vec3 t1 = n.cross(Vec3::Unit(k)).normalized();
    const Vec3 t2 = n.cross(t1);
    for (int j = 0; j < edges; ++j) {
      const double a = 2.0 * 3.14159265358979323846 * j / edges;
      const Vec3 f = n + mu * (std::cos(a) * t1 + std::sin(a) * t2);
      rc.w.col(col).head<3>() = f;
      rc.w.col(col).tail<3>() = rc.lambda * (cs[i].point - rc.com).cross(f);
      rc.owner.push_back(static_cast<int>(i));
      ++col;
    }
  }
  return rc;
}

/// min Σα s.t. Wα + extra·β = rhs, α, β ≥ 0 (β unpenalized); ∞ if infeasible.
inline double refined_min_force(const RefinedCone& rc, const Eigen::Matrix<double, 6, 1>& rhs,
                                const std::optional<Eigen::Matrix<double, 6, 1>>& extra = {}) {
  const int k = static_cast<int>(rc.w.cols());
  lp::LinearProgram p(6, k + (extra ? 1 : 0));
  p.A.leftCols(k) = rc.w;
  if (extra) p.A.col(k) = *extra;
  p.c.setZero();
  p.c.head(k).setOnes();
  p.b = rhs;
  const auto r = lp::solve(p);
  return r.status == lp::Status::Optimal ? r.objective : std::numeric_limits<double>::infinity();
}

/// Holding effort against unit gravity along ±x, ±y, ±z.
inline std::array<double, 6> refined_effort_hold(const RefinedCone& rc) {
  std::array<double, 6> out{};
  for (int d = 0; d < 6; ++d) {
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    g[d / 2] = d % 2 == 0 ? 1.0 : -1.0;
    out[d] = refined_min_force(rc, -g);
  }
  return out;
}

/// Impact effort for torque κ·I·axis with a free use force at (u, n_in).
inline double refined_effort_impact(const RefinedCone& rc, const Vec3& u, const Vec3& n_in,
                                    const Vec3& axis, double inertia, double kappa) {
  Eigen::Matrix<double, 6, 1> use;
  use.head<3>() = n_in.normalized();
  use.tail<3>() = rc.lambda * (u - rc.com).cross(n_in.normalized());
  Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
  const double mag = rc.lambda * kappa * inertia;
  rhs.tail<3>() = -axis.normalized();
  const double unit = refined_min_force(rc, rhs, use);
  return std::isinf(unit) ? unit : mag * unit;
}

/// Largest use force opposed with unit normal force per contact.
inline double refined_force_to_use(const RefinedCone& rc, const Vec3& u, const Vec3& n_in) {
  const int k = static_cast<int>(rc.w.cols());
  lp::LinearProgram p(6 + rc.contacts, k + 1);
  p.sense = lp::Sense::Maximize;
  p.c.setZero();
  p.c[k] = 1.0;
  p.A.setZero();
  p.A.topLeftCorner(6, k) = rc.w;
  p.A.block<3, 1>(0, k) = n_in.normalized();
  p.A.block<3, 1>(3, k) = rc.lambda * (u - rc.com).cross(n_in.normalized());
  p.b.setZero();
  // Per-contact normal force: Σ_j α_ij (each edge has unit normal component).
  for (int j = 0; j < k; ++j) p.A(6 + rc.owner[j], j) = 1.0;
  for (int i = 0; i < rc.contacts; ++i) {
    p.relations[6 + i] = lp::Relation::LessEqual;
    p.b[6 + i] = 1.0;
  }
  const auto r = lp::solve(p);
  return r.status == lp::Status::Optimal ? std::max(0.0, r.objective) : 0.0;
}

}  // namespace tgqm::oracle
