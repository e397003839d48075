#include "tgqm/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>

#include <Eigen/QR>
#include <boost/math/distributions/normal.hpp>

#include "tgqm/geom/quadric.hpp"
#include "tgqm/lp/simplex.hpp"

namespace tgqm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Directions = Eigen::Matrix<double, 6, Eigen::Dynamic>;

double radical_inverse(unsigned base, unsigned long index) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * double(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

// Halton points pushed through the normal quantile and normalized: uniform
// on the 5-sphere in distribution, but evenly spread like the Halton set.
std::shared_ptr<const Directions> direction_set(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const Directions>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    static const unsigned primes[6] = {2, 3, 5, 7, 11, 13};
    const boost::math::normal gauss;
    auto d = std::make_shared<Directions>(6, n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < 6; ++k) {
        (*d)(k, i) = boost::math::quantile(gauss, radical_inverse(primes[k], i + 1));
      }
      d->col(i).normalize();
    }
    slot = d;
  }
  return slot;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> unique_columns(
    const Eigen::Matrix<double, 6, Eigen::Dynamic>& w) {
  std::vector<int> keep;
  for (int i = 0; i < w.cols(); ++i) {
    bool dup = false;
    for (int k : keep) {
      if (w.col(k) == w.col(i)) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(i);
  }
  Eigen::Matrix<double, 6, Eigen::Dynamic> out(6, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(j) = w.col(keep[j]);
  return out;
}

// Walks hull facets toward a locally nearest one. For a wrench set whose
// hull contains the origin, min Σα s.t. Wα = g, α >= 0 reaches the facet hit
// by the ray along g; its dual y satisfies y·w <= 1 for every wrench with
// equality on the facet, so the facet lies at distance 1/‖y‖. Re-aiming the
// ray along y never decreases ‖y‖ and stops on a facet whose foot point is
// inside it.
class FacetWalk {
 public:
  explicit FacetWalk(const Eigen::Matrix<double, 6, Eigen::Dynamic>& w)
      : lp_(6, static_cast<int>(w.cols())) {
    lp_.A = w;
    lp_.c.setOnes();
  }

  std::optional<Wrench> facet(const Wrench& g) {
    lp_.b = g;
    const auto r = lp::solve(lp_);
    if (r.status != lp::Status::Optimal) return std::nullopt;
    return Wrench(r.duals);
  }

  // Distance of the facet reached from direction u, or +inf when the walk
  // joins one already taken.
  double walk(const Wrench& u, std::vector<Wrench>& seen) {
    auto y = facet(u);
    if (!y) return kInf;
    for (const auto& s : seen) {
      if ((*y - s).norm() <= 1e-12 * s.norm()) return kInf;
    }
    seen.push_back(*y);
    for (int it = 0; it < 64; ++it) {
      const auto next = facet(*y);
      if (!next || next->norm() <= y->norm() * (1.0 + 1e-12)) break;
      y = next;
    }
    return 1.0 / y->norm();
  }

 private:
  lp::LinearProgram lp_;
};

// The origin is interior to the convex hull of the columns iff they
// positively span R^6: full rank and some strictly positive combination
// vanishes. The second part is max t s.t. W(s + t·1) = 0, Σs + K·t = 1.
bool positively_spans(const Eigen::Matrix<double, 6, Eigen::Dynamic>& w) {
  const int k = static_cast<int>(w.cols());
  if (k < 7) return false;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(w);
  qr.setThreshold(1e-10);
  if (qr.rank() < 6) return false;
  lp::LinearProgram p(7, k + 1);
  p.sense = lp::Sense::Maximize;
  p.c[k] = 1.0;
  p.A.topLeftCorner(6, k) = w;
  p.A.block<6, 1>(0, k) = w.rowwise().sum();
  p.A.row(6).head(k).setOnes();
  p.A(6, k) = k;
  p.b[6] = 1.0;
  const auto r = lp::solve(p);
  return r.status == lp::Status::Optimal && r.objective > 1e-9 / k;
}

// First tangent of a contact frame. Taken from the contact triangle's first
// edge so the linearized cone turns with the object; contacts without a
// triangle fall back to the smallest-component rule.
Vec3 tangent_reference(const Mesh& mesh, int triangle, const Vec3& n) {
  if (triangle >= 0 && triangle < static_cast<int>(mesh.triangle_count())) {
    const auto& t = mesh.triangles()[triangle];
    const Vec3 e = mesh.vertices()[t[1]] - mesh.vertices()[t[0]];
    const Vec3 p = e - e.dot(n) * n;
    if (p.norm() > 1e-9 * e.norm()) return p.normalized();
  }
  return orthogonal_unit(n);
}

lp::LinearProgram equality_lp(const WrenchSet& ws, int extra_columns) {
  lp::LinearProgram p(6, ws.size() + extra_columns);
  p.A.leftCols(ws.size()) = ws.wrenches;
  return p;
}

double finite_or_inf(const lp::LpOutcome& r) {
  return r.status == lp::Status::Optimal ? std::max(0.0, r.objective) : kInf;
}

}  // namespace

void FrictionModel::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("friction: mu must be >= 0");
  if (cone_edges < 4) throw std::invalid_argument("friction: cone_edges must be >= 4");
}

void MetricConfig::validate() const {
  friction.validate();
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be >= 0");
  if (epsilon_directions < 1) throw std::invalid_argument("epsilon_directions must be >= 1");
  if (epsilon_refine_starts < 0) throw std::invalid_argument("epsilon_refine_starts must be >= 0");
}

double MetricVector::effort_hold_sum() const {
  double s = 0.0;
  for (double e : effort_hold) s += e;
  return s;
}

std::array<double, 12> MetricVector::to_array() const {
  return {eps,            inertia,        effort_impact,  effort_hold[0],
          effort_hold[1], effort_hold[2], effort_hold[3], effort_hold[4],
          effort_hold[5], discharge,      use_force,      use_geometry};
}

MetricVector MetricVector::from_array(const std::array<double, 12>& v) {
  MetricVector m;
  m.eps = v[0];
  m.inertia = v[1];
  m.effort_impact = v[2];
  for (int i = 0; i < 6; ++i) m.effort_hold[i] = v[3 + i];
  m.discharge = v[9];
  m.use_force = v[10];
  m.use_geometry = v[11];
  m.force_closure = m.eps > 0.0;
  return m;
}

WrenchSet cone_wrenches(std::span<const Contact> contacts, const Mesh& mesh,
                        const FrictionModel& fm) {
  fm.validate();
  if (contacts.empty()) throw NoContacts();
  WrenchSet ws;
  ws.reference = mesh.center_of_mass();
  ws.torque_scale = 1.0 / mesh.bounding_radius();
  ws.contact_count = static_cast<int>(contacts.size());
  const int m = fm.mu > 0.0 ? fm.cone_edges : 1;
  ws.wrenches.resize(6, static_cast<Eigen::Index>(contacts.size()) * m);
  int col = 0;
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const Vec3 n = -contacts[i].normal.normalized();
    const Vec3 t1 = tangent_reference(mesh, contacts[i].triangle, n);
    const Vec3 t2 = n.cross(t1);
    const Vec3 arm = ws.torque_scale * (contacts[i].point - ws.reference);
    for (int j = 0; j < m; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / m;
      const Vec3 f = n + fm.mu * (std::cos(phi) * t1 + std::sin(phi) * t2);
      ws.wrenches.col(col).head<3>() = f;
      ws.wrenches.col(col).tail<3>() = arm.cross(f);
      ws.contact.push_back(static_cast<int>(i));
      ++col;
    }
  }
  return ws;
}

Wrench use_wrench(const UsePoint& use, const Mesh& mesh) {
  Wrench w;
  const Vec3 n = use.inward_normal.normalized();
  w.head<3>() = n;
  w.tail<3>() = ((use.point - mesh.center_of_mass()) / mesh.bounding_radius()).cross(n);
  return w;
}

double sampled_support_min(const WrenchSet& ws, int directions) {
  const auto dirs = direction_set(directions);
  return (ws.wrenches.transpose() * (*dirs)).colwise().maxCoeff().minCoeff();
}

EpsilonResult epsilon_quality(const WrenchSet& ws, const MetricConfig& cfg) {
  if (ws.size() == 0) throw NoContacts();
  const auto w = unique_columns(ws.wrenches);
  if (!positively_spans(w)) return {0.0, false, 0.0};
  const auto dirs = direction_set(cfg.epsilon_directions);
  const int keep = std::max(1, cfg.epsilon_refine_starts);

  // Best `keep` directions; a direction is abandoned as soon as one wrench
  // shows it cannot beat the current worst kept value.
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry> best;
  const Eigen::Index k_count = w.cols();
  for (int i = 0; i < dirs->cols(); ++i) {
    const auto u = dirs->col(i);
    const double bound = static_cast<int>(best.size()) < keep ? kInf : best.top().first;
    double h = -kInf;
    for (Eigen::Index k = 0; k < k_count; ++k) {
      h = std::max(h, w.col(k).dot(u));
      if (h >= bound) break;
    }
    if (h <= 0.0) return {0.0, false, h};  // numerically marginal closure
    if (h < bound) {
      best.push({h, i});
      if (static_cast<int>(best.size()) > keep) best.pop();
    }
  }
  std::vector<Entry> starts;
  while (!best.empty()) {
    starts.push_back(best.top());
    best.pop();
  }
  std::sort(starts.begin(), starts.end());

  double eps = starts.front().first;
  if (cfg.epsilon_refine_starts > 0) {
    FacetWalk walker(w);
    std::vector<Wrench> seen;
    for (const auto& start : starts) {
      eps = std::min(eps, walker.walk(dirs->col(start.second), seen));
    }
  }
  if (eps <= 0.0) return {0.0, false, eps};
  return {eps, true, eps};
}

double rotational_inertia(const Mesh& mesh, const Vec3& point, const Vec3& axis) {
  const Vec3 a = axis.normalized();
  const Vec3 r = mesh.center_of_mass() - point;
  const double d2 = (r - r.dot(a) * a).squaredNorm();
  return a.dot(mesh.inertia_tensor() * a) + mesh.volume() * d2;
}

Vec3 wrist_axis(const Grasp& grasp, WristAxis which) {
  return which == WristAxis::Roll ? grasp.pose.rotation.col(2) : grasp.pose.rotation.col(0);
}

std::array<double, 6> effort_hold(const WrenchSet& ws) {
  if (ws.size() == 0) throw NoContacts();
  std::array<double, 6> out{};
  lp::LinearProgram p = equality_lp(ws, 0);
  p.c.setOnes();
  for (int d = 0; d < 6; ++d) {
    p.b.setZero();
    // Σ α w = -(ĝ, 0)
    p.b[d / 2] = d % 2 == 0 ? -1.0 : 1.0;
    out[d] = finite_or_inf(lp::solve(p));
  }
  return out;
}

double effort_impact(const WrenchSet& ws, const std::optional<Wrench>& use, const Vec3& axis,
                     double inertia, double kappa) {
  if (ws.size() == 0) throw NoContacts();
  const int extra = use ? 1 : 0;
  lp::LinearProgram p = equality_lp(ws, extra);
  p.c.head(ws.size()).setOnes();
  if (use) p.A.col(ws.size()) = *use;
  // The optimum is positively homogeneous in the impact torque, so solve for
  // a unit torque and rescale; unit-density inertias can be far below the
  // solver's absolute tolerances.
  const double magnitude = ws.torque_scale * kappa * inertia;
  if (magnitude == 0.0) return 0.0;
  p.b.tail<3>() = -axis.normalized();
  const double unit = finite_or_inf(lp::solve(p));
  return std::isinf(unit) ? unit : magnitude * unit;
}

double discharge_efficiency(const Vec3& wrist, const Vec3& axis, const UsePoint& use) {
  const Vec3 tau = (use.point - wrist).cross(use.inward_normal.normalized());
  const double n = tau.norm();
  if (n < 1e-12) return 0.0;
  return std::clamp(axis.normalized().dot(tau / n), 0.0, 1.0);
}

double force_to_use(const WrenchSet& ws, const Wrench& use) {
  if (ws.size() == 0) throw NoContacts();
  const int k = ws.size();
  const int nc = ws.contact_count;
  lp::LinearProgram p(6 + nc, k + 1);
  p.sense = lp::Sense::Maximize;
  p.c[k] = 1.0;
  p.A.topLeftCorner(6, k) = ws.wrenches;
  p.A.block<6, 1>(0, k) = use;
  for (int j = 0; j < k; ++j) p.A(6 + ws.contact[j], j) = 1.0;
  for (int i = 0; i < nc; ++i) {
    p.relations[6 + i] = lp::Relation::LessEqual;
    p.b[6 + i] = 1.0;
  }
  const auto r = lp::solve(p);
  return r.status == lp::Status::Optimal ? std::max(0.0, r.objective) : 0.0;
}

UseGeometry use_geometry(const Mesh& mesh, const UsePoint& use) {
  SurfaceHit hit;
  hit.point = use.point;
  hit.triangle = use.triangle;
  hit.normal = -use.inward_normal;
  const Curvatures c = local_quadric_curvatures(mesh, hit);
  if (c.rank_deficient) return {0.0, true};
  const double d = c.k1 - c.k2;
  return {d * d, false};
}

MetricVector compute_phi(const Mesh& mesh, const Grasp& grasp,
                         const std::optional<UsePoint>& use, const MetricConfig& cfg) {
  cfg.validate();
  MetricVector mv;
  const Vec3 axis = wrist_axis(grasp, cfg.wrist_axis);
  mv.inertia = rotational_inertia(mesh, grasp.pose.wrist, axis);
  mv.use_valid = use.has_value();
  if (use) {
    const UseGeometry ug = use_geometry(mesh, *use);
    mv.use_geometry = ug.value;
    mv.use_rank_deficient = ug.rank_deficient;
  }
  if (!grasp.reached_object || grasp.contacts.empty()) return mv;

  const WrenchSet ws = cone_wrenches(grasp.contacts, mesh, cfg.friction);
  const EpsilonResult eps = epsilon_quality(ws, cfg);
  mv.eps = eps.eps;
  mv.force_closure = eps.force_closure;
  mv.effort_hold = effort_hold(ws);
  std::optional<Wrench> uw;
  if (use) uw = use_wrench(*use, mesh);
  mv.effort_impact = effort_impact(ws, uw, axis, mv.inertia, cfg.kappa);
  if (use) {
    mv.discharge = discharge_efficiency(grasp.pose.wrist, axis, *use);
    mv.use_force = force_to_use(ws, *uw);
  }
  return mv;
}

}  // namespace tgqm
