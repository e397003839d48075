#pragma once

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "tgqm/geom/mesh.hpp"
#include "tgqm/hand/hand.hpp"

namespace tgqm {

using Wrench = Eigen::Matrix<double, 6, 1>;

class NoContacts : public std::runtime_error {
 public:
  NoContacts() : std::runtime_error("grasp has no contacts") {}
};

/// Hard point contacts with Coulomb friction, cone linearized by m edges.
struct FrictionModel {
  double mu = 0.4;
  int cone_edges = 8;
  void validate() const;
};

/// Which wrist axis drives I, E_i and δ.
enum class WristAxis { Roll, Pitch };

struct MetricConfig {
  FrictionModel friction;
  double kappa = 1.0;               // impact torque per unit inertia
  int epsilon_directions = 4096;    // sampled 6-D directions
  int epsilon_refine_starts = 32;   // local refinements from the best samples
  WristAxis wrist_axis = WristAxis::Roll;
  void validate() const;
};

/// Primitive contact wrenches, one column each: (f, λ (p - c) × f).
struct WrenchSet {
  Eigen::Matrix<double, 6, Eigen::Dynamic> wrenches;
  std::vector<int> contact;     // owning contact of each column
  int contact_count = 0;
  Vec3 reference = Vec3::Zero();  // center of mass
  double torque_scale = 1.0;      // λ = 1 / bounding_radius

  int size() const { return static_cast<int>(wrenches.cols()); }
};

/// Use location on the surface; the use force pushes along inward_normal.
struct UsePoint {
  Vec3 point = Vec3::Zero();
  Vec3 inward_normal = -Vec3::UnitZ();
  int triangle = -1;
};

struct MetricVector {
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  double eps = 0.0;
  double inertia = 0.0;
  double effort_impact = kInf;
  std::array<double, 6> effort_hold{kInf, kInf, kInf, kInf, kInf, kInf};
  double discharge = 0.0;
  double use_force = 0.0;
  double use_geometry = 0.0;

  bool force_closure = false;
  bool use_valid = true;
  bool use_rank_deficient = false;

  double effort_hold_sum() const;
  /// eps, inertia, e_i, e_h[0..5], delta, u_tau, u_g.
  std::array<double, 12> to_array() const;
  static MetricVector from_array(const std::array<double, 12>& v);
};

/// Linearized cone edges f = n_in + μ(cos φ_j t1 + sin φ_j t2), φ_j = 2πj/m,
/// t2 = n_in × t1. t1 is the contact triangle's first edge direction, or
/// orthogonal_unit(n_in) when the contact carries no triangle index. μ = 0
/// gives a single generator per contact. Throws NoContacts when empty.
WrenchSet cone_wrenches(std::span<const Contact> contacts, const Mesh& mesh,
                        const FrictionModel& fm);

/// Wrench of a unit force along the use point's inward normal.
Wrench use_wrench(const UsePoint& use, const Mesh& mesh);

/// ε = min over unit u of max_k w_k·u, clamped at 0. Sampled on
/// low-discrepancy directions and refined locally from the best samples.
struct EpsilonResult {
  double eps = 0.0;
  bool force_closure = false;
  double raw = 0.0;  // unclamped estimate
};
EpsilonResult epsilon_quality(const WrenchSet& ws, const MetricConfig& cfg = {});

/// Plain sampled support minimum over `directions` Gaussian-normalized
/// directions from the same low-discrepancy sequence (no refinement, no
/// clamping). Exposed for diagnostics and oracles.
double sampled_support_min(const WrenchSet& ws, int directions);

/// Unit-density moment of inertia about the line through `point` along
/// `axis` (unit): aᵀ J a + V d².
double rotational_inertia(const Mesh& mesh, const Vec3& point, const Vec3& axis);

/// Wrist rotation axis of a grasp (unit, through grasp.pose.wrist).
Vec3 wrist_axis(const Grasp& grasp, WristAxis which);

/// Minimum total normal force holding the object against unit gravity
/// along +x, -x, +y, -y, +z, -z (in that order); ∞ when infeasible.
std::array<double, 6> effort_hold(const WrenchSet& ws);

/// Minimum total hand normal force balancing the impact torque κ·I·axis,
/// helped by a free use force along the inward normal. Passing no use point
/// drops the use force.
double effort_impact(const WrenchSet& ws, const std::optional<Wrench>& use, const Vec3& axis,
                     double inertia, double kappa);

/// max(0, axis · normalize((U - wrist) × n_in)); 0 for a vanishing torque.
double discharge_efficiency(const Vec3& wrist, const Vec3& axis, const UsePoint& use);

/// Largest use force the hand can oppose with unit per-contact normal force.
double force_to_use(const WrenchSet& ws, const Wrench& use);

struct UseGeometry {
  double value = 0.0;
  bool rank_deficient = false;
};
/// (λ1 - λ2)² of the local quadric at the use point.
UseGeometry use_geometry(const Mesh& mesh, const UsePoint& use);

/// Assembles the metric vector. A grasp without contacts gets ε = 0, infinite
/// efforts, δ = U_τ = 0. Without a use point (ray found no surface) δ, U_τ
/// and U_g are zero and E_i is computed without the use force.
MetricVector compute_phi(const Mesh& mesh, const Grasp& grasp,
                         const std::optional<UsePoint>& use, const MetricConfig& cfg = {});

}  // namespace tgqm
