#pragma once

#include <array>
#include <vector>

#include "tgqm/geom/mesh.hpp"

namespace tgqm {

/// Six-value policy input. Every field is normalized; see decode helpers.
struct Pregrasp {
  double approach_theta = 0.0;  // [-1, 1] -> polar angle [0, pi]
  double approach_phi = 0.0;    // [-1, 1] -> azimuth [-pi, pi]
  double roll = 0.0;            // [-1, 1] -> [-pi, pi]
  double offset_x = 0.0;        // [-1, 1], fraction of projected half-extent
  double offset_y = 0.0;        // [-1, 1]
  double spread = 0.0;          // [0, 1] -> [0, pi]

  static Pregrasp from_array(const std::array<double, 6>& v);
  std::array<double, 6> to_array() const;
  /// Throws std::invalid_argument if a field is outside its interval.
  void validate() const;
};

/// Unit vector for normalized spherical coordinates (t, p) in [-1, 1]²:
/// polar angle (t+1)/2·π, azimuth p·π.
Vec3 spherical_direction(double t, double p);

/// Simplified three-finger gripper. The palm is a disk in the hand x/y plane
/// centered on the wrist point; the hand looks along its z axis (the
/// approach). Two spreading fingers sit on the palm rim at ±60° from +x, the
/// opposing thumb at 180°. Open fingers point along +z.
struct HandConfig {
  double palm_radius = 0.05;
  double link1 = 0.07;             // proximal link length
  double link2 = 0.055;            // distal link length
  double joint_limit_deg = 100.0;  // both joints
  double standoff_factor = 2.0;
  double proxy_spacing = 0.005;    // collision sample spacing
  double closing_step_deg = 0.5;
  double merge_distance = 1e-3;

  void validate() const;
  double finger_length() const { return link1 + link2; }
};

struct HandPose {
  Vec3 wrist = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();  // columns: hand x, y, z (= approach)

  Vec3 approach() const { return rotation.col(2); }
  Vec3 to_world(const Vec3& local) const { return wrist + rotation * local; }
};

enum class ContactSource { Palm, Link };

struct Contact {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // outward from the object
  int triangle = -1;
  ContactSource source = ContactSource::Palm;
  int finger = -1;  // 0, 1 spreading fingers, 2 thumb; -1 for the palm
  int link = -1;    // 0 proximal, 1 distal
};

struct Grasp {
  HandPose pose;                       // final pose after the approach
  double spread = 0.0;                 // radians
  std::array<double, 6> joints{};      // (proximal, distal) per finger, radians
  std::vector<Contact> contacts;
  bool reached_object = false;
  double travel = 0.0;                 // approach distance covered
};

/// Pose before the approach: wrist on the approach line through the center
/// of mass (shifted by the plane offsets), far enough back that the open
/// fingertips sit standoff_factor·bounding_radius from the center of mass.
HandPose pregrasp_pose(const Pregrasp& p0, const Mesh& mesh, const HandConfig& hand = {});

/// Runs the grasping policy: straight approach to first contact, then each
/// finger closes proximal joint first and distal joint second.
Grasp execute_policy(const Mesh& mesh, const Pregrasp& p0, const HandConfig& hand = {});

/// Same policy from an explicit starting pose and spread angle (radians).
Grasp execute_policy(const Mesh& mesh, const HandPose& start, double spread,
                     const HandConfig& hand = {});

/// Hand-frame geometry of one finger for given joint angles.
struct FingerGeometry {
  Vec3 base, joint, tip;      // hand frame
  Vec3 closing;               // in-plane closing direction (hand frame)
};
FingerGeometry finger_geometry(int finger, double spread, double q1, double q2,
                               const HandConfig& hand);

}  // namespace tgqm
