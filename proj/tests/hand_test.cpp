#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tgqm/geom/shapes.hpp"
#include "tgqm/hand/hand.hpp"

using namespace tgqm;

namespace {

constexpr double kPi = std::numbers::pi;

Pregrasp random_pregrasp(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> s(-1.0, 1.0), u(0.0, 1.0);
  return {s(rng), s(rng), s(rng), s(rng), s(rng), u(rng)};
}

}  // namespace

TEST(Pregrasp, DecodeAndValidate) {
  EXPECT_TRUE(spherical_direction(0.0, 0.0).isApprox(Vec3::UnitX(), 1e-15));
  EXPECT_TRUE(spherical_direction(-1.0, 0.3).isApprox(Vec3::UnitZ(), 1e-15));
  EXPECT_TRUE(spherical_direction(1.0, -0.7).isApprox(-Vec3::UnitZ(), 1e-15));
  EXPECT_TRUE(spherical_direction(0.0, 0.5).isApprox(Vec3::UnitY(), 1e-15));
  EXPECT_THROW((Pregrasp{1.5, 0, 0, 0, 0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((Pregrasp{0, 0, 0, 0, 0, -0.1}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((Pregrasp{-1, 1, -1, 1, -1, 1}.validate()));
  const Pregrasp p{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  EXPECT_EQ(Pregrasp::from_array(p.to_array()).to_array(), p.to_array());
}

TEST(PregraspPose, ZeroPregraspOnUnitSphere) {
  const Mesh m = shapes::icosphere(1.0, 3).to_mesh();
  const HandConfig hand;
  const HandPose pose = pregrasp_pose(Pregrasp{}, m, hand);
  // theta = pi/2, phi = 0: the hand sits on +x looking along -x.
  EXPECT_TRUE(pose.approach().isApprox(-Vec3::UnitX(), 1e-15));
  const double back = hand.standoff_factor * m.bounding_radius() + hand.finger_length();
  EXPECT_LT((pose.wrist - (m.center_of_mass() + back * Vec3::UnitX())).norm(), 1e-12);
  EXPECT_LT((pose.rotation.transpose() * pose.rotation - Mat3::Identity()).norm(), 1e-14);
  EXPECT_NEAR(pose.rotation.determinant(), 1.0, 1e-14);
}

TEST(PregraspPose, FullOffsetMovesByProjectedHalfExtent) {
  const Mesh m = shapes::box({-0.1, -0.2, -0.3}, {0.1, 0.2, 0.3}, 0.05).to_mesh();
  const HandPose centered = pregrasp_pose(Pregrasp{}, m);
  const HandPose shifted = pregrasp_pose(Pregrasp{0, 0, 0, 1, 0, 0}, m);
  // Approach -x; the smallest-component rule gives hand x = +y... whichever
  // axis it is, it is a box axis so the half-extent is exact.
  const Vec3 d = shifted.wrist - centered.wrist;
  const Vec3 x0 = centered.rotation.col(0);
  const double expect = std::abs(x0.x()) * 0.1 + std::abs(x0.y()) * 0.2 + std::abs(x0.z()) * 0.3;
  EXPECT_NEAR(d.norm(), expect, 1e-12);
  EXPECT_NEAR(d.normalized().dot(x0), 1.0, 1e-12);
}

TEST(PregraspPose, RollOnlyRotatesAboutApproach) {
  const Mesh m = shapes::hammer().to_mesh();
  const Pregrasp a{0.3, -0.4, 0.0, 0.2, -0.5, 0.5};
  Pregrasp b = a;
  b.roll = 0.37;
  const HandPose pa = pregrasp_pose(a, m);
  const HandPose pb = pregrasp_pose(b, m);
  EXPECT_EQ(pa.wrist, pb.wrist);
  const Mat3 expected =
      Eigen::AngleAxisd(0.37 * kPi, pa.approach()).toRotationMatrix() * pa.rotation;
  EXPECT_LT((pb.rotation - expected).norm(), 1e-12);
}

TEST(Policy, ApproachAimedAwayMisses) {
  const Mesh m = shapes::icosphere(0.05, 3).to_mesh();
  HandPose start;
  start.wrist = Vec3(0, 0, -0.3);
  start.rotation = Eigen::AngleAxisd(kPi, Vec3::UnitX()).toRotationMatrix();  // looks -z
  const Grasp g = execute_policy(m, start, 0.0);
  EXPECT_FALSE(g.reached_object);
  EXPECT_TRUE(g.contacts.empty());
}

TEST(Policy, SphereThroughCenterMatchesAnalyticContacts) {
  // Sphere small enough that the open fingers pass around it, so the palm
  // lands on the pole. Spread 2pi/3 turns all three fingers toward the axis.
  const double r = 0.04;
  const Mesh m = shapes::icosphere(r, 5).to_mesh();
  const Grasp g = execute_policy(m, Pregrasp{0, 0, 0, 0, 0, 2.0 / 3.0});
  ASSERT_TRUE(g.reached_object);
  const Vec3 c = m.center_of_mass();
  int palm = 0;
  std::array<int, 3> per_finger{};
  for (const auto& k : g.contacts) {
    EXPECT_NEAR((k.point - c).norm(), r, 1e-4);
    EXPECT_GT(k.normal.dot((k.point - c).normalized()), 0.99);
    if (k.source == ContactSource::Palm) {
      ++palm;
      // Pole facing the hand.
      EXPECT_LT((k.point - (c - r * g.pose.approach())).norm(), 2e-3);
    } else {
      ++per_finger[k.finger];
    }
  }
  EXPECT_EQ(palm, 1);
  for (int f = 0; f < 3; ++f) EXPECT_GE(per_finger[f], 1) << "finger " << f;

  // Proximal links stop where the link line becomes tangent to the sphere:
  // the center lies at (0.05 inward, 0.04 ahead) of each finger base.
  const double hand_palm = HandConfig{}.palm_radius;
  const double dist = std::hypot(hand_palm, r);
  const double tangent = std::atan2(hand_palm, r) - std::asin(r / dist);
  for (int f = 0; f < 3; ++f) {
    EXPECT_NEAR(g.joints[2 * f], tangent, 0.5 * kPi / 180.0) << "finger " << f;
  }
}

TEST(Policy, DeterministicBitIdentical) {
  const Mesh m = shapes::hammer().to_mesh();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 40; ++i) {
    const Pregrasp p = random_pregrasp(rng);
    const Grasp a = execute_policy(m, p);
    const Grasp b = execute_policy(m, p);
    ASSERT_EQ(a.reached_object, b.reached_object);
    ASSERT_EQ(a.contacts.size(), b.contacts.size());
    EXPECT_EQ(a.joints, b.joints);
    EXPECT_EQ(a.pose.wrist, b.pose.wrist);
    for (std::size_t k = 0; k < a.contacts.size(); ++k) {
      EXPECT_EQ(a.contacts[k].point, b.contacts[k].point);
      EXPECT_EQ(a.contacts[k].triangle, b.contacts[k].triangle);
    }
  }
}

TEST(Policy, ContactsLieOnSurfaceWithTriangleNormals) {
  std::mt19937_64 rng(11);
  int reached = 0;
  for (const auto& name : shapes::builtin_names()) {
    const Mesh m = shapes::builtin(name).to_mesh();
    for (int i = 0; i < 25; ++i) {
      const Grasp g = execute_policy(m, random_pregrasp(rng));
      if (!g.reached_object) {
        EXPECT_TRUE(g.contacts.empty());
        continue;
      }
      ++reached;
      EXPECT_FALSE(g.contacts.empty());
      for (const auto& k : g.contacts) {
        EXPECT_LT(m.closest_point(k.point).distance, 1e-4) << name;
        EXPECT_EQ(k.normal, m.normals()[k.triangle]);
      }
      for (std::size_t a = 0; a < g.contacts.size(); ++a) {
        for (std::size_t b = a + 1; b < g.contacts.size(); ++b) {
          EXPECT_GE((g.contacts[a].point - g.contacts[b].point).norm(), 1e-3);
        }
      }
      for (double q : g.joints) {
        EXPECT_GE(q, 0.0);
        EXPECT_LE(q, HandConfig{}.joint_limit_deg * kPi / 180.0 + 1e-12);
      }
    }
  }
  EXPECT_GT(reached, 50);
}

TEST(Policy, RigidEquivariance) {
  const shapes::Shell shell = shapes::knife();
  const Mesh m = shell.to_mesh();
  std::mt19937_64 rng(17);
  const Mat3 R = oracle::random_rotation(rng);
  const Vec3 t(0.31, -0.12, 0.07);
  shapes::Shell moved = shell;
  moved.transform(R, t);
  const Mesh mm = moved.to_mesh();
  int compared = 0;
  for (int i = 0; i < 30; ++i) {
    const Pregrasp p = random_pregrasp(rng);
    const HandPose start = pregrasp_pose(p, m);
    HandPose start2;
    start2.wrist = R * start.wrist + t;
    start2.rotation = R * start.rotation;
    const Grasp a = execute_policy(m, start, p.spread * kPi);
    const Grasp b = execute_policy(mm, start2, p.spread * kPi);
    ASSERT_EQ(a.reached_object, b.reached_object);
    ASSERT_EQ(a.contacts.size(), b.contacts.size()) << "sample " << i;
    for (std::size_t k = 0; k < a.contacts.size(); ++k) {
      EXPECT_LT((R * a.contacts[k].point + t - b.contacts[k].point).norm(), 1e-6);
      EXPECT_LT((R * a.contacts[k].normal - b.contacts[k].normal).norm(), 1e-9);
    }
    compared += static_cast<int>(a.contacts.size());
  }
  EXPECT_GT(compared, 10);
}
