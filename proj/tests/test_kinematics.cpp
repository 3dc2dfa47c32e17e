// Copyright 2026 The quadmimic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "quadmimic/config.hpp"
#include "quadmimic/kinematics.hpp"
#include "test_util.hpp"

namespace quadmimic {
namespace {

using testing::random_joints;
using testing::random_quat;
using testing::rel_error;

class KinematicsTest : public ::testing::Test {
 protected:
  QuadrupedModel model = QuadrupedModel::a1_like();
};

TEST_F(KinematicsTest, ZeroPoseLegsPointStraightDown) {
  const FootPositions feet = forward_kinematics(model, Pose{});
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 expected = model.hip_positions[leg] +
                          Vec3(0.0, QuadrupedModel::side_sign(leg) * model.abduction_offset,
                               -(model.thigh_length + model.calf_length));
    EXPECT_LT((feet.body[leg] - expected).norm(), 1e-12) << "leg " << leg;
    EXPECT_LT((feet.world[leg] - expected).norm(), 1e-12) << "leg " << leg;
  }
}

TEST_F(KinematicsTest, RootTranslationShiftsOnlyWorldFeet) {
  Rng rng(3);
  Pose p;
  p.joints = random_joints(model, rng);
  p.root_orientation = random_quat(rng);
  const FootPositions a = forward_kinematics(model, p);
  p.root_position += Vec3(1.0, 0.0, 0.0);
  const FootPositions b = forward_kinematics(model, p);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    EXPECT_LT((b.world[leg] - a.world[leg] - Vec3(1.0, 0.0, 0.0)).norm(), 1e-12);
    EXPECT_LT((b.body[leg] - a.body[leg]).norm(), 1e-15);
  }
}

TEST_F(KinematicsTest, SagittalChainMatchesHandEvaluation) {
  Pose p;
  p.set_leg_joints(0, Vec3(0.0, 0.9, -1.8));
  const Vec3 foot = forward_kinematics(model, p).body[0];
  // Thigh at +0.9 rad and calf at -0.9 rad from vertical: the x offsets
  // cancel and the height is 0.4 cos(0.9).
  EXPECT_NEAR(foot.x(), 0.183, 1e-12);
  EXPECT_NEAR(foot.y(), -0.132 - 0.08, 1e-12);
  EXPECT_NEAR(foot.z(), -0.248643987, 1e-9);
}

TEST_F(KinematicsTest, JacobianMatchesCentralDifferences) {
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const JointVector q = random_joints(model, rng);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3 ql = q.segment<3>(3 * leg);
      const Mat3 analytic = leg_jacobian(model, leg, ql);
      for (int j = 0; j < 3; ++j) {
        const double h = 1e-6;
        Vec3 qp = ql, qm = ql;
        qp[j] += h;
        qm[j] -= h;
        const Vec3 fd = (leg_foot_body<double>(model, leg, qp) - leg_foot_body<double>(model, leg, qm)) / (2 * h);
        worst = std::max(worst, (analytic.col(j) - fd).norm() / std::max(fd.norm(), 1e-8));
      }
    }
  }
  EXPECT_LT(worst, 1e-5);
}

TEST_F(KinematicsTest, StraightLegJacobianIsRankTwo) {
  const Mat3 j = leg_jacobian(model, 0, Vec3::Zero());
  Eigen::FullPivLU<Mat3> lu(j);
  lu.setThreshold(1e-10);
  EXPECT_EQ(lu.rank(), 2);
}

TEST_F(KinematicsTest, AbductionColumnLeavesSagittalPlane) {
  const Mat3 j = leg_jacobian(model, 1, Vec3::Zero());
  EXPECT_NEAR(j(0, 0), 0.0, 1e-15);
  EXPECT_GT(std::abs(j(1, 0)), 0.1);
}

TEST_F(KinematicsTest, IkRoundTrip) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Pose truth;
    truth.joints = random_joints(model, rng);
    truth.root_orientation = random_quat(rng);
    truth.root_position = Vec3(0.3, -0.2, 0.3);
    const FootPositions feet = forward_kinematics(model, truth);
    Pose start = truth;
    start.joints.setZero();
    start.joints = model.clamp(start.joints + JointVector::Constant(-0.5));
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const IkResult r = solve_leg_ik(model, start, leg, feet.world[leg]);
      Pose solved = truth;
      solved.set_leg_joints(leg, r.angles);
      const double err = (forward_kinematics(model, solved).world[leg] - feet.world[leg]).norm();
      ASSERT_TRUE(r.ok()) << "trial " << trial << " leg " << leg << " residual " << r.residual;
      EXPECT_LT(err, 1e-4);
      EXPECT_TRUE(model.within_limits(solved.joints));
    }
  }
}

TEST_F(KinematicsTest, IkReportsUnreachableTargets) {
  const Vec3 hip = model.hip_positions[2];
  const Vec3 far = hip + Vec3(0.0, 0.0, -(model.thigh_length + model.calf_length) - 0.2);
  EXPECT_EQ(solve_leg_ik(model, Pose{}, 2, far).status, IkStatus::kUnreachable);
}

TEST_F(KinematicsTest, BoundaryTargetStraightensKnee) {
  Pose boundary;
  boundary.set_leg_joints(3, Vec3(0.2, 0.5, 0.0));
  const Vec3 target = forward_kinematics(model, boundary).world[3];
  Pose start;
  start.set_leg_joints(3, Vec3(0.0, 0.8, -1.6));
  const IkResult r = solve_leg_ik(model, start, 3, target);
  EXPECT_TRUE(r.ok());
  EXPECT_NEAR(r.angles[2], 0.0, 1e-3);
}

TEST_F(KinematicsTest, ZeroRatesGiveZeroFootRates) {
  Rng rng(9);
  Pose p;
  p.joints = random_joints(model, rng);
  p.root_orientation = random_quat(rng);
  const FootRates r = end_effector_rates(model, p, PoseRates{}, PoseRates{});
  for (int leg = 0; leg < kNumLegs; ++leg) {
    EXPECT_LT(r.velocity[leg].norm(), 1e-15);
    EXPECT_LT(r.acceleration[leg].norm(), 1e-15);
  }
}

TEST_F(KinematicsTest, PureRootRotationIsRigid) {
  Rng rng(10);
  Pose p;
  p.joints = random_joints(model, rng);
  p.root_orientation = random_quat(rng);
  PoseRates rates;
  rates.root_angular_velocity = Vec3(0.3, -0.7, 1.1);  // body frame
  const FootRates r = end_effector_rates(model, p, rates, PoseRates{});
  const FootPositions feet = forward_kinematics(model, p);
  const Vec3 omega_world = p.root_orientation * rates.root_angular_velocity;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 rel = feet.world[leg] - p.root_position;
    EXPECT_LT((r.velocity[leg] - omega_world.cross(rel)).norm(), 1e-12);
  }
}

// Integrates the pose along constant body rates and joint accelerations and
// differentiates the world feet numerically.
TEST_F(KinematicsTest, FootRatesMatchFiniteDifferences) {
  Rng rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst_v = 0.0, worst_a = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Pose p;
    p.joints = random_joints(model, rng, 0.2);
    p.root_orientation = random_quat(rng);
    PoseRates rates, accel;
    for (int i = 0; i < 3; ++i) rates.root_angular_velocity[i] = n(rng);
    for (int i = 0; i < 3; ++i) accel.root_angular_velocity[i] = n(rng);
    for (int j = 0; j < kNumJoints; ++j) rates.joint_velocities[j] = n(rng);
    for (int j = 0; j < kNumJoints; ++j) accel.joint_velocities[j] = n(rng);

    auto feet_at = [&](double t) {
      Pose q = p;
      q.joints = p.joints + rates.joint_velocities * t + 0.5 * accel.joint_velocities * t * t;
      const Vec3 angle = rates.root_angular_velocity * t + 0.5 * accel.root_angular_velocity * t * t;
      q.root_orientation = p.root_orientation * quat_exp(angle);
      return forward_kinematics(model, q).world;
    };
    const double h = 1e-5;
    const FootArray fp = feet_at(h), fm = feet_at(-h);
    const FootRates r = end_effector_rates(model, p, rates, accel);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3 v = (fp[leg] - fm[leg]) / (2 * h);
      worst_v = std::max(worst_v, (r.velocity[leg] - v).norm() / std::max(v.norm(), 1e-3));
    }
    // Accelerations: joint motion only, so the quadratic path is exact.
    PoseRates joint_only = rates, joint_accel = accel;
    joint_only.root_angular_velocity.setZero();
    joint_accel.root_angular_velocity.setZero();
    auto feet_joint = [&](double t) {
      Pose q = p;
      q.joints = p.joints + joint_only.joint_velocities * t + 0.5 * joint_accel.joint_velocities * t * t;
      return forward_kinematics(model, q).world;
    };
    const double h2 = 1e-4;
    const FootArray gp = feet_joint(h2), gm = feet_joint(-h2), g0 = feet_joint(0.0);
    const FootRates rj = end_effector_rates(model, p, joint_only, joint_accel);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3 a = (gp[leg] - 2 * g0[leg] + gm[leg]) / (h2 * h2);
      worst_a = std::max(worst_a, (rj.acceleration[leg] - a).norm() / std::max(a.norm(), 1e-3));
    }
  }
  EXPECT_LT(worst_v, 1e-4);
  EXPECT_LT(worst_a, 1e-4);
}

TEST_F(KinematicsTest, RigidAccelerationFormula) {
  Rng rng(14);
  Pose p;
  p.joints = random_joints(model, rng);
  p.root_orientation = random_quat(rng);
  PoseRates rates, accel;
  rates.root_angular_velocity = Vec3(0.4, 0.1, -0.3);
  accel.root_angular_velocity = Vec3(-1.0, 0.5, 0.2);
  const FootRates r = end_effector_rates(model, p, rates, accel);
  const Mat3 rot = p.root_orientation.toRotationMatrix();
  const Vec3 w = rot * rates.root_angular_velocity, al = rot * accel.root_angular_velocity;
  const FootArray world = forward_kinematics(model, p).world;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 rel = world[leg] - p.root_position;
    EXPECT_LT((r.acceleration[leg] - (al.cross(rel) + w.cross(w.cross(rel)))).norm(), 1e-12);
  }
}

TEST(SupportPolygonTest, InteriorPointIsZero) {
  std::vector<Eigen::Vector2d> pts = {{0.2, 0.15}, {0.2, -0.15}, {-0.2, 0.15}, {-0.2, -0.15}};
  const auto hull = convex_hull(pts);
  EXPECT_EQ(hull.size(), 4u);
  EXPECT_EQ(distance_to_hull(hull, {0.0, 0.0}).distance, 0.0);
}

TEST(SupportPolygonTest, TriangleOutsideMatchesSegmentOracle) {
  const std::vector<Eigen::Vector2d> tri = {{0.2, 0.15}, {0.2, -0.15}, {-0.2, 0.15}};
  const auto hull = convex_hull(tri);
  // The hypotenuse runs from (0.2, -0.15) to (-0.2, 0.15); step 0.05 away
  // from its midpoint along the outward normal.
  const Eigen::Vector2d mid(0.0, 0.0);
  const Eigen::Vector2d normal = Eigen::Vector2d(-0.15, -0.2).normalized();
  const Eigen::Vector2d query = mid + 0.05 * normal;
  EXPECT_NEAR(distance_to_hull(hull, query).distance, 0.05, 1e-12);
}

TEST(SupportPolygonTest, ContinuousAcrossEdge) {
  const std::vector<Eigen::Vector2d> sq = {{0.2, 0.15}, {0.2, -0.15}, {-0.2, 0.15}, {-0.2, -0.15}};
  const auto hull = convex_hull(sq);
  double prev = distance_to_hull(hull, {0.0, 0.0}).distance;
  for (int i = 1; i <= 400; ++i) {
    const double x = 0.4 * i / 400.0;
    const double d = distance_to_hull(hull, {x, 0.05}).distance;
    EXPECT_LE(std::abs(d - prev), 0.4 / 400.0 + 1e-12);
    EXPECT_NEAR(d, std::max(0.0, x - 0.2), 1e-12);
    prev = d;
  }
  EXPECT_EQ(distance_to_hull(hull, {0.2, 0.05}).distance, 0.0);
}

TEST_F(KinematicsTest, SupportDistanceNeedsRequiredContacts) {
  Pose p;
  p.root_position = Vec3(0.0, 0.0, 0.4);
  // Only the front pair touches: the centre lies behind that segment, yet the
  // distance is defined as zero below three contacts.
  const ContactFlags two = {true, true, false, false};
  EXPECT_EQ(support_polygon_distance(model, p, two, 3), 0.0);
  EXPECT_GT(support_polygon_distance(model, p, two, 2), 0.1);
  const ContactFlags four = {true, true, true, true};
  EXPECT_EQ(support_polygon_distance(model, p, four, 3), 0.0);
}

TEST_F(KinematicsTest, SupportDistanceOutsideTriangle) {
  Pose p;
  p.root_position = Vec3(0.0, 0.0, 0.4);
  // Front-right, front-left and rear-right feet: the trunk centre sits on the
  // diagonal from FL to RR, so lean the rear-right leg inwards to move that
  // edge off the centre.
  p.set_leg_joints(2, Vec3(0.0, -0.5, 0.0));
  const ContactFlags three = {true, true, true, false};
  const FootArray feet = forward_kinematics(model, p).world;
  const Eigen::Vector2d a = feet[1].head<2>(), b = feet[2].head<2>();
  const Eigen::Vector2d c = p.root_position.head<2>();
  // Planar point-to-segment oracle.
  const double t = std::clamp((c - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
  const double oracle = (a + t * (b - a) - c).norm();
  const Eigen::Vector2d fr = feet[0].head<2>();
  const double side_c = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
  const double side_fr = (b - a).x() * (fr - a).y() - (b - a).y() * (fr - a).x();
  ASSERT_LT(side_c * side_fr, 0.0) << "centre must be outside the triangle";
  EXPECT_NEAR(support_polygon_distance(model, p, three, 3), oracle, 1e-12);
}

TEST_F(KinematicsTest, BodyFeetInvariantUnderRootYaw) {
  Rng rng(21);
  Pose p;
  p.joints = random_joints(model, rng);
  const FootArray a = forward_kinematics(model, p).body;
  p.root_orientation = quat_from_rpy(0.0, 0.0, 1.3);
  p.root_position = Vec3(-2.0, 4.0, 0.1);
  const FootPositions b = forward_kinematics(model, p);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    EXPECT_LT((b.body[leg] - a[leg]).norm(), 1e-15);
    EXPECT_LT((b.world[leg] - (p.root_position + p.root_orientation * a[leg])).norm(), 1e-12);
  }
}

TEST(ModelTest, ConfigOverridesAndValidation) {
  const Config cfg = Config::parse("model.thigh_length = 0.25\nmodel.limits.knee.lo = -2.5\n");
  const QuadrupedModel m = QuadrupedModel::from_config(cfg);
  EXPECT_DOUBLE_EQ(m.thigh_length, 0.25);
  EXPECT_DOUBLE_EQ(m.joint_limits[2].lo, -2.5);
  EXPECT_DOUBLE_EQ(m.joint_limits[11].lo, -2.5);
  EXPECT_NE(m.hash(), QuadrupedModel::a1_like().hash());

  QuadrupedModel bad = QuadrupedModel::a1_like();
  bad.calf_length = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = QuadrupedModel::a1_like();
  bad.joint_limits[4] = {1.0, 1.0};
  EXPECT_THROW(bad.validate(), Error);
}

TEST(RotationTest, RpyAndExpLogRoundTrip) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Quat q = random_quat(rng, 1.2);
    const Vec3 rpy = rpy_from_quat(q);
    EXPECT_LT(q.angularDistance(quat_from_rpy(rpy.x(), rpy.y(), rpy.z())), 1e-12);
    EXPECT_LT(q.angularDistance(quat_exp(quat_log(q))), 1e-12);
  }
}

}  // namespace
}  // namespace quadmimic
