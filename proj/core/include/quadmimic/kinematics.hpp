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

#ifndef QUADMIMIC_KINEMATICS_HPP_
#define QUADMIMIC_KINEMATICS_HPP_

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadmimic/common.hpp"

namespace quadmimic {

class Config;

struct JointLimit {
  double lo = 0.0;
  double hi = 0.0;
};

// Geometry of a three-joint-per-leg quadruped. All joints at zero put every
// leg straight down; positive hip angle swings the foot backwards and the
// knee bends with negative angles.
struct QuadrupedModel {
  FootArray hip_positions;  // body frame
  double abduction_offset = 0.08;
  double thigh_length = 0.2;
  double calf_length = 0.2;
  std::array<JointLimit, kNumJoints> joint_limits{};
  double joint_velocity_limit = deg2rad(120.0);  // rad/s
  double trunk_height_nominal = 0.30;
  double foot_radius = 0.02;

  static QuadrupedModel a1_like();
  // Reads `model.*` keys; anything missing keeps the a1_like() value.
  static QuadrupedModel from_config(const Config& cfg);

  // Throws Error(kInvalidArgument) when an invariant does not hold.
  void validate() const;

  // +1 for left legs, -1 for right legs.
  static double side_sign(int leg) { return (leg == 1 || leg == 3) ? 1.0 : -1.0; }

  JointVector lower_limits() const;
  JointVector upper_limits() const;
  JointVector clamp(const JointVector& q) const;
  Vec3 clamp_leg(int leg, const Vec3& q) const;
  bool within_limits(const JointVector& q, double tol = 0.0) const;

  // Stable digest of every constant; recorded in dataset headers and run
  // manifests.
  std::string hash() const;
};

struct Pose {
  Vec3 root_position = Vec3::Zero();
  Quat root_orientation = Quat::Identity();
  JointVector joints = JointVector::Zero();

  Vec3 leg_joints(int leg) const { return joints.segment<3>(3 * leg); }
  void set_leg_joints(int leg, const Vec3& q) { joints.segment<3>(3 * leg) = q; }
};

// Body-frame angular rate plus joint rates. A second instance carries the
// matching accelerations.
struct PoseRates {
  Vec3 root_angular_velocity = Vec3::Zero();
  JointVector joint_velocities = JointVector::Zero();

  bool all_finite() const {
    return root_angular_velocity.allFinite() && joint_velocities.allFinite();
  }
};

struct FootPositions {
  FootArray world;
  FootArray body;
};

struct FootRates {
  FootArray velocity;
  FootArray acceleration;
};

// Roll-pitch-yaw (intrinsic Z-Y-X) helpers.
Quat quat_from_rpy(double roll, double pitch, double yaw);
Vec3 rpy_from_quat(const Quat& q);
// Exponential / logarithm maps between rotation vectors and unit quaternions.
Quat quat_exp(const Vec3& rotation_vector);
Vec3 quat_log(const Quat& q);

// Foot position of one leg in the body frame, templated so the retargeting
// loss can differentiate through it.
template <typename T>
Eigen::Matrix<T, 3, 1> leg_foot_body(const QuadrupedModel& model, int leg,
                                     const Eigen::Matrix<T, 3, 1>& q) {
  using std::cos;
  using std::sin;
  const T ca = cos(q[0]), sa = sin(q[0]);
  const T ch = cos(q[1]), sh = sin(q[1]);
  const T ck = cos(q[1] + q[2]), sk = sin(q[1] + q[2]);
  const T l1 = T(model.thigh_length), l2 = T(model.calf_length);
  const T vx = -l1 * sh - l2 * sk;
  const T vy = T(QuadrupedModel::side_sign(leg) * model.abduction_offset);
  const T vz = -l1 * ch - l2 * ck;
  const Vec3& hip = model.hip_positions[leg];
  return {T(hip.x()) + vx, T(hip.y()) + ca * vy - sa * vz, T(hip.z()) + sa * vy + ca * vz};
}

// Body-frame foot velocity and acceleration of one leg given the trunk's
// body-frame angular velocity/acceleration and the leg's joint rates.
template <typename T>
void leg_foot_rates_body(const QuadrupedModel& model, int leg, const Eigen::Matrix<T, 3, 1>& q,
                         const Eigen::Matrix<T, 3, 1>& qd, const Eigen::Matrix<T, 3, 1>& qdd,
                         const Eigen::Matrix<T, 3, 1>& omega, const Eigen::Matrix<T, 3, 1>& alpha,
                         Eigen::Matrix<T, 3, 1>& vel, Eigen::Matrix<T, 3, 1>& acc) {
  using std::cos;
  using std::sin;
  using V3 = Eigen::Matrix<T, 3, 1>;
  const T ca = cos(q[0]), sa = sin(q[0]);
  const T ch = cos(q[1]), sh = sin(q[1]);
  const T phi = q[1] + q[2];
  const T ck = cos(phi), sk = sin(phi);
  const T phid = qd[1] + qd[2];
  const T phidd = qdd[1] + qdd[2];
  const T l1 = T(model.thigh_length), l2 = T(model.calf_length);

  // Leg vector in the abduction frame and its time derivatives.
  const V3 v(-l1 * sh - l2 * sk, T(QuadrupedModel::side_sign(leg) * model.abduction_offset),
             -l1 * ch - l2 * ck);
  const V3 vd(-l1 * ch * qd[1] - l2 * ck * phid, T(0), l1 * sh * qd[1] + l2 * sk * phid);
  const V3 vdd(l1 * sh * qd[1] * qd[1] - l1 * ch * qdd[1] + l2 * sk * phid * phid - l2 * ck * phidd,
               T(0),
               l1 * ch * qd[1] * qd[1] + l1 * sh * qdd[1] + l2 * ck * phid * phid + l2 * sk * phidd);

  // Rx(a) u, and Rx(a) K u with K = [e_x]x.
  auto rot = [&](const V3& u) { return V3(u[0], ca * u[1] - sa * u[2], sa * u[1] + ca * u[2]); };
  auto kx = [](const V3& u) { return V3(T(0), -u[2], u[1]); };

  const V3 rel = rot(v);
  const V3 rel_d = rot(kx(v)) * qd[0] + rot(vd);
  const V3 rel_dd = rot(kx(kx(v))) * (qd[0] * qd[0]) + rot(kx(v)) * qdd[0] +
                    rot(kx(vd)) * (T(2) * qd[0]) + rot(vdd);

  const Vec3& hip = model.hip_positions[leg];
  const V3 b(T(hip.x()) + rel[0], T(hip.y()) + rel[1], T(hip.z()) + rel[2]);
  vel = omega.cross(b) + rel_d;
  acc = alpha.cross(b) + omega.cross(omega.cross(b)) + T(2) * omega.cross(rel_d) + rel_dd;
}

FootPositions forward_kinematics(const QuadrupedModel& model, const Pose& pose);

// d(foot_body)/d(leg joints).
Mat3 leg_jacobian(const QuadrupedModel& model, int leg, const Vec3& q);
Mat3 leg_jacobian(const QuadrupedModel& model, const Pose& pose, int leg);

struct IkOptions {
  double damping = 1e-3;
  int max_iterations = 50;
  double tolerance = 1e-4;  // m
  // Optional per-joint box intersected with the joint limits, e.g. the
  // angles reachable within one control step.
  std::optional<std::pair<Vec3, Vec3>> bounds;
};

enum class IkStatus { kOk, kUnreachable };

struct IkResult {
  Vec3 angles = Vec3::Zero();
  IkStatus status = IkStatus::kUnreachable;
  double residual = 0.0;  // m, final foot position error
  int iterations = 0;

  bool ok() const { return status == IkStatus::kOk; }
};

// Damped-least-squares IK for one leg, warm-started from the leg's joints in
// `base_pose`. Joint limits are enforced at every iteration. An unreachable
// target is reported through the status, not thrown, since callers clamp or
// skip the frame.
IkResult solve_leg_ik(const QuadrupedModel& model, const Pose& base_pose, int leg,
                      const Vec3& target_foot_world, const IkOptions& options = {});

// World-frame foot velocities/accelerations relative to the root origin
// (PoseRates carries no root translation).
FootRates end_effector_rates(const QuadrupedModel& model, const Pose& pose, const PoseRates& rates,
                             const PoseRates& accel);
// Same quantities expressed in the trunk frame.
FootRates end_effector_rates_body(const QuadrupedModel& model, const Pose& pose,
                                  const PoseRates& rates, const PoseRates& accel);

// Planar geometry for support polygons.
struct HullDistance {
  double distance = 0.0;                            // 0 when inside or on the hull
  Eigen::Vector2d outward = Eigen::Vector2d::Zero();  // from the nearest hull point to the query
};

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);
HullDistance distance_to_hull(std::span<const Eigen::Vector2d> hull, const Eigen::Vector2d& p);

// Horizontal distance from the trunk centre to the hull of the contact feet;
// zero when fewer than `required_contacts` feet are in contact.
double support_polygon_distance(const QuadrupedModel& model, const Pose& pose,
                                const ContactFlags& contacts, int required_contacts);

}  // namespace quadmimic

#endif  // QUADMIMIC_KINEMATICS_HPP_
