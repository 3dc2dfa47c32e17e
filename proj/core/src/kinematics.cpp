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

#include "quadmimic/kinematics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include <Eigen/Dense>

#include "quadmimic/config.hpp"

namespace quadmimic {
namespace {

constexpr const char* kLegNames[kNumLegs] = {"fr", "fl", "rr", "rl"};
constexpr const char* kJointNames[kJointsPerLeg] = {"abduction", "hip", "knee"};

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

}  // namespace

QuadrupedModel QuadrupedModel::a1_like() {
  QuadrupedModel m;
  m.hip_positions = {Vec3(0.183, -0.132, 0.0), Vec3(0.183, 0.132, 0.0), Vec3(-0.183, -0.132, 0.0),
                     Vec3(-0.183, 0.132, 0.0)};
  for (int leg = 0; leg < kNumLegs; ++leg) {
    m.joint_limits[3 * leg + 0] = {-0.8, 0.8};
    m.joint_limits[3 * leg + 1] = {-1.0, 2.6};
    m.joint_limits[3 * leg + 2] = {-2.7, 0.0};
  }
  return m;
}

QuadrupedModel QuadrupedModel::from_config(const Config& cfg) {
  QuadrupedModel m = a1_like();
  m.abduction_offset = cfg.get_double("model.abduction_offset", m.abduction_offset);
  m.thigh_length = cfg.get_double("model.thigh_length", m.thigh_length);
  m.calf_length = cfg.get_double("model.calf_length", m.calf_length);
  m.joint_velocity_limit = cfg.get_double("model.joint_velocity_limit", m.joint_velocity_limit);
  m.trunk_height_nominal = cfg.get_double("model.trunk_height_nominal", m.trunk_height_nominal);
  m.foot_radius = cfg.get_double("model.foot_radius", m.foot_radius);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const std::string base = std::string("model.hip.") + kLegNames[leg] + ".";
    m.hip_positions[leg].x() = cfg.get_double(base + "x", m.hip_positions[leg].x());
    m.hip_positions[leg].y() = cfg.get_double(base + "y", m.hip_positions[leg].y());
    m.hip_positions[leg].z() = cfg.get_double(base + "z", m.hip_positions[leg].z());
    for (int j = 0; j < kJointsPerLeg; ++j) {
      // Per-joint-type keys apply to all legs; per-leg keys override them.
      auto& lim = m.joint_limits[3 * leg + j];
      const std::string type_key = std::string("model.limits.") + kJointNames[j];
      const std::string leg_key = type_key + "." + kLegNames[leg];
      lim.lo = cfg.get_double(leg_key + ".lo", cfg.get_double(type_key + ".lo", lim.lo));
      lim.hi = cfg.get_double(leg_key + ".hi", cfg.get_double(type_key + ".hi", lim.hi));
    }
  }
  m.validate();
  return m;
}

void QuadrupedModel::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (!(thigh_length > 0.0)) fail("thigh_length must be positive");
  if (!(calf_length > 0.0)) fail("calf_length must be positive");
  if (!(joint_velocity_limit > 0.0)) fail("joint_velocity_limit must be positive");
  if (!(abduction_offset >= 0.0)) fail("abduction_offset must be non-negative");
  if (!(foot_radius >= 0.0)) fail("foot_radius must be non-negative");
  for (int i = 0; i < kNumJoints; ++i) {
    if (!(joint_limits[i].lo < joint_limits[i].hi)) {
      fail("joint " + std::to_string(i) + " has lo >= hi");
    }
  }
}

JointVector QuadrupedModel::lower_limits() const {
  JointVector v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = joint_limits[i].lo;
  return v;
}

JointVector QuadrupedModel::upper_limits() const {
  JointVector v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = joint_limits[i].hi;
  return v;
}

JointVector QuadrupedModel::clamp(const JointVector& q) const {
  return q.cwiseMax(lower_limits()).cwiseMin(upper_limits());
}

Vec3 QuadrupedModel::clamp_leg(int leg, const Vec3& q) const {
  Vec3 out;
  for (int j = 0; j < 3; ++j) {
    const auto& lim = joint_limits[3 * leg + j];
    out[j] = std::clamp(q[j], lim.lo, lim.hi);
  }
  return out;
}

bool QuadrupedModel::within_limits(const JointVector& q, double tol) const {
  for (int i = 0; i < kNumJoints; ++i) {
    if (q[i] < joint_limits[i].lo - tol || q[i] > joint_limits[i].hi + tol) return false;
  }
  return true;
}

std::string QuadrupedModel::hash() const {
  std::string text;
  char buf[64];
  auto add = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g;", v);
    text += buf;
  };
  for (const auto& h : hip_positions) {
    add(h.x());
    add(h.y());
    add(h.z());
  }
  add(abduction_offset);
  add(thigh_length);
  add(calf_length);
  for (const auto& lim : joint_limits) {
    add(lim.lo);
    add(lim.hi);
  }
  add(joint_velocity_limit);
  add(trunk_height_nominal);
  add(foot_radius);
  return fnv1a_hex(text);
}

Quat quat_from_rpy(double roll, double pitch, double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

Vec3 rpy_from_quat(const Quat& q) {
  const Mat3 r = q.normalized().toRotationMatrix();
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

Quat quat_exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-12) return Quat(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z()).normalized();
  return Quat(Eigen::AngleAxisd(angle, w / angle));
}

Vec3 quat_log(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v;
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

FootPositions forward_kinematics(const QuadrupedModel& model, const Pose& pose) {
  FootPositions out;
  const Mat3 r = pose.root_orientation.normalized().toRotationMatrix();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    out.body[leg] = leg_foot_body<double>(model, leg, pose.leg_joints(leg));
    out.world[leg] = pose.root_position + r * out.body[leg];
  }
  return out;
}

Mat3 leg_jacobian(const QuadrupedModel& model, int leg, const Vec3& q) {
  const double ch = std::cos(q[1]), sh = std::sin(q[1]);
  const double ck = std::cos(q[1] + q[2]), sk = std::sin(q[1] + q[2]);
  const double l1 = model.thigh_length, l2 = model.calf_length;
  const Vec3 v(-l1 * sh - l2 * sk, QuadrupedModel::side_sign(leg) * model.abduction_offset,
               -l1 * ch - l2 * ck);
  const Mat3 r = rot_x(q[0]);
  Mat3 j;
  j.col(0) = r * Vec3(0.0, -v.z(), v.y());
  j.col(1) = r * Vec3(-l1 * ch - l2 * ck, 0.0, l1 * sh + l2 * sk);
  j.col(2) = r * Vec3(-l2 * ck, 0.0, l2 * sk);
  return j;
}

Mat3 leg_jacobian(const QuadrupedModel& model, const Pose& pose, int leg) {
  return leg_jacobian(model, leg, pose.leg_joints(leg));
}

namespace {

// Knee-backward analytic solution; targets beyond reach are pulled onto the
// workspace boundary. Of the two abduction branches the one closer to the
// joint box is returned.
Vec3 closed_form_leg(const QuadrupedModel& model, int leg, const Vec3& target_body) {
  const Vec3 rel = target_body - model.hip_positions[leg];
  const double l1 = model.thigh_length, l2 = model.calf_length;
  const double d = QuadrupedModel::side_sign(leg) * model.abduction_offset;
  const double r2 = rel.y() * rel.y() + rel.z() * rel.z();
  const double len = std::sqrt(std::max(r2 - d * d, 1e-12));
  Vec3 best = Vec3::Zero();
  double best_violation = std::numeric_limits<double>::infinity();
  for (const double sagittal : {len, -len}) {
    // Abduction frame: (y, z) = Rx(a) (d, -sagittal).
    const double a = std::remainder(std::atan2(rel.z(), rel.y()) - std::atan2(-sagittal, d), 2.0 * std::numbers::pi);
    const double dist2 = rel.x() * rel.x() + sagittal * sagittal;
    const double c = std::clamp((dist2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
    const double k = -std::acos(c);
    const double h = std::atan2(-rel.x(), sagittal) - std::atan2(l2 * std::sin(k), l1 + l2 * std::cos(k));
    const Vec3 q(a, h, k);
    const double violation = (q - model.clamp_leg(leg, q)).norm();
    if (violation < best_violation) {
      best_violation = violation;
      best = q;
    }
  }
  return best;
}

}  // namespace

IkResult solve_leg_ik(const QuadrupedModel& model, const Pose& base_pose, int leg,
                      const Vec3& target_foot_world, const IkOptions& options) {
  IkResult result;
  if (!target_foot_world.allFinite()) return result;

  const Mat3 r = base_pose.root_orientation.normalized().toRotationMatrix();
  const Vec3 target = r.transpose() * (target_foot_world - base_pose.root_position);

  // Anything farther than the fully extended leg can be rejected up front.
  const Vec3 rel = target - model.hip_positions[leg];
  const double reach = model.thigh_length + model.calf_length;
  const double max_dist = std::hypot(reach, model.abduction_offset);
  if (rel.norm() > max_dist + options.tolerance) {
    result.angles = model.clamp_leg(leg, base_pose.leg_joints(leg));
    result.residual = (leg_foot_body<double>(model, leg, result.angles) - target).norm();
    return result;
  }

  auto clamp = [&](const Vec3& q) {
    Vec3 c = model.clamp_leg(leg, q);
    if (options.bounds) c = c.cwiseMax(options.bounds->first).cwiseMin(options.bounds->second);
    return c;
  };
  auto run = [&](Vec3 q) {
    IkResult attempt;
    q = clamp(q);
    Vec3 err = target - leg_foot_body<double>(model, leg, q);
    double best = err.norm();
    // Levenberg-Marquardt schedule on the damping: start at options.damping,
    // relax after an improving step, stiffen after a rejected one.
    double damping = options.damping;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
      if (best < 1e-12 || damping > 1e6) break;
      const Mat3 j = leg_jacobian(model, leg, q);
      const Mat3 jjt = j * j.transpose() + damping * Mat3::Identity();
      const Vec3 dq = j.transpose() * jjt.ldlt().solve(err);
      const Vec3 next = clamp(q + dq);
      const Vec3 next_err = target - leg_foot_body<double>(model, leg, next);
      if (next_err.norm() < best) {
        q = next;
        err = next_err;
        best = err.norm();
        damping = std::max(damping * 0.1, 1e-12);
      } else {
        damping *= 10.0;
      }
    }
    attempt.angles = q;
    attempt.residual = best;
    attempt.iterations = it;
    attempt.status = best <= options.tolerance ? IkStatus::kOk : IkStatus::kUnreachable;
    return attempt;
  };

  result = run(base_pose.leg_joints(leg));
  if (!result.ok()) {
    // A bad warm start can park the solver against a joint limit; retry once
    // from a crouched stance.
    IkResult retry = run(Vec3(0.0, 0.9, -1.8));
    retry.iterations += result.iterations;
    if (retry.ok() || retry.residual < result.residual) result = retry;
  }
  if (!result.ok()) {
    IkResult seeded = run(closed_form_leg(model, leg, target));
    seeded.iterations += result.iterations;
    if (seeded.ok() || seeded.residual < result.residual) result = seeded;
  }
  return result;
}

namespace {

FootRates rates_impl(const QuadrupedModel& model, const Pose& pose, const PoseRates& rates,
                     const PoseRates& accel, bool world) {
  FootRates out;
  const Mat3 r = world ? pose.root_orientation.normalized().toRotationMatrix() : Mat3::Identity();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    Vec3 v, a;
    leg_foot_rates_body<double>(model, leg, pose.leg_joints(leg),
                                rates.joint_velocities.segment<3>(3 * leg),
                                accel.joint_velocities.segment<3>(3 * leg),
                                rates.root_angular_velocity, accel.root_angular_velocity, v, a);
    out.velocity[leg] = r * v;
    out.acceleration[leg] = r * a;
  }
  return out;
}

}  // namespace

FootRates end_effector_rates(const QuadrupedModel& model, const Pose& pose, const PoseRates& rates,
                             const PoseRates& accel) {
  return rates_impl(model, pose, rates, accel, true);
}

FootRates end_effector_rates_body(const QuadrupedModel& model, const Pose& pose,
                                  const PoseRates& rates, const PoseRates& accel) {
  return rates_impl(model, pose, rates, accel, false);
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  // Andrew's monotone chain; returns counter-clockwise vertices without
  // collinear points.
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

HullDistance distance_to_hull(std::span<const Eigen::Vector2d> hull, const Eigen::Vector2d& p) {
  HullDistance out;
  if (hull.empty()) return out;

  auto closest_on_segment = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                               const Eigen::Vector2d& x) {
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return a;
    const double t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
    return Eigen::Vector2d(a + t * ab);
  };

  if (hull.size() >= 3) {
    bool inside = true;
    for (size_t i = 0; i < hull.size(); ++i) {
      const auto& a = hull[i];
      const auto& b = hull[(i + 1) % hull.size()];
      const double c = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
      if (c < 0.0) {
        inside = false;
        break;
      }
    }
    if (inside) return out;
  }

  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d nearest = hull[0];
  const size_t edges = hull.size() == 1 ? 1 : (hull.size() == 2 ? 1 : hull.size());
  for (size_t i = 0; i < edges; ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    const Eigen::Vector2d c = closest_on_segment(a, b, p);
    const double d = (p - c).norm();
    if (d < best) {
      best = d;
      nearest = c;
    }
  }
  out.distance = best;
  if (best > 0.0) out.outward = (p - nearest) / best;
  return out;
}

double support_polygon_distance(const QuadrupedModel& model, const Pose& pose,
                                const ContactFlags& contacts, int required_contacts) {
  const int count = static_cast<int>(std::count(contacts.begin(), contacts.end(), true));
  if (count == 0 || count < required_contacts) return 0.0;
  const FootPositions feet = forward_kinematics(model, pose);
  std::vector<Eigen::Vector2d> pts;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (contacts[leg]) pts.emplace_back(feet.world[leg].x(), feet.world[leg].y());
  }
  const auto hull = convex_hull(std::move(pts));
  // The trunk's geometric centre stands in for the centre of mass.
  const Eigen::Vector2d com(pose.root_position.x(), pose.root_position.y());
  return distance_to_hull(hull, com).distance;
}

}  // namespace quadmimic
