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

#include "quadmimic/plant.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/SVD>

namespace quadmimic {

nlohmann::json DomainParams::to_json() const {
  return {{"mass_scale", mass_scale}, {"friction", friction}, {"p_gain_scale", p_gain_scale},
          {"d_gain_scale", d_gain_scale}, {"delay", delay}, {"slope", slope}};
}

DomainParams DomainParams::from_json(const nlohmann::json& j) {
  DomainParams d;
  d.mass_scale = j.at("mass_scale").get<double>();
  d.friction = j.at("friction").get<double>();
  d.p_gain_scale = j.at("p_gain_scale").get<double>();
  d.d_gain_scale = j.at("d_gain_scale").get<double>();
  d.delay = j.at("delay").get<double>();
  d.slope = j.at("slope").get<double>();
  return d;
}

namespace {

double sample_range(const DomainRange& r, double scale, Rng& rng) {
  const double lo = r.nominal + scale * (r.lo - r.nominal);
  const double hi = r.nominal + scale * (r.hi - r.nominal);
  if (lo == hi) return lo;
  const double v = std::uniform_real_distribution<double>(lo, hi)(rng);
  return std::clamp(v, lo, hi);
}

}  // namespace

DomainParams sample_domain(double scale, Rng& rng) {
  if (!(scale >= 0.0 && scale <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "domain scale must lie in [0, 1]");
  }
  DomainParams d;
  d.mass_scale = sample_range(DomainRanges::kMass, scale, rng);
  d.friction = sample_range(DomainRanges::kFriction, scale, rng);
  d.p_gain_scale = sample_range(DomainRanges::kPGain, scale, rng);
  d.d_gain_scale = sample_range(DomainRanges::kDGain, scale, rng);
  d.delay = sample_range(DomainRanges::kDelay, scale, rng);
  d.slope = sample_range(DomainRanges::kSlope, scale, rng);
  return d;
}

double ground_height(double slope, double x, double /*y*/) { return x * std::tan(slope); }

namespace {

// Rotation and translation taking body-frame points onto world anchors, with
// a pull towards `prior` that fixes directions the feet leave free.
void fit_base(const std::vector<Vec3>& body, const std::vector<Vec3>& world,
              const std::vector<double>& weights, const Quat& prior, Quat& rotation,
              Vec3& translation) {
  double wsum = 0.0;
  Vec3 cb = Vec3::Zero(), cw = Vec3::Zero();
  for (size_t i = 0; i < body.size(); ++i) {
    wsum += weights[i];
    cb += weights[i] * body[i];
    cw += weights[i] * world[i];
  }
  cb /= wsum;
  cw /= wsum;
  constexpr double kPrior = 1e-3;
  Mat3 h = kPrior * prior.toRotationMatrix().transpose();
  for (size_t i = 0; i < body.size(); ++i) {
    h += weights[i] * (body[i] - cb) * (world[i] - cw).transpose();
  }
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();
  rotation = Quat(r).normalized();
  translation = cw - r * cb;
}

Quat tilt_rotation(const Eigen::Vector2d& tilt) {
  return Quat(Eigen::AngleAxisd(tilt[0], Vec3::UnitX())) *
         Quat(Eigen::AngleAxisd(tilt[1], Vec3::UnitY()));
}

// Places the trunk: support fit from the anchored feet, then the tilt about
// the centroid of the anchors.
void place_base(PlantState& s, const QuadrupedModel& model, const ContactFlags& stance,
                std::array<Vec3, kNumLegs>* residuals) {
  const FootPositions fk = forward_kinematics(model, {Vec3::Zero(), Quat::Identity(), s.joints});
  std::vector<Vec3> body, world;
  std::vector<double> w;
  Vec3 centroid = Vec3::Zero();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (!stance[leg]) continue;
    body.push_back(fk.body[leg]);
    world.push_back(s.anchors[leg]);
    w.push_back(s.slipping[leg] ? 0.2 : 1.0);
    centroid += s.anchors[leg];
  }
  if (body.empty()) return;  // airborne: keep the last placement
  centroid /= static_cast<double>(body.size());
  Quat r;
  Vec3 p;
  fit_base(body, world, w, s.support_orientation, r, p);
  s.support_orientation = r;
  if (residuals) {
    for (int leg = 0; leg < kNumLegs; ++leg) {
      (*residuals)[leg] = stance[leg] ? Vec3(r * fk.body[leg] + p - s.anchors[leg]) : Vec3::Zero();
    }
  }
  const Quat t = tilt_rotation(s.tilt);
  s.base_orientation = (t * r).normalized();
  s.base_position = centroid + t * (p - centroid);
}

}  // namespace

PlantState PlantState::from_pose(const QuadrupedModel& model, const Pose& pose,
                                 const ContactFlags& contacts, double slope) {
  PlantState s;
  s.residuals.fill(Vec3::Zero());
  s.joints = model.clamp(pose.joints);
  s.last_command = s.joints;
  s.base_position = pose.root_position;
  s.base_orientation = pose.root_orientation.normalized();
  s.support_orientation = s.base_orientation;
  s.contacts = contacts;
  const FootPositions fk = forward_kinematics(model, pose);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    Vec3 a = fk.world[leg];
    a.z() = ground_height(slope, a.x(), a.y()) + model.foot_radius;
    s.anchors[leg] = a;
  }
  place_base(s, model, contacts, nullptr);
  return s;
}

SensorReading read_sensors(const PlantState& state, Rng& noise, double noise_std) {
  SensorReading z;
  const Vec3 rpy = rpy_from_quat(state.base_orientation);
  z.head<kNumJoints>() = state.joints;
  z[12] = rpy[0];
  z[13] = rpy[1];
  z[14] = state.rp_rate[0];
  z[15] = state.rp_rate[1];
  if (noise_std > 0.0) {
    std::normal_distribution<double> n(0.0, noise_std);
    for (int i = 0; i < kSensorDim; ++i) z[i] += n(noise);
  }
  return z;
}

SensorReading surrogate_step(PlantState& s, const JointVector& pd_target, const ContactFlags& stance,
                             const DomainParams& domain, const QuadrupedModel& model, Rng& noise,
                             double dt, const PlantConstants& c) {
  const Vec3 rpy_before = rpy_from_quat(s.base_orientation);

  // Delayed command: the previous target still acts for delay/dt of the step.
  const double frac = std::clamp(domain.delay / dt, 0.0, 1.0);
  const JointVector target = (1.0 - frac) * pd_target + frac * s.last_command;
  s.last_command = pd_target;

  const double kp = c.kp * domain.p_gain_scale;
  const double kd = c.kd * domain.d_gain_scale;
  const double inertia = c.inertia * domain.mass_scale;
  const double h = dt / c.substeps;
  const JointVector lo = model.lower_limits(), hi = model.upper_limits();
  const JointVector v_start = s.joint_velocities;
  for (int k = 0; k < c.substeps; ++k) {
    for (int j = 0; j < kNumJoints; ++j) {
      const double tau = std::clamp(kp * (target[j] - s.joints[j]) - kd * s.joint_velocities[j],
                                    -c.torque_limit, c.torque_limit);
      double v = s.joint_velocities[j] + h * tau / inertia;
      v = std::clamp(v, -c.velocity_limit, c.velocity_limit);
      double q = s.joints[j] + h * v;
      if (q < lo[j] || q > hi[j]) {
        q = std::clamp(q, lo[j], hi[j]);
        v = 0.0;
      }
      s.joints[j] = q;
      s.joint_velocities[j] = v;
    }
  }
  s.joint_accelerations = (s.joint_velocities - v_start) / dt;

  // Stance bookkeeping: touchdowns anchor where the foot meets the ground.
  const FootPositions before = forward_kinematics(model, s.pose());
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (stance[leg] && !s.contacts[leg]) {
      Vec3 a = before.world[leg];
      a.z() = ground_height(domain.slope, a.x(), a.y()) + model.foot_radius;
      s.anchors[leg] = a;
      s.residuals[leg].setZero();
    }
    s.slipping[leg] = false;
  }
  s.contacts = stance;

  // Friction-limited slip. A stance foot slides when its commanded
  // tangential speed exceeds friction * slip_speed, measured both against
  // the trunk (leg sweep from joint rates) and against its ground anchor
  // (growth of the fit residual).
  std::array<Vec3, kNumLegs> residual = zero_feet();
  place_base(s, model, stance, &residual);
  const double allowed = domain.friction * c.slip_speed;
  bool slipped = false;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (!stance[leg]) continue;
    Vec3 sweep = s.base_orientation *
                 (leg_jacobian(model, leg, s.joints.segment<3>(3 * leg)) * s.joint_velocities.segment<3>(3 * leg));
    sweep.z() = 0.0;
    Vec3 growth = (residual[leg] - s.residuals[leg]) / dt;
    growth.z() = 0.0;
    const double sweep_speed = sweep.norm(), growth_speed = growth.norm();
    Vec3 slide = Vec3::Zero();
    if (growth_speed > allowed) slide += growth * (1.0 - allowed / growth_speed) * dt;
    if (sweep_speed > allowed) slide += sweep * (1.0 - allowed / sweep_speed) * dt;
    if (growth_speed > allowed || sweep_speed > allowed) {
      s.anchors[leg] += slide;
      s.anchors[leg].z() = ground_height(domain.slope, s.anchors[leg].x(), s.anchors[leg].y()) +
                           model.foot_radius;
      s.slipping[leg] = true;
      slipped = true;
    }
  }
  if (slipped) place_base(s, model, stance, &residual);
  s.residuals = residual;

  // Trunk tilt about the support: restoring while the trunk is over its
  // support polygon, tipping once it leaves it.
  int stance_count = 0;
  std::vector<Eigen::Vector2d> support;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (!stance[leg]) continue;
    ++stance_count;
    if (!s.slipping[leg]) support.emplace_back(s.anchors[leg].x(), s.anchors[leg].y());
  }
  Eigen::Vector2d accel = Eigen::Vector2d::Zero();
  double deficit = 0.0;
  Eigen::Vector2d outward = Eigen::Vector2d::Zero();
  if (stance_count >= 3 && !support.empty()) {
    const auto hull = convex_hull(support);
    const HullDistance hd = distance_to_hull(hull, s.base_position.head<2>());
    deficit = hd.distance;
    outward = hd.outward;
  }
  const double height = std::max(0.05, s.base_position.z() - ground_height(domain.slope, s.base_position.x(),
                                                                          s.base_position.y()));
  if (deficit > 0.0) {
    // Positive pitch carries the trunk towards +x, positive roll towards -y.
    const double gain = c.gravity * deficit / (height * height);
    accel[0] -= gain * outward.y();
    accel[1] += gain * outward.x();
    s.tipping = true;
  } else {
    accel -= c.tilt_stiffness * s.tilt;
    s.tipping = false;
  }
  accel -= c.tilt_damping * s.tilt_rate;
  if (deficit > 0.0) {
    std::normal_distribution<double> n(0.0, 1.0);
    accel[0] += c.wobble_gain * deficit * n(noise);
    accel[1] += c.wobble_gain * deficit * n(noise);
  }
  // Reaction of the trunk to leg accelerations.
  double roll_react = 0.0, pitch_react = 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    roll_react += s.joint_accelerations[3 * leg];
    pitch_react += s.joint_accelerations[3 * leg + 1] + s.joint_accelerations[3 * leg + 2];
  }
  accel[0] -= c.reaction_gain * roll_react / domain.mass_scale;
  accel[1] -= c.reaction_gain * pitch_react / domain.mass_scale;
  s.tilt_rate += dt * accel;
  s.tilt += dt * s.tilt_rate;
  place_base(s, model, stance, nullptr);

  s.time += dt;
  const Vec3 rpy_after = rpy_from_quat(s.base_orientation);
  s.rp_rate = Eigen::Vector2d(rpy_after[0] - rpy_before[0], rpy_after[1] - rpy_before[1]) / dt;
  return read_sensors(s, noise, c.sensor_noise);
}

}  // namespace quadmimic
