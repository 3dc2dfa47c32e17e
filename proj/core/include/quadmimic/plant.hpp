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

#ifndef QUADMIMIC_PLANT_HPP_
#define QUADMIMIC_PLANT_HPP_

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "quadmimic/common.hpp"
#include "quadmimic/kinematics.hpp"

namespace quadmimic {

struct DomainParams {
  double mass_scale = 1.0;
  double friction = 1.0;
  double p_gain_scale = 1.0;
  double d_gain_scale = 1.0;
  double delay = 0.0;  // s
  double slope = 0.0;  // rad, ground pitched up towards +x

  bool operator==(const DomainParams&) const = default;
  nlohmann::json to_json() const;
  static DomainParams from_json(const nlohmann::json& j);
};

struct DomainRange {
  double lo;
  double hi;
  double nominal;
};

// Full randomization ranges.
struct DomainRanges {
  static constexpr DomainRange kMass{0.75, 1.25, 1.0};
  static constexpr DomainRange kFriction{0.5, 1.5, 1.0};
  static constexpr DomainRange kPGain{0.7, 1.3, 1.0};
  static constexpr DomainRange kDGain{0.7, 1.3, 1.0};
  static constexpr DomainRange kDelay{0.0, 0.016, 0.0};
  static constexpr DomainRange kSlope{0.0, 0.14, 0.0};
};

// Each parameter is uniform on [nominal + s (lo - nominal), nominal + s (hi - nominal)].
DomainParams sample_domain(double scale, Rng& rng);

struct PlantConstants {
  double kp = 40.0;
  double kd = 1.0;
  double inertia = 0.0077;  // kg m^2 per joint at mass_scale 1
  double torque_limit = 33.5;
  double velocity_limit = 21.0;
  int substeps = 10;
  double sensor_noise = 0.01;
  double gravity = 9.81;
  double slip_speed = 0.5;       // m/s per unit friction
  double tilt_stiffness = 150.0;  // restoring, 1/s^2, while balanced
  double tilt_damping = 15.0;     // 1/s
  double wobble_gain = 40.0;      // rad/s^2 per m of support-polygon deficit
  double reaction_gain = 0.02;    // trunk tilt acceleration per joint acceleration
};

inline FootArray zero_feet() {
  FootArray f;
  f.fill(Vec3::Zero());
  return f;
}

struct PlantState {
  JointVector joints = JointVector::Zero();
  JointVector joint_velocities = JointVector::Zero();
  JointVector joint_accelerations = JointVector::Zero();  // mean over the last step
  Vec3 base_position = Vec3::Zero();
  Quat base_orientation = Quat::Identity();
  Eigen::Vector2d tilt = Eigen::Vector2d::Zero();       // roll, pitch about the support pose
  Eigen::Vector2d tilt_rate = Eigen::Vector2d::Zero();
  Quat support_orientation = Quat::Identity();          // orientation fitted to the feet
  Eigen::Vector2d rp_rate = Eigen::Vector2d::Zero();    // measured roll/pitch rate
  ContactFlags contacts{};
  ContactFlags slipping{};
  FootArray anchors = zero_feet();
  FootArray residuals = zero_feet();  // stance foot offsets from their anchors after the fit
  JointVector last_command = JointVector::Zero();
  double time = 0.0;
  bool tipping = false;

  static PlantState from_pose(const QuadrupedModel& model, const Pose& pose, const ContactFlags& contacts,
                              double slope = 0.0);
  Pose pose() const { return {base_position, base_orientation, joints}; }
};

inline constexpr int kSensorDim = 16;
using SensorReading = Eigen::Matrix<double, kSensorDim, 1>;

// Height of the sloped ground under (x, y).
double ground_height(double slope, double x, double y);

// One control step of the surrogate: PD joints with torque and speed limits,
// quasi-static base fitted to the stance feet, friction-limited slipping and
// tipping when the trunk leaves its support polygon. Returns the noisy sensor
// reading [12 joints, roll, pitch, roll rate, pitch rate].
SensorReading surrogate_step(PlantState& state, const JointVector& pd_target, const ContactFlags& stance,
                             const DomainParams& domain, const QuadrupedModel& model, Rng& noise,
                             double dt = 1.0 / 30.0, const PlantConstants& constants = {});

SensorReading read_sensors(const PlantState& state, Rng& noise, double noise_std);

}  // namespace quadmimic

#endif  // QUADMIMIC_PLANT_HPP_
