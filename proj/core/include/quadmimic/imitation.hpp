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

#ifndef QUADMIMIC_IMITATION_HPP_
#define QUADMIMIC_IMITATION_HPP_

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadmimic/butterworth.hpp"
#include "quadmimic/kinematics.hpp"
#include "quadmimic/motion.hpp"
#include "quadmimic/plant.hpp"

namespace quadmimic {

inline constexpr int kHistoryLength = 4;
inline constexpr int kReferenceDim = 16;  // root quaternion (w, x, y, z) + 12 joints
inline constexpr int kObservationDim =
    kHistoryLength * kSensorDim + (kHistoryLength - 1) * kNumJoints + kHistoryLength * kReferenceDim;
static_assert(kObservationDim == 164);

using ReferenceFeatures = Eigen::Matrix<double, kReferenceDim, 1>;
ReferenceFeatures reference_features(const Pose& pose);

// Rolling buffers behind the observation. The newest reference slot holds
// the frame the next action should realise; nothing later is ever pushed.
class ObservationHistory {
 public:
  void clear();
  void push_sensor(const SensorReading& z);
  void push_action(const JointVector& a);
  void push_reference(const ReferenceFeatures& r);

  const std::deque<SensorReading>& sensors() const { return sensors_; }
  const std::deque<JointVector>& actions() const { return actions_; }
  const std::deque<ReferenceFeatures>& references() const { return references_; }

 private:
  std::deque<SensorReading> sensors_;
  std::deque<JointVector> actions_;
  std::deque<ReferenceFeatures> references_;
};

// [z_{t-3..t}, a_{t-3..t-1}, ref_{t-3..t}], oldest first; missing history is
// zero.
Eigen::VectorXd build_observation(const ObservationHistory& history);

// Offsets of the blocks inside the observation.
inline constexpr int kObsSensorOffset = 0;
inline constexpr int kObsActionOffset = kHistoryLength * kSensorDim;
inline constexpr int kObsReferenceOffset = kObsActionOffset + (kHistoryLength - 1) * kNumJoints;
// Joint block of the newest reference.
inline constexpr int kObsTargetJointsOffset = kObservationDim - kNumJoints;

struct RewardWeights {
  double w_main = 0.9;
  double w_acc = 0.1;
  double s_p = 1.0;
  double s_e = 20.0;
  double s_rp = 20.0;
  double s_ro = 5.0;
  double s_sp = 10.0;
  double s_acc = 3.0;
  // Joint accelerations enter the penalty as per-step second differences,
  // i.e. scaled by step^2.
  double acceleration_step = 1.0 / 30.0;

  void validate() const;
};

// Quantities compared by the reward. Feet are relative to the root in world
// axes.
struct TrackedQuantities {
  JointVector joints = JointVector::Zero();
  FootArray feet = zero_feet();
  Vec3 root_position = Vec3::Zero();
  Quat root_orientation = Quat::Identity();
  JointVector joint_accelerations = JointVector::Zero();  // rad/s^2
  double support_distance = 0.0;                            // m

  static TrackedQuantities of(const QuadrupedModel& model, const Pose& pose);
};

struct RewardComponents {
  double joint = 1.0;
  double end_effector = 1.0;
  double root_position = 1.0;
  double root_orientation = 1.0;
  double support = 1.0;
  double acceleration = 1.0;
  double total = 1.0;
};

// r = w_main * (r_p r_e r_rp r_ro r_sp) + w_acc * r_acc with every factor
// exp(-s * error^2). Reference accelerations and support distance are unused.
RewardComponents compute_reward(const TrackedQuantities& reference, const TrackedQuantities& actual,
                                const RewardWeights& weights = {});
// Plant against a reference frame; the support distance uses the reference
// contact labels and is zero with fewer than `required_contacts` of them.
RewardComponents compute_reward(const MotionFrame& reference, const PlantState& plant,
                                const QuadrupedModel& model, int required_contacts = 3,
                                const RewardWeights& weights = {});

enum class TerminationReason { kTrunkContact, kTilt, kSelfPenetration };
const char* termination_name(TerminationReason reason);

struct TerminationLimits {
  double min_trunk_height = 0.12;
  double max_tilt = 0.8;
  double midline_margin = 0.02;
};

std::optional<TerminationReason> check_termination(const PlantState& plant, const QuadrupedModel& model,
                                                   double slope = 0.0,
                                                   const TerminationLimits& limits = {});

ContactFlags stance_flags(const MotionFrame& frame, double threshold = 0.5);

// Maps an observation to 12 PD targets.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual JointVector act(const Eigen::VectorXd& observation, Rng& rng) = 0;
};

// Emits the newest reference joints unchanged.
class ReferencePolicy : public Policy {
 public:
  JointVector act(const Eigen::VectorXd& observation, Rng& rng) override;
};

class ConstantPolicy : public Policy {
 public:
  explicit ConstantPolicy(const JointVector& target) : target_(target) {}
  JointVector act(const Eigen::VectorXd&, Rng&) override { return target_; }

 private:
  JointVector target_;
};

struct EnvOptions {
  double max_duration = 10.0;  // s
  int required_contacts = 3;
  bool filter_actions = true;
  RewardWeights weights;
  PlantConstants plant;
  TerminationLimits limits;
};

struct StepResult {
  Eigen::VectorXd observation;
  RewardComponents reward;
  std::optional<TerminationReason> termination;
  bool done = false;
};

// One imitation episode against a reference clip: filtered policy targets
// drive the surrogate plant and each step is scored against the reference
// frame it was meant to reach.
class ImitationEnv {
 public:
  explicit ImitationEnv(QuadrupedModel model, EnvOptions options = {});

  Eigen::VectorXd reset(MotionClip reference, const DomainParams& domain, std::uint64_t seed);
  StepResult step(const JointVector& action);

  int max_steps() const { return max_steps_; }
  int steps() const { return step_; }
  bool done() const { return done_; }
  const PlantState& plant() const { return plant_; }
  const DomainParams& domain() const { return domain_; }
  const MotionClip& reference() const { return reference_; }
  const QuadrupedModel& model() const { return model_; }
  const EnvOptions& options() const { return options_; }

 private:
  QuadrupedModel model_;
  EnvOptions options_;
  MotionClip reference_;
  DomainParams domain_;
  PlantState plant_;
  ObservationHistory history_;
  ButterworthFilter filter_{kNumJoints};
  Rng noise_;
  int step_ = 0;
  int max_steps_ = 0;
  bool done_ = true;
};

struct EpisodeTraceRow {
  double time = 0.0;
  RewardComponents reward;
};

struct EpisodeResult {
  double success_time_ratio = 0.0;
  std::optional<TerminationReason> termination;
  double mean_reward = 0.0;
  int steps = 0;
  int max_steps = 0;
  std::vector<EpisodeTraceRow> trace;
};

EpisodeResult run_episode(Policy& policy, const MotionClip& reference, const DomainParams& domain,
                          const QuadrupedModel& model, std::uint64_t seed, const EnvOptions& options = {});

// CSV columns: t, the six reward factors, total, termination (last row only).
void write_episode_csv(std::ostream& out, const EpisodeResult& result);

}  // namespace quadmimic

#endif  // QUADMIMIC_IMITATION_HPP_
