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

#include "quadmimic/imitation.hpp"

#include <cmath>
#include <ostream>
#include <utility>

#include "quadmimic/datagen.hpp"

namespace quadmimic {

ReferenceFeatures reference_features(const Pose& pose) {
  ReferenceFeatures r;
  const Quat q = pose.root_orientation.normalized();
  r << q.w(), q.x(), q.y(), q.z(), pose.joints;
  return r;
}

namespace {

template <typename T>
void push_bounded(std::deque<T>& d, const T& v, size_t cap) {
  d.push_back(v);
  while (d.size() > cap) d.pop_front();
}

// Copies the newest `slots` entries into consecutive blocks, right aligned so
// the newest entry fills the last block.
template <typename T>
void fill_blocks(Eigen::VectorXd& out, int offset, int width, int slots, const std::deque<T>& d) {
  const int n = static_cast<int>(d.size());
  for (int i = 0; i < std::min(n, slots); ++i) {
    out.segment(offset + (slots - 1 - i) * width, width) = d[n - 1 - i];
  }
}

}  // namespace

void ObservationHistory::clear() {
  sensors_.clear();
  actions_.clear();
  references_.clear();
}

void ObservationHistory::push_sensor(const SensorReading& z) { push_bounded(sensors_, z, kHistoryLength); }
void ObservationHistory::push_action(const JointVector& a) { push_bounded(actions_, a, kHistoryLength - 1); }
void ObservationHistory::push_reference(const ReferenceFeatures& r) {
  push_bounded(references_, r, kHistoryLength);
}

Eigen::VectorXd build_observation(const ObservationHistory& h) {
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(kObservationDim);
  fill_blocks(obs, kObsSensorOffset, kSensorDim, kHistoryLength, h.sensors());
  fill_blocks(obs, kObsActionOffset, kNumJoints, kHistoryLength - 1, h.actions());
  fill_blocks(obs, kObsReferenceOffset, kReferenceDim, kHistoryLength, h.references());
  return obs;
}

void RewardWeights::validate() const {
  if (std::abs(w_main + w_acc - 1.0) > 1e-12 || w_main < 0.0 || w_acc < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "reward weights must be non-negative and sum to 1");
  }
  for (double s : {s_p, s_e, s_rp, s_ro, s_sp, s_acc}) {
    if (!(s >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "reward scales must be non-negative");
  }
}

TrackedQuantities TrackedQuantities::of(const QuadrupedModel& model, const Pose& pose) {
  TrackedQuantities t;
  t.joints = pose.joints;
  t.root_position = pose.root_position;
  t.root_orientation = pose.root_orientation.normalized();
  const FootPositions fk = forward_kinematics(model, pose);
  for (int leg = 0; leg < kNumLegs; ++leg) t.feet[leg] = fk.world[leg] - pose.root_position;
  return t;
}

RewardComponents compute_reward(const TrackedQuantities& ref, const TrackedQuantities& act,
                                const RewardWeights& w) {
  RewardComponents r;
  r.joint = std::exp(-w.s_p * (ref.joints - act.joints).squaredNorm());
  double feet = 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg) feet += (ref.feet[leg] - act.feet[leg]).squaredNorm();
  r.end_effector = std::exp(-w.s_e * feet);
  r.root_position = std::exp(-w.s_rp * (ref.root_position - act.root_position).squaredNorm());
  const double angle = quaternion_distance(ref.root_orientation, act.root_orientation);
  r.root_orientation = std::exp(-w.s_ro * angle * angle);
  r.support = std::exp(-w.s_sp * act.support_distance * act.support_distance);
  const double step2 = w.acceleration_step * w.acceleration_step;
  r.acceleration = std::exp(-w.s_acc * (act.joint_accelerations * step2).squaredNorm());
  r.total = w.w_main * (r.joint * r.end_effector * r.root_position * r.root_orientation * r.support) +
            w.w_acc * r.acceleration;
  return r;
}

ContactFlags stance_flags(const MotionFrame& frame, double threshold) {
  ContactFlags f{};
  if (frame.contact_labels) {
    for (int leg = 0; leg < kNumLegs; ++leg) f[leg] = (*frame.contact_labels)[leg] > threshold;
  }
  return f;
}

RewardComponents compute_reward(const MotionFrame& reference, const PlantState& plant,
                                const QuadrupedModel& model, int required_contacts,
                                const RewardWeights& weights) {
  const TrackedQuantities ref = TrackedQuantities::of(model, reference.pose);
  TrackedQuantities act = TrackedQuantities::of(model, plant.pose());
  act.joint_accelerations = plant.joint_accelerations;
  act.support_distance =
      support_polygon_distance(model, plant.pose(), stance_flags(reference), required_contacts);
  return compute_reward(ref, act, weights);
}

const char* termination_name(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kTrunkContact: return "trunk_contact";
    case TerminationReason::kTilt: return "tilt";
    case TerminationReason::kSelfPenetration: return "self_penetration";
  }
  return "unknown";
}

std::optional<TerminationReason> check_termination(const PlantState& plant, const QuadrupedModel& model,
                                                   double slope, const TerminationLimits& limits) {
  const Vec3& p = plant.base_position;
  if (p.z() - ground_height(slope, p.x(), p.y()) < limits.min_trunk_height) {
    return TerminationReason::kTrunkContact;
  }
  const Vec3 rpy = rpy_from_quat(plant.base_orientation);
  if (std::abs(rpy[0]) > limits.max_tilt || std::abs(rpy[1]) > limits.max_tilt) {
    return TerminationReason::kTilt;
  }
  // Lateral foot offsets in the heading frame, so trunk roll alone does not
  // count as crossing.
  const FootPositions fk = forward_kinematics(model, plant.pose());
  const Eigen::Vector2d lateral_axis(-std::sin(rpy[2]), std::cos(rpy[2]));
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const double lateral = lateral_axis.dot((fk.world[leg] - p).head<2>());
    if (QuadrupedModel::side_sign(leg) * lateral < -limits.midline_margin) {
      return TerminationReason::kSelfPenetration;
    }
  }
  return std::nullopt;
}

JointVector ReferencePolicy::act(const Eigen::VectorXd& observation, Rng&) {
  return observation.segment<kNumJoints>(kObsTargetJointsOffset);
}

ImitationEnv::ImitationEnv(QuadrupedModel model, EnvOptions options)
    : model_(std::move(model)), options_(std::move(options)) {
  options_.weights.validate();
}

Eigen::VectorXd ImitationEnv::reset(MotionClip reference, const DomainParams& domain, std::uint64_t seed) {
  if (reference.size() < 2) throw Error(ErrorCode::kTooShort, "reference needs at least two frames");
  if (!reference.frames.front().contact_labels) reference = label_contacts(reference, model_);
  reference_ = std::move(reference);
  domain_ = domain;
  noise_.seed(seed);
  const int by_duration = static_cast<int>(std::lround(options_.max_duration * reference_.frame_rate));
  max_steps_ = std::min(by_duration, static_cast<int>(reference_.size()) - 1);
  step_ = 0;
  done_ = max_steps_ <= 0;

  const MotionFrame& first = reference_.frames.front();
  plant_ = PlantState::from_pose(model_, first.pose, stance_flags(first), domain_.slope);
  filter_.reset();
  history_.clear();
  history_.push_sensor(read_sensors(plant_, noise_, options_.plant.sensor_noise));
  history_.push_reference(reference_features(reference_.frames[1].pose));
  return build_observation(history_);
}

StepResult ImitationEnv::step(const JointVector& action) {
  if (done_) throw Error(ErrorCode::kInvalidArgument, "step called on a finished episode");
  StepResult out;
  const MotionFrame& target = reference_.frames[step_ + 1];
  JointVector command = action;
  if (options_.filter_actions) command = filter_.filter(action);
  const SensorReading z = surrogate_step(plant_, command, stance_flags(target), domain_, model_, noise_,
                                         reference_.dt(), options_.plant);
  out.reward = compute_reward(target, plant_, model_, options_.required_contacts, options_.weights);
  out.termination = check_termination(plant_, model_, domain_.slope, options_.limits);
  ++step_;
  done_ = out.termination.has_value() || step_ >= max_steps_;

  history_.push_sensor(z);
  history_.push_action(action);
  if (!done_) history_.push_reference(reference_features(reference_.frames[step_ + 1].pose));
  out.observation = build_observation(history_);
  out.done = done_;
  return out;
}

EpisodeResult run_episode(Policy& policy, const MotionClip& reference, const DomainParams& domain,
                          const QuadrupedModel& model, std::uint64_t seed, const EnvOptions& options) {
  ImitationEnv env(model, options);
  Rng policy_rng(derive_seed(seed, 1));
  Eigen::VectorXd obs = env.reset(reference, domain, derive_seed(seed, 0));
  EpisodeResult result;
  result.max_steps = env.max_steps();
  double reward_sum = 0.0;
  while (!env.done()) {
    const JointVector action = policy.act(obs, policy_rng);
    if (!action.allFinite()) throw Error(ErrorCode::kNumericFailure, "policy produced a non-finite action");
    const StepResult s = env.step(action);
    reward_sum += s.reward.total;
    result.trace.push_back({env.steps() * env.reference().dt(), s.reward});
    result.termination = s.termination;
    obs = s.observation;
  }
  result.steps = env.steps();
  if (result.steps > 0) result.mean_reward = reward_sum / result.steps;
  // The terminating step does not count as survived.
  const int survived = result.termination ? result.steps - 1 : result.steps;
  result.success_time_ratio =
      result.max_steps > 0 ? static_cast<double>(survived) / result.max_steps : 1.0;
  return result;
}

void write_episode_csv(std::ostream& out, const EpisodeResult& result) {
  out << "t,joint,end_effector,root_position,root_orientation,support,acceleration,total,termination\n";
  for (size_t i = 0; i < result.trace.size(); ++i) {
    const auto& row = result.trace[i];
    const auto& r = row.reward;
    out << row.time << ',' << r.joint << ',' << r.end_effector << ',' << r.root_position << ','
        << r.root_orientation << ',' << r.support << ',' << r.acceleration << ',' << r.total << ',';
    if (i + 1 == result.trace.size() && result.termination) out << termination_name(*result.termination);
    out << '\n';
  }
}

}  // namespace quadmimic
