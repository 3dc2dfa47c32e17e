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

#include "quadmimic/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

namespace quadmimic {
namespace {

constexpr double kStandHeight = 0.30;
constexpr double kWalkHeight = 0.28;
constexpr double kSitHeight = 0.22;
constexpr double kSitPitch = -0.35;  // nose up
constexpr int kMaxGoalAttempts = 100;

double ease(double s) { return s * s * (3.0 - 2.0 * s); }

Vec3 nominal_foot(const QuadrupedModel& model, int leg) {
  const Vec3& hip = model.hip_positions[leg];
  return {hip.x(), hip.y() + QuadrupedModel::side_sign(leg) * model.abduction_offset,
          model.foot_radius};
}

// Solves all four legs for world foot targets at a fixed root. Returns false
// if any leg is unreachable; `pose` then holds the best effort.
bool solve_feet(const QuadrupedModel& model, Pose& pose, const FootArray& targets) {
  bool ok = true;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const IkResult ik = solve_leg_ik(model, pose, leg, targets[leg]);
    pose.set_leg_joints(leg, ik.angles);
    ok = ok && ik.ok();
  }
  return ok;
}

struct KeyPose {
  Vec3 root_position;
  Quat root_orientation;
  Vec3 manip_target;
};

FootArray keypose_targets(const FootArray& feet, const KeyPose& k, bool manip) {
  FootArray t = feet;
  if (manip) t[kManipulationLeg] = k.manip_target;
  return t;
}

KeyPose blend(const KeyPose& a, const KeyPose& b, double s) {
  const double e = ease(s);
  return {a.root_position + e * (b.root_position - a.root_position),
          a.root_orientation.slerp(e, b.root_orientation),
          a.manip_target + e * (b.manip_target - a.manip_target)};
}

KeyPose sample_keypose(const TaskSpec& spec, const Pose& canonical, const FootArray& feet,
                       Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double d = spec.difficulty;
  KeyPose k{canonical.root_position, canonical.root_orientation, feet[kManipulationLeg]};
  if (!is_manipulation_task(spec.task)) {
    // Stand tilts up to 40 deg about every axis; sitting is limited to
    // 15/30/7 deg in roll/pitch/yaw.
    const bool sit = state_of(spec.task) == RobotState::kSit;
    const Vec3 range = sit ? Vec3(deg2rad(15), deg2rad(30), deg2rad(7)) : Vec3::Constant(deg2rad(40));
    const double roll = range.x() * d * u(rng);
    const double pitch = range.y() * d * u(rng);
    const double yaw = range.z() * d * u(rng);
    k.root_orientation = canonical.root_orientation * quat_from_rpy(roll, pitch, yaw);
    return k;
  }
  const Vec3 offset(d * (-0.05 + 0.25 * u01(rng)), d * 0.10 * u(rng), d * (0.02 + 0.23 * u01(rng)));
  k.manip_target = feet[kManipulationLeg] + offset;
  // Shift the trunk towards the remaining support triangle while the foot is
  // up.
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (leg != kManipulationLeg) centroid += feet[leg].head<2>() / 3.0;
  }
  const double lift = std::clamp(offset.z() / 0.03, 0.0, 1.0);
  k.root_position.head<2>() += 0.5 * lift * (centroid - canonical.root_position.head<2>());
  return k;
}

}  // namespace

RobotState state_of(Task task) {
  switch (task) {
    case Task::kTiltAtStand:
    case Task::kManipAtStand:
      return RobotState::kStand;
    case Task::kTiltAtSit:
    case Task::kManipAtSit:
      return RobotState::kSit;
    case Task::kWalkForward:
    case Task::kTurnLeft:
    case Task::kTurnRight:
      return RobotState::kWalk;
  }
  return RobotState::kStand;
}

const char* task_name(Task task) {
  switch (task) {
    case Task::kTiltAtStand: return "tilt_at_stand";
    case Task::kManipAtStand: return "manip_at_stand";
    case Task::kTiltAtSit: return "tilt_at_sit";
    case Task::kManipAtSit: return "manip_at_sit";
    case Task::kWalkForward: return "walk_forward";
    case Task::kTurnLeft: return "turn_left";
    case Task::kTurnRight: return "turn_right";
  }
  return "unknown";
}

Task task_from_name(const std::string& name) {
  for (Task t : {Task::kTiltAtStand, Task::kManipAtStand, Task::kTiltAtSit, Task::kManipAtSit,
                 Task::kWalkForward, Task::kTurnLeft, Task::kTurnRight}) {
    if (name == task_name(t)) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown task '" + name + "'");
}

const char* state_name(RobotState state) {
  switch (state) {
    case RobotState::kStand: return "stand";
    case RobotState::kSit: return "sit";
    case RobotState::kWalk: return "walk";
  }
  return "unknown";
}

RobotState state_from_name(const std::string& name) {
  for (RobotState s : kAllRobotStates) {
    if (name == state_name(s)) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown robot state '" + name + "'");
}

bool is_keypose_task(Task task) { return state_of(task) != RobotState::kWalk; }

bool is_manipulation_task(Task task) {
  return task == Task::kManipAtStand || task == Task::kManipAtSit;
}

void GaitParams::validate() const {
  if (!(period > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gait period must be positive");
  if (!(foot_clearance >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "foot_clearance must be >= 0");
  if (!(std::abs(forward_speed) <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "|forward_speed| must be <= 1 m/s");
  }
  if (!(body_height > 0.0)) throw Error(ErrorCode::kInvalidArgument, "body_height must be positive");
  for (double p : phase_offsets) {
    if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorCode::kInvalidArgument, "phase offsets must be in [0,1)");
  }
}

FootArray canonical_feet(const QuadrupedModel& model, RobotState) {
  FootArray feet;
  for (int leg = 0; leg < kNumLegs; ++leg) feet[leg] = nominal_foot(model, leg);
  return feet;
}

Pose canonical_pose(const QuadrupedModel& model, RobotState state) {
  Pose pose;
  for (int leg = 0; leg < kNumLegs; ++leg) pose.set_leg_joints(leg, Vec3(0.0, 0.9, -1.8));
  switch (state) {
    case RobotState::kStand:
      pose.root_position = Vec3(0.0, 0.0, kStandHeight);
      break;
    case RobotState::kWalk:
      pose.root_position = Vec3(0.0, 0.0, kWalkHeight);
      break;
    case RobotState::kSit:
      pose.root_position = Vec3(0.0, 0.0, kSitHeight);
      pose.root_orientation = quat_from_rpy(0.0, kSitPitch, 0.0);
      for (int leg = 2; leg < kNumLegs; ++leg) pose.set_leg_joints(leg, Vec3(0.0, 1.6, -2.5));
      break;
  }
  if (!solve_feet(model, pose, canonical_feet(model, state))) {
    throw Error(ErrorCode::kUnreachable,
                std::string("canonical ") + state_name(state) + " pose is not reachable for this model");
  }
  return pose;
}

MotionClip gen_keypose_motion(const QuadrupedModel& model, const TaskSpec& spec, double duration,
                              Rng& rng, double frame_rate) {
  if (!is_keypose_task(spec.task)) {
    throw Error(ErrorCode::kInvalidArgument, "gen_keypose_motion needs a tilt or manipulation task");
  }
  if (!(spec.difficulty >= 0.0 && spec.difficulty <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "difficulty must be in [0,1]");
  }
  const RobotState state = state_of(spec.task);
  const bool manip = is_manipulation_task(spec.task);
  const Pose canonical = canonical_pose(model, state);
  const FootArray feet = canonical_feet(model, state);
  const double vmax = model.joint_velocity_limit;

  auto solve_key = [&](const KeyPose& k, const Pose& warm, Pose& out) {
    out = warm;
    out.root_position = k.root_position;
    out.root_orientation = k.root_orientation;
    return solve_feet(model, out, keypose_targets(feet, k, manip));
  };

  // Keyposes and their times.
  std::vector<KeyPose> keys{{canonical.root_position, canonical.root_orientation, feet[kManipulationLeg]}};
  std::vector<Pose> key_poses{canonical};
  std::vector<double> key_times{0.0};
  std::uniform_real_distribution<double> interval(1.0, 3.0);
  while (key_times.back() < duration) {
    KeyPose next;
    Pose next_pose;
    double delta = 0.0;
    bool found = false;
    for (int attempt = 0; attempt < kMaxGoalAttempts && !found; ++attempt) {
      next = sample_keypose(spec, canonical, feet, rng);
      if (!solve_key(next, key_poses.back(), next_pose)) continue;
      found = true;
      // Quarter points along the eased path bound the joint speed: the ease
      // peaks at 1.5x the mean rate.
      Pose prev_q = key_poses.back();
      delta = 0.0;
      for (double s : {0.25, 0.5, 0.75, 1.0}) {
        Pose q = prev_q;
        if (s < 1.0 && !solve_key(blend(keys.back(), next, s), prev_q, q)) {
          found = false;
          break;
        }
        if (s == 1.0) q = next_pose;
        delta = std::max(delta, 4.0 * (q.joints - prev_q.joints).cwiseAbs().maxCoeff());
        prev_q = q;
      }
    }
    if (!found) throw Error(ErrorCode::kNoGoalFound, "no reachable keypose after 100 attempts");
    const double t = std::max(interval(rng), 1.5 * delta / (0.9 * vmax));
    keys.push_back(next);
    key_poses.push_back(next_pose);
    key_times.push_back(key_times.back() + t);
  }

  MotionClip clip;
  clip.frame_rate = frame_rate;
  const int n = static_cast<int>(std::lround(duration * frame_rate)) + 1;
  clip.frames.resize(n);
  size_t seg = 0;
  Pose prev = canonical;
  for (int i = 0; i < n; ++i) {
    const double t = i / frame_rate;
    while (seg + 2 < key_times.size() && t > key_times[seg + 1]) ++seg;
    const double s = std::clamp((t - key_times[seg]) / (key_times[seg + 1] - key_times[seg]), 0.0, 1.0);
    Pose pose;
    solve_key(blend(keys[seg], keys[seg + 1], s), prev, pose);
    if (i > 0) pose = rate_limit(prev, pose, 1.0 / frame_rate, vmax);
    clip.frames[i].time = t;
    clip.frames[i].pose = pose;
    prev = pose;
  }
  if (n >= 3) clip = finite_difference(clip);
  return label_contacts(clip, model);
}

GaitParams sample_gait_params(const TaskSpec& task, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  GaitParams g;
  g.body_height = 0.27 + 0.02 * u01(rng);
  g.foot_clearance = 0.03 + 0.02 * u01(rng);
  g.swing_angle = -0.1 + 0.2 * u01(rng);
  g.period = 1.1 + 0.2 * u01(rng);
  const double d = task.difficulty;
  switch (task.task) {
    case Task::kWalkForward:
      g.forward_speed = d * (0.06 + 0.06 * u01(rng));
      break;
    case Task::kTurnLeft:
    case Task::kTurnRight: {
      g.forward_speed = 0.04 * u01(rng);
      const double rate = deg2rad(15.0) * d * (0.5 + 0.5 * u01(rng));
      g.turn_rate = task.task == Task::kTurnLeft ? rate : -rate;
      break;
    }
    default:
      throw Error(ErrorCode::kInvalidArgument, "sample_gait_params needs a locomotion task");
  }
  return g;
}

MotionClip gen_gait_motion(const QuadrupedModel& model, const GaitParams& p, double duration,
                           double frame_rate) {
  p.validate();
  auto root_at = [&](double t) {
    Vec3 pos(0.0, 0.0, p.body_height);
    const double yaw = p.turn_rate * t;
    if (std::abs(p.turn_rate) > 1e-12) {
      pos.x() = p.forward_speed / p.turn_rate * std::sin(yaw);
      pos.y() = p.forward_speed / p.turn_rate * (1.0 - std::cos(yaw));
    } else {
      pos.x() = p.forward_speed * t;
    }
    return std::pair{pos, yaw};
  };
  // Foot placement under the hip at time t.
  auto placement = [&](int leg, double t) {
    const auto [pos, yaw] = root_at(t);
    const Vec3 n = nominal_foot(model, leg);
    const Eigen::Rotation2Dd rz(yaw);
    const Eigen::Vector2d xy = pos.head<2>() + rz * n.head<2>();
    return Vec3(xy.x(), xy.y(), model.foot_radius);
  };

  const double half = 0.5 * p.period;
  MotionClip clip;
  clip.frame_rate = frame_rate;
  const int n = static_cast<int>(std::lround(duration * frame_rate)) + 1;
  clip.frames.resize(n);
  Pose prev;
  for (int leg = 0; leg < kNumLegs; ++leg) prev.set_leg_joints(leg, Vec3(0.0, 0.9, -1.8));
  for (int i = 0; i < n; ++i) {
    const double t = i / frame_rate;
    const auto [pos, yaw] = root_at(t);
    Pose pose = prev;
    pose.root_position = pos;
    pose.root_orientation = quat_from_rpy(0.0, 0.0, yaw);
    FootArray targets;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const double cycles = t / p.period + p.phase_offsets[leg];
      const double phase = cycles - std::floor(cycles);
      if (phase < 0.5) {
        const double stance_start = t - phase * p.period;
        targets[leg] = placement(leg, stance_start + 0.5 * half);
      } else {
        const double s = (phase - 0.5) / 0.5;
        const double swing_start = t - (phase - 0.5) * p.period;
        const Vec3 lift = placement(leg, swing_start - 0.5 * half);
        const Vec3 land = placement(leg, swing_start + half + 0.5 * half);
        const double c = s - std::sin(2.0 * std::numbers::pi * s) / (2.0 * std::numbers::pi);
        Vec3 foot = lift + c * (land - lift);
        const double bump = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * s));
        foot.z() = model.foot_radius + p.foot_clearance * bump;
        const Eigen::Vector2d heading(std::cos(yaw), std::sin(yaw));
        foot.head<2>() += heading * (p.foot_clearance * std::tan(p.swing_angle) * std::sin(std::numbers::pi * s));
        targets[leg] = foot;
      }
    }
    if (!solve_feet(model, pose, targets)) {
      throw Error(ErrorCode::kGaitInfeasible, "gait foot target unreachable at t=" + std::to_string(t));
    }
    if (i > 0) pose = rate_limit(prev, pose, 1.0 / frame_rate, model.joint_velocity_limit);
    clip.frames[i].time = t;
    clip.frames[i].pose = pose;
    prev = pose;
  }
  if (n >= 3) clip = finite_difference(clip);
  return label_contacts(clip, model);
}

MotionClip gen_task_motion(const QuadrupedModel& model, const TaskSpec& task, double duration,
                           Rng& rng, double frame_rate) {
  if (is_keypose_task(task.task)) return gen_keypose_motion(model, task, duration, rng, frame_rate);
  return gen_gait_motion(model, sample_gait_params(task, rng), duration, frame_rate);
}

double contact_label(double height, double speed) {
  const double h = std::clamp(1.0 - height / 0.02, 0.0, 1.0);
  const double v = std::clamp(1.0 - speed / 0.60, 0.0, 1.0);
  return h * v;
}

MotionClip label_contacts(const MotionClip& clip, const QuadrupedModel& model) {
  MotionClip out = clip;
  const int n = static_cast<int>(clip.size());
  std::vector<FootArray> feet(n);
  for (int i = 0; i < n; ++i) feet[i] = forward_kinematics(model, clip.frames[i].pose).world;
  for (int i = 0; i < n; ++i) {
    // Adjacent-frame differences: the wider derivative stencil would smear
    // lift-off into the neighbouring stance frames.
    const int lo = std::max(0, i - 1);
    const int hi = std::min(n - 1, i + 1);
    ContactLabels labels{};
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const double height = std::max(0.0, feet[i][leg].z() - model.foot_radius);
      double speed = 0.0;
      if (hi > lo) {
        const double span = clip.frames[hi].time - clip.frames[lo].time;
        speed = (feet[hi][leg] - feet[lo][leg]).norm() / span;
      }
      labels[leg] = contact_label(height, speed);
    }
    out.frames[i].contact_labels = labels;
  }
  return out;
}

HumanStyle::HumanStyle(std::uint64_t style_seed) : seed_(style_seed) {
  Rng rng(derive_seed(style_seed, 0x4855u));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 3; ++i) orientation_gain_[i] = 0.6 + 0.4 * u01(rng);
  for (int i = 0; i < 24; ++i) keypoint_base_[i] = -0.7 + 1.4 * u01(rng);
  for (int j = 0; j < 27; ++j) {
    const bool chest = j < 3;
    for (int m = 0; m < kSinusoids; ++m) {
      amp_(j, m) = chest ? 0.05 + 0.10 * u01(rng) : 0.10 + 0.30 * u01(rng);
      if (u01(rng) < 0.5) amp_(j, m) = -amp_(j, m);
      freq_(j, m) = 0.5 + u01(rng);
      phase_(j, m) = 2.0 * std::numbers::pi * u01(rng);
      Eigen::Matrix<double, kStateDim, 1> dir;
      for (int k = 0; k < kStateDim; ++k) dir[k] = gauss(rng);
      dirs_[j].col(m) = dir.normalized();
    }
  }
}

HumanFrame::Features HumanStyle::features(const QuadrupedModel& model, const MotionFrame& robot) const {
  const Vec3 rpy = rpy_from_quat(robot.pose.root_orientation);
  const FootArray feet = forward_kinematics(model, robot.pose).world;
  Eigen::Matrix<double, kStateDim, 1> s;
  s.segment<3>(0) = rpy;
  s.segment<3>(3) = 0.5 * robot.rates.root_angular_velocity;
  s[6] = 10.0 * (robot.pose.root_position.z() - kStandHeight);
  static const Vec3 kLegRef(0.0, 0.8, -1.6);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    s.segment<3>(7 + 3 * leg) = robot.pose.leg_joints(leg) - kLegRef;
    s[19 + leg] = 10.0 * std::max(0.0, feet[leg].z() - model.foot_radius);
  }

  Eigen::Matrix<double, 27, 1> bank;
  for (int j = 0; j < 27; ++j) {
    double acc = 0.0;
    for (int m = 0; m < kSinusoids; ++m) {
      acc += amp_(j, m) * (std::sin(freq_(j, m) * dirs_[j].col(m).dot(s) + phase_(j, m)) -
                           std::sin(phase_(j, m)));
    }
    bank[j] = acc;
  }

  HumanFrame::Features f;
  const Quat root = quat_from_rpy(orientation_gain_[0] * rpy[0], orientation_gain_[1] * rpy[1],
                                  orientation_gain_[2] * rpy[2]);
  const Quat chest = quat_from_rpy(bank[0], bank[1], bank[2]);
  f.segment<4>(0) << root.w(), root.x(), root.y(), root.z();
  f.segment<4>(4) << chest.w(), chest.x(), chest.y(), chest.z();
  for (int i = 0; i < 24; ++i) f[8 + i] = 1.5 * std::tanh((keypoint_base_[i] + bank[3 + i]) / 1.5);
  return f;
}

HumanClip gen_human_clip(const QuadrupedModel& model, const MotionClip& robot,
                         const HumanStyle& style, Rng& rng, double noise_std) {
  const int n = static_cast<int>(robot.size());
  HumanClip human(n);
  constexpr int kHalf = 2;
  std::array<double, 2 * kHalf + 1> kernel{};
  double energy = 0.0;
  for (int i = -kHalf; i <= kHalf; ++i) {
    kernel[i + kHalf] = std::exp(-0.5 * i * i);
    energy += kernel[i + kHalf] * kernel[i + kHalf];
  }
  for (double& w : kernel) w /= std::sqrt(energy);

  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd white(HumanFrame::kFeatureDim, n + 2 * kHalf);
  for (int c = 0; c < white.cols(); ++c) {
    for (int r = 0; r < white.rows(); ++r) white(r, c) = gauss(rng);
  }
  for (int i = 0; i < n; ++i) {
    HumanFrame::Features noise = HumanFrame::Features::Zero();
    for (int t = 0; t <= 2 * kHalf; ++t) noise += kernel[t] * white.col(i + t);
    HumanFrame& h = human[i];
    h.time = robot.frames[i].time;
    h.q = style.features(model, robot.frames[i]) + noise_std * noise;
    h.q.segment<4>(0).normalize();
    h.q.segment<4>(4).normalize();
  }
  if (n >= 3) differentiate_human(human, robot.frame_rate);
  return human;
}

std::vector<const PairedSample*> Dataset::select(RobotState state, bool holdout) const {
  std::vector<const PairedSample*> out;
  for (const auto& s : samples) {
    if (s.state == state && s.holdout == holdout) out.push_back(&s);
  }
  return out;
}

Dataset build_dataset(const QuadrupedModel& model, const std::vector<TaskSpec>& tasks,
                      int clips_per_task, std::uint64_t seed, const DatasetOptions& options) {
  if (tasks.empty()) throw Error(ErrorCode::kEmptyTasks, "build_dataset needs at least one task");
  if (clips_per_task < 1) throw Error(ErrorCode::kInvalidArgument, "clips_per_task must be >= 1");
  Dataset ds;
  ds.model_hash = model.hash();
  ds.style_seed = options.style_seed;
  ds.seed = seed;
  ds.frame_rate = options.frame_rate;
  const HumanStyle style(options.style_seed);

  for (size_t ti = 0; ti < tasks.size(); ++ti) {
    const TaskSpec& task = tasks[ti];
    const int quota_total = options.max_per_task;
    std::vector<int> clip_order(clips_per_task);
    std::iota(clip_order.begin(), clip_order.end(), 0);
    Rng split_rng(derive_seed(seed, ti, 0x5e11u));
    std::shuffle(clip_order.begin(), clip_order.end(), split_rng);
    const int holdout_clips =
        clips_per_task >= 2
            ? std::max(1, static_cast<int>(std::lround(options.holdout_fraction * clips_per_task)))
            : 0;
    std::vector<bool> is_holdout(clips_per_task, false);
    for (int i = 0; i < holdout_clips; ++i) is_holdout[clip_order[i]] = true;

    int task_count = 0;
    for (int c = 0; c < clips_per_task; ++c) {
      Rng rng(derive_seed(seed, ti + 1, c));
      const MotionClip robot = gen_task_motion(model, task, options.clip_duration, rng, options.frame_rate);
      const HumanClip human = gen_human_clip(model, robot, style, rng);
      const int frames = static_cast<int>(robot.size());
      const int quota = std::min(frames, quota_total / clips_per_task);
      for (int k = 0; k < quota; ++k) {
        const int idx = static_cast<int>(static_cast<long long>(k) * frames / quota);
        PairedSample s;
        s.clip_id = static_cast<int>(ti) * clips_per_task + c;
        s.task = task;
        s.state = state_of(task.task);
        s.holdout = is_holdout[c];
        s.human = human[idx];
        s.robot = robot.frames[idx];
        ds.samples.push_back(std::move(s));
      }
      task_count += quota;
    }
    if (task_count < options.min_per_task || task_count > options.max_per_task) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("task ") + task_name(task.task) + " yields " + std::to_string(task_count) +
                      " samples, outside [" + std::to_string(options.min_per_task) + ", " +
                      std::to_string(options.max_per_task) + "]");
    }
  }
  std::stable_sort(ds.samples.begin(), ds.samples.end(), [](const auto& a, const auto& b) {
    return static_cast<int>(a.state) < static_cast<int>(b.state);
  });
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  nlohmann::json header = {{"kind", "quadmimic-dataset"},
                           {"schema_version", Dataset::kSchemaVersion},
                           {"model_hash", ds.model_hash},
                           {"style_seed", ds.style_seed},
                           {"seed", ds.seed},
                           {"frame_rate", ds.frame_rate},
                           {"samples", ds.samples.size()}};
  out << header.dump() << '\n';
  for (const auto& s : ds.samples) {
    nlohmann::json j = {{"clip_id", s.clip_id},
                        {"task", task_name(s.task.task)},
                        {"difficulty", s.task.difficulty},
                        {"state", state_name(s.state)},
                        {"split", s.holdout ? "holdout" : "train"},
                        {"human", human_frame_to_json(s.human)},
                        {"robot", frame_to_json(s.robot, true)}};
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  Dataset ds;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kCorruptFile, "empty dataset file");
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.value("kind", "") != "quadmimic-dataset") {
      throw Error(ErrorCode::kCorruptFile, "not a dataset file");
    }
    if (header.at("schema_version").get<int>() != Dataset::kSchemaVersion) {
      throw Error(ErrorCode::kVersionMismatch, "dataset schema version " +
                                                  std::to_string(header.at("schema_version").get<int>()));
    }
    ds.model_hash = header.at("model_hash").get<std::string>();
    ds.style_seed = header.at("style_seed").get<std::uint64_t>();
    ds.seed = header.at("seed").get<std::uint64_t>();
    ds.frame_rate = header.at("frame_rate").get<double>();
    const size_t expected = header.at("samples").get<size_t>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      PairedSample s;
      s.clip_id = j.at("clip_id").get<int>();
      s.task.task = task_from_name(j.at("task").get<std::string>());
      s.task.difficulty = j.at("difficulty").get<double>();
      s.state = state_from_name(j.at("state").get<std::string>());
      s.holdout = j.at("split").get<std::string>() == "holdout";
      s.human = human_frame_from_json(j.at("human"));
      s.robot = frame_from_json(j.at("robot"));
      ds.samples.push_back(std::move(s));
    }
    if (ds.samples.size() != expected) {
      throw Error(ErrorCode::kCorruptFile, "dataset truncated: expected " + std::to_string(expected) +
                                               " samples, found " + std::to_string(ds.samples.size()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("bad dataset: ") + e.what());
  }
  return ds;
}

}  // namespace quadmimic
