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

#ifndef QUADMIMIC_DATAGEN_HPP_
#define QUADMIMIC_DATAGEN_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "quadmimic/kinematics.hpp"
#include "quadmimic/motion.hpp"

namespace quadmimic {

enum class Task {
  kTiltAtStand,
  kManipAtStand,
  kTiltAtSit,
  kManipAtSit,
  kWalkForward,
  kTurnLeft,
  kTurnRight,
};

// Declaration order doubles as the tie-break order for expert selection.
enum class RobotState { kStand = 0, kSit = 1, kWalk = 2 };

inline constexpr int kNumRobotStates = 3;
inline constexpr std::array<RobotState, kNumRobotStates> kAllRobotStates = {
    RobotState::kStand, RobotState::kSit, RobotState::kWalk};

RobotState state_of(Task task);
const char* task_name(Task task);
Task task_from_name(const std::string& name);
const char* state_name(RobotState state);
RobotState state_from_name(const std::string& name);
bool is_keypose_task(Task task);
bool is_manipulation_task(Task task);

struct TaskSpec {
  Task task = Task::kTiltAtStand;
  double difficulty = 1.0;  // [0, 1]
};

struct GaitParams {
  double body_height = 0.28;
  double foot_clearance = 0.05;
  double swing_angle = 0.0;  // forward lean of the swing apex, rad
  double period = 1.2;
  double forward_speed = 0.0;
  double turn_rate = 0.0;
  std::array<double, kNumLegs> phase_offsets = {0.0, 0.5, 0.5, 0.0};

  void validate() const;
};

// Manipulating leg for manipulation tasks.
inline constexpr int kManipulationLeg = 0;  // front-right

// Canonical configuration of each robot state, feet on flat ground at z = 0
// (foot centres at foot_radius).
Pose canonical_pose(const QuadrupedModel& model, RobotState state);
// World foot centres of the canonical stance.
FootArray canonical_feet(const QuadrupedModel& model, RobotState state);

// Keypose motion for tilt and manipulation tasks: random goals solved with IK
// and blended with a cubic ease over intervals drawn from [1, 3] s. Stance
// feet stay pinned. Throws NoGoalFound after 100 failed goal draws.
MotionClip gen_keypose_motion(const QuadrupedModel& model, const TaskSpec& task, double duration,
                              Rng& rng, double frame_rate = 30.0);

// Trot-style trajectory generator; throws GaitInfeasible when IK fails.
MotionClip gen_gait_motion(const QuadrupedModel& model, const GaitParams& params, double duration,
                           double frame_rate = 30.0);

// Random gait parameters for a locomotion task at the given difficulty.
GaitParams sample_gait_params(const TaskSpec& task, Rng& rng);

// Dispatches on the task family.
MotionClip gen_task_motion(const QuadrupedModel& model, const TaskSpec& task, double duration,
                           Rng& rng, double frame_rate = 30.0);

// label = clamp(1 - h/0.02) * clamp(1 - v/0.60) with foot height h (m) and
// speed v (m/s).
double contact_label(double height, double speed);
MotionClip label_contacts(const MotionClip& clip, const QuadrupedModel& model);

// Fixed random smooth map from robot state to human features; the style seed
// selects the map.
class HumanStyle {
 public:
  explicit HumanStyle(std::uint64_t style_seed);

  std::uint64_t seed() const { return seed_; }
  HumanFrame::Features features(const QuadrupedModel& model, const MotionFrame& robot) const;

 private:
  static constexpr int kSinusoids = 8;
  static constexpr int kStateDim = 23;
  std::uint64_t seed_;
  Eigen::Vector3d orientation_gain_;
  Eigen::Matrix<double, 24, 1> keypoint_base_;
  // Per output: amplitude, frequency, phase and direction of each sinusoid.
  Eigen::Matrix<double, 27, kSinusoids> amp_, freq_, phase_;
  std::array<Eigen::Matrix<double, kStateDim, kSinusoids>, 27> dirs_;
};

HumanClip gen_human_clip(const QuadrupedModel& model, const MotionClip& robot,
                         const HumanStyle& style, Rng& rng, double noise_std = 0.01);

struct PairedSample {
  int clip_id = 0;
  TaskSpec task;
  RobotState state = RobotState::kStand;
  bool holdout = false;
  HumanFrame human;
  MotionFrame robot;
};

struct DatasetOptions {
  double clip_duration = 6.0;
  double frame_rate = 30.0;
  std::uint64_t style_seed = 7;
  int min_per_task = 76;
  int max_per_task = 522;
  double holdout_fraction = 0.1;
};

struct Dataset {
  static constexpr int kSchemaVersion = 1;
  std::string model_hash;
  std::uint64_t style_seed = 0;
  std::uint64_t seed = 0;
  double frame_rate = 30.0;
  std::vector<PairedSample> samples;

  std::vector<const PairedSample*> select(RobotState state, bool holdout) const;
};

// Paired human/robot samples, grouped by robot state. Per-task counts land
// in [min_per_task, max_per_task]; the train/holdout split is by clip.
Dataset build_dataset(const QuadrupedModel& model, const std::vector<TaskSpec>& tasks,
                      int clips_per_task, std::uint64_t seed, const DatasetOptions& options = {});

void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace quadmimic

#endif  // QUADMIMIC_DATAGEN_HPP_
