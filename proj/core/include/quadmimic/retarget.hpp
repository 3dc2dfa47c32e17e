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

#ifndef QUADMIMIC_RETARGET_HPP_
#define QUADMIMIC_RETARGET_HPP_

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "quadmimic/datagen.hpp"
#include "quadmimic/kinematics.hpp"
#include "quadmimic/motion.hpp"
#include "quadmimic/nn.hpp"

namespace quadmimic {

struct LossWeights {
  double orientation = 0.3;
  double joints = 1.0;
  double velocity = 0.001;
  double acceleration = 0.001;
};

struct MapLoss {
  double total = 0.0;
  double orientation = 0.0;
  double joints = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
};

// Foot velocity/acceleration terms use body-frame end-effector rates.
MapLoss compute_map_loss(const MotionFrame& output, const MotionFrame& target,
                         const QuadrupedModel& model, const LossWeights& weights = {});

// Mapping loss as a function of the raw tanh head `y` of a RetargetNet, with
// its gradient when `grad` is given. Agrees with compute_map_loss on
// RetargetNet::decode(y).
MapLoss map_loss_head(const Eigen::VectorXd& y, const MotionFrame& target, const QuadrupedModel& model,
                      const LossWeights& weights = {}, Eigen::VectorXd* grad = nullptr);

// Per-feature standardization fitted on training inputs.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& columns);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& columns) const;
  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);
};

struct RetargetNet {
  static constexpr int kInputDim = HumanFrame::kTripletDim;
  static constexpr int kOutputDim = 46;

  Mlp mlp;
  Standardizer input;

  static MlpSpec default_spec();
  // Maps the tanh head to a frame: normalized quaternion, joints spanning the
  // limit box, rates and accelerations scaled from the velocity limit.
  static MotionFrame decode(const Eigen::VectorXd& y, const QuadrupedModel& model);
  MotionFrame infer(const HumanFrame& human, const QuadrupedModel& model) const;
};

struct ContactNet {
  static constexpr int kInputDim = 2 * HumanFrame::kFeatureDim;

  Mlp mlp;
  Standardizer input;

  static MlpSpec default_spec();
  ContactLabels infer(const HumanFrame& human) const;
};

struct TrainOptions {
  int max_steps = 5000;
  int batch_size = 64;
  double learning_rate = 1e-3;
  int eval_interval = 100;
  int patience = 10;  // evaluations without holdout improvement
  std::uint64_t seed = 0;
  LossWeights weights;
};

struct TrainRecord {
  int step = 0;
  double train_loss = 0.0;
  double holdout_loss = 0.0;
  MapLoss holdout_components;  // retarget training only
};

struct TrainReport {
  int steps = 0;
  int best_step = 0;
  double initial_holdout = 0.0;
  double best_holdout = 0.0;
  std::vector<TrainRecord> history;
};

struct RetargetEval {
  MapLoss loss;            // mean over samples
  double joint_mae = 0.0;  // rad, mean over samples and joints
};

RetargetEval evaluate_retarget(const RetargetNet& net, const std::vector<const PairedSample*>& samples,
                               const QuadrupedModel& model, const LossWeights& weights = {});

RetargetNet train_retarget(const Dataset& dataset, RobotState state, const QuadrupedModel& model,
                           const TrainOptions& options = {}, TrainReport* report = nullptr);

struct ContactEval {
  double loss = 0.0;      // mean squared error summed over feet
  double accuracy = 0.0;  // thresholded at 0.5
};

ContactEval evaluate_contact(const ContactNet& net, const std::vector<const PairedSample*>& samples);

ContactNet train_contact(const Dataset& dataset, RobotState state, const TrainOptions& options = {},
                         TrainReport* report = nullptr);

class KnnIndex {
 public:
  KnnIndex() = default;
  KnnIndex(const std::vector<HumanFrame>& frames, const std::vector<RobotState>& labels, int k = 5);

  bool empty() const { return labels_.empty(); }
  size_t size() const { return labels_.size(); }
  int k() const { return k_; }
  // Majority of the k nearest neighbours; ties go to `current`, then to the
  // lowest state in Stand < Sit < Walk order.
  RobotState classify(const HumanFrame& query, RobotState current) const;

  void save(const std::filesystem::path& path) const;
  static KnnIndex load(const std::filesystem::path& path);
  // Training (non-holdout) samples of every state.
  static KnnIndex from_dataset(const Dataset& dataset, int k = 5);

 private:
  int k_ = 5;
  Standardizer norm_;
  Eigen::MatrixXd points_;  // normalized triplets, one per column
  std::vector<RobotState> labels_;
};

struct ExpertSet {
  std::array<RetargetNet, kNumRobotStates> retarget;
  std::array<ContactNet, kNumRobotStates> contact;
  KnnIndex index;

  void validate() const;
  void save(const std::filesystem::path& dir) const;
  static ExpertSet load(const std::filesystem::path& dir);
};

// Bundle file names inside an expert directory.
std::filesystem::path retarget_file(const std::filesystem::path& dir, RobotState state);
std::filesystem::path contact_file(const std::filesystem::path& dir, RobotState state);
std::filesystem::path index_file(const std::filesystem::path& dir);

void save_retarget_net(const std::filesystem::path& path, const RetargetNet& net, RobotState state);
RetargetNet load_retarget_net(const std::filesystem::path& path);
void save_contact_net(const std::filesystem::path& path, const ContactNet& net, RobotState state);
ContactNet load_contact_net(const std::filesystem::path& path);

RobotState select_expert(const ExpertSet& experts, const HumanFrame& human, RobotState current);

double transition_duration(RobotState from, RobotState to);
// Kinematic clip between canonical poses with the feet held in place.
MotionClip state_transition(const QuadrupedModel& model, RobotState from, RobotState to,
                            double frame_rate = 30.0);

struct RetargetOptions {
  bool contact_correction = true;
  bool temporal_correction = true;
  bool clip_before_pin = false;
  int hysteresis_frames = 10;
  double contact_threshold = 0.5;
};

struct RetargetHistory {
  MotionFrame previous;
  FootArray previous_feet;  // world
  RobotState state = RobotState::kStand;
  RobotState pending = RobotState::kStand;
  int votes = 0;
  MotionClip transition;  // remaining frames of an active transition
  size_t transition_index = 0;
  bool started = false;

  static RetargetHistory start(const QuadrupedModel& model, RobotState state);
  bool in_transition() const { return transition_index < transition.size(); }
};

struct RetargetOutput {
  MotionFrame frame;
  ContactLabels contact_probabilities{};
  RobotState state = RobotState::kStand;
  bool in_transition = false;
  bool ik_fallback = false;
  bool switched = false;
};

RetargetOutput retarget_frame(const ExpertSet& experts, const QuadrupedModel& model,
                              const HumanFrame& human, RetargetHistory& history, double dt,
                              const RetargetOptions& options = {});

struct RetargetRun {
  MotionClip clip;
  std::vector<ContactLabels> contact_probabilities;
  std::vector<RobotState> states;
  int fallback_frames = 0;
  double max_joint_velocity = 0.0;  // rad/s, realized frame to frame
};

RetargetRun retarget_clip(const ExpertSet& experts, const QuadrupedModel& model,
                          const HumanClip& human, RobotState initial_state, double frame_rate = 30.0,
                          const RetargetOptions& options = {});

// Mean horizontal foot displacement per frame over feet whose reference label
// exceeds 0.9 in both frames of the step.
double foot_skate(const QuadrupedModel& model, const MotionClip& clip,
                  const std::vector<ContactLabels>& reference_labels);

}  // namespace quadmimic

#endif  // QUADMIMIC_RETARGET_HPP_
