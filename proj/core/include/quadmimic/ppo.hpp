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

#ifndef QUADMIMIC_PPO_HPP_
#define QUADMIMIC_PPO_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "quadmimic/curriculum.hpp"
#include "quadmimic/imitation.hpp"
#include "quadmimic/nn.hpp"

namespace quadmimic {

struct PpoConfig {
  double clip_range = 0.2;
  double learning_rate = 5e-5;  // shared by policy and value
  double gamma = 0.95;
  double gae_lambda = 0.95;
  int minibatch = 128;
  double max_grad_norm = 0.5;
  int epochs_per_iter = 4;
  int rollout_horizon = 4096;  // steps per iteration, summed over environments
  int num_envs = 16;
  int hidden = 256;
  double log_std_init = -1.0;
  double log_std_min = -4.0;
  double log_std_max = 1.0;
  double output_init_scale = 0.01;  // shrinks the initial mean head
  double action_scale = 0.15;       // rad of PD-target offset per unit action
  // Offsets are taken from the newest reference joints when true, otherwise
  // from the nominal pose of the robot state being trained.
  bool reference_offset = false;

  void validate() const;
  nlohmann::json to_json() const;
};

// Per-feature running mean and variance (parallel Welford merge).
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  explicit RunningNormalizer(int dim);

  void update(const Eigen::MatrixXd& batch);  // one sample per column
  Eigen::MatrixXd apply(const Eigen::MatrixXd& batch) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  double count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::VectorXd stddev() const;

  nlohmann::json to_json() const;
  static RunningNormalizer from_json(const nlohmann::json& j);

 private:
  double count_ = 0.0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

// Gaussian policy with state-independent log-std. Actions are offsets, in
// units of action_scale radians, from either the newest reference joints in
// the observation or a fixed nominal pose; act() returns the PD targets.
class GaussianPolicy : public Policy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(const PpoConfig& config, const JointVector& nominal, Rng& rng);

  JointVector act(const Eigen::VectorXd& observation, Rng& rng) override;

  // Action means, one column per observation.
  Eigen::MatrixXd means(const Eigen::MatrixXd& observations) const;
  Eigen::MatrixXd means(const Eigen::MatrixXd& observations, MlpCache& cache) const;
  Eigen::VectorXd log_probs(const Eigen::MatrixXd& observations, const Eigen::MatrixXd& actions) const;
  // PD targets for the given actions.
  Eigen::MatrixXd targets(const Eigen::MatrixXd& observations, const Eigen::MatrixXd& actions) const;
  double action_scale() const { return action_scale_; }
  bool reference_offset() const { return reference_offset_; }
  const JointVector& nominal() const { return nominal_; }
  double entropy() const;

  void set_deterministic(bool deterministic) { deterministic_ = deterministic; }
  void clamp_log_std(double lo, double hi);

  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  Eigen::VectorXd& log_std() { return log_std_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }
  RunningNormalizer& normalizer() { return normalizer_; }
  const RunningNormalizer& normalizer() const { return normalizer_; }

  Checkpoint to_checkpoint() const;
  static GaussianPolicy from_checkpoint(const Checkpoint& checkpoint);

 private:
  Mlp net_;
  Eigen::VectorXd log_std_;
  RunningNormalizer normalizer_;
  double action_scale_ = 0.15;
  bool reference_offset_ = false;
  JointVector nominal_ = JointVector::Zero();
  bool deterministic_ = false;
};

Mlp make_value_net(const PpoConfig& config, Rng& rng);

// Log-density of a diagonal Gaussian, one column per sample.
Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mean,
                                  const Eigen::VectorXd& log_std);

// Environments own contiguous segments of the buffer; `bootstrap` holds the
// value estimate of the state after each segment's last step.
struct RolloutBuffer {
  Eigen::MatrixXd observations;  // raw, kObservationDim x T
  Eigen::MatrixXd actions;       // 12 x T, policy actions (not PD targets)
  Eigen::VectorXd log_probs;
  Eigen::VectorXd rewards;
  Eigen::VectorXd values;
  std::vector<unsigned char> dones;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
  std::vector<int> segment_starts;
  Eigen::VectorXd bootstrap;

  int size() const { return static_cast<int>(rewards.size()); }
};

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

// `values` has T + 1 entries, the last being the bootstrap value.
GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const std::vector<unsigned char>& dones, double gamma, double lambda);
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);
void normalize_advantages(Eigen::VectorXd& advantages);

struct SurrogateGradient {
  MlpParams net;
  Eigen::VectorXd log_std;
  double loss = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

// Gradient of the mean clipped surrogate loss -min(r A, clip(r) A).
SurrogateGradient surrogate_gradient(const GaussianPolicy& policy, const Eigen::MatrixXd& observations,
                                     const Eigen::MatrixXd& actions, const Eigen::VectorXd& old_log_probs,
                                     const Eigen::VectorXd& advantages, double clip_range);

// Gradient of 0.5 * mean((V - R)^2) on normalized inputs.
MlpParams value_gradient(const Mlp& value, const Eigen::MatrixXd& normalized_observations,
                         const Eigen::VectorXd& returns, double* loss = nullptr);

struct PpoOptimizer {
  AdamState policy;
  AdamState log_std;
  AdamState value;

  static PpoOptimizer create(const GaussianPolicy& policy, const Mlp& value, const PpoConfig& config);
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;  // largest pre-clip policy gradient norm
  double clipped_grad_norm = 0.0;  // largest post-clip norm over both networks
  bool aborted = false;
};

// Rescales in place when the global norm exceeds max_norm; returns the norm
// before clipping.
double clip_grad_norm(MlpParams& grads, Eigen::VectorXd* extra, double max_norm);

// Expects advantages and returns already computed; normalizes advantages
// per update. A non-finite loss or gradient restores the parameters and sets
// `aborted`.
PpoStats ppo_update(GaussianPolicy& policy, Mlp& value, PpoOptimizer& optimizer, RolloutBuffer& buffer,
                    const PpoConfig& config, Rng& rng);

struct PolicyLogRow {
  int iteration = 0;
  long steps = 0;
  double mean_reward = 0.0;
  int stage = 0;
  PpoStats stats;
  double log_std_mean = 0.0;
  RewardComponents components;  // per-factor means over the iteration
  int episodes_finished = 0;
};

struct EpisodeRecord {
  long index = 0;
  Task task = Task::kTiltAtStand;
  double difficulty = 1.0;
  int stage = 0;
  DomainParams domain;
  std::uint64_t seed = 0;
};

struct PolicyTrainOptions {
  PpoConfig ppo;
  CurriculumSchedule schedule = CurriculumSchedule::for_state(RobotState::kStand);
  long total_steps = 2'000'000;
  bool randomize = true;
  EnvOptions env;
  double reference_noise = 0.03;  // rad
  double episode_duration = 10.0;  // s
  std::uint64_t seed = 1;
  // Stops once the mean reward over the last `reward_window` iterations
  // reaches this value.
  std::optional<double> stop_reward;
  int reward_window = 10;
  std::function<void(const PolicyLogRow&)> on_iteration;
};

struct PolicyTrainResult {
  GaussianPolicy policy;
  Mlp value;
  std::vector<PolicyLogRow> log;
  std::vector<EpisodeRecord> episodes;
  long steps = 0;
};

PolicyTrainResult train_policy(const QuadrupedModel& model, const PolicyTrainOptions& options);

// Mean of the per-iteration rewards log[end - window, end); -inf while fewer
// than `window` iterations exist.
double trailing_reward(const std::vector<PolicyLogRow>& log, size_t end, int window);

// Environment steps at the end of the first iteration whose trailing mean
// reward over `window` iterations reaches `threshold`.
std::optional<long> steps_to_reward(const std::vector<PolicyLogRow>& log, double threshold, int window = 10);

}  // namespace quadmimic

#endif  // QUADMIMIC_PPO_HPP_
