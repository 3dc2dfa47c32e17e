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

#include "quadmimic/ppo.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

#include "quadmimic/datagen.hpp"

namespace quadmimic {

void PpoConfig::validate() const {
  if (!(clip_range > 0.0)) throw Error(ErrorCode::kInvalidArgument, "clip_range must be > 0");
  if (!(gamma >= 0.0 && gamma < 1.0) || !(gae_lambda >= 0.0 && gae_lambda < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma and lambda must lie in [0, 1)");
  }
  if (!(learning_rate > 0.0) || minibatch < 1 || epochs_per_iter < 1 || rollout_horizon < 1 ||
      num_envs < 1 || hidden < 1 || !(max_grad_norm > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid PPO configuration");
  }
  if (rollout_horizon % num_envs != 0) {
    throw Error(ErrorCode::kInvalidArgument, "rollout_horizon must be a multiple of num_envs");
  }
  if (!(log_std_min < log_std_max) || log_std_init < log_std_min || log_std_init > log_std_max) {
    throw Error(ErrorCode::kInvalidArgument, "log-std bounds must bracket the initial value");
  }
}

nlohmann::json PpoConfig::to_json() const {
  return {{"clip_range", clip_range},       {"learning_rate", learning_rate},
          {"gamma", gamma},                 {"gae_lambda", gae_lambda},
          {"minibatch", minibatch},         {"max_grad_norm", max_grad_norm},
          {"epochs_per_iter", epochs_per_iter}, {"rollout_horizon", rollout_horizon},
          {"num_envs", num_envs},           {"hidden", hidden},
          {"log_std_init", log_std_init},   {"log_std_min", log_std_min},
          {"log_std_max", log_std_max},     {"output_init_scale", output_init_scale},
          {"action_scale", action_scale},   {"reference_offset", reference_offset}};
}

// ---------------------------------------------------------------------------
// Normalizer

RunningNormalizer::RunningNormalizer(int dim)
    : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

void RunningNormalizer::update(const Eigen::MatrixXd& batch) {
  const double n = static_cast<double>(batch.cols());
  if (n == 0.0) return;
  const Eigen::VectorXd bmean = batch.rowwise().mean();
  const Eigen::VectorXd bm2 = (batch.colwise() - bmean).rowwise().squaredNorm();
  const double total = count_ + n;
  const Eigen::VectorXd delta = bmean - mean_;
  mean_ += delta * (n / total);
  m2_ += bm2 + delta.cwiseAbs2() * (count_ * n / total);
  count_ = total;
}

Eigen::VectorXd RunningNormalizer::stddev() const {
  if (count_ < 2.0) return Eigen::VectorXd::Ones(mean_.size());
  return (m2_ / count_).cwiseSqrt().cwiseMax(1e-2);
}

Eigen::MatrixXd RunningNormalizer::apply(const Eigen::MatrixXd& batch) const {
  const Eigen::ArrayXd inv = stddev().cwiseInverse().array();
  Eigen::MatrixXd out = (batch.colwise() - mean_).array().colwise() * inv;
  return out.cwiseMax(-10.0).cwiseMin(10.0);
}

Eigen::VectorXd RunningNormalizer::apply(const Eigen::VectorXd& x) const {
  return apply(Eigen::MatrixXd(x)).col(0);
}

nlohmann::json RunningNormalizer::to_json() const {
  return {{"count", count_}, {"mean", vector_to_json(mean_)}, {"m2", vector_to_json(m2_)}};
}

RunningNormalizer RunningNormalizer::from_json(const nlohmann::json& j) {
  RunningNormalizer n;
  n.count_ = j.at("count").get<double>();
  n.mean_ = vector_from_json(j.at("mean"));
  n.m2_ = vector_from_json(j.at("m2"));
  if (n.mean_.size() != n.m2_.size()) throw Error(ErrorCode::kCorruptFile, "normalizer size mismatch");
  return n;
}

// ---------------------------------------------------------------------------
// Networks

namespace {

MlpSpec trunk_spec(const PpoConfig& c, int outputs) {
  return {kObservationDim,
          {{c.hidden, Activation::kReLU}, {c.hidden, Activation::kReLU}, {outputs, Activation::kLinear}}};
}

constexpr double kLogTwoPi = 1.8378770664093453;

Eigen::MatrixXd reference_joints(const Eigen::MatrixXd& observations) {
  return observations.middleRows(kObsTargetJointsOffset, kNumJoints);
}

}  // namespace

GaussianPolicy::GaussianPolicy(const PpoConfig& config, const JointVector& nominal, Rng& rng)
    : net_(trunk_spec(config, kNumJoints), rng),
      log_std_(Eigen::VectorXd::Constant(kNumJoints, config.log_std_init)),
      normalizer_(kObservationDim),
      action_scale_(config.action_scale),
      reference_offset_(config.reference_offset),
      nominal_(nominal) {
  net_.params().weights.back() *= config.output_init_scale;
}

Mlp make_value_net(const PpoConfig& config, Rng& rng) { return Mlp(trunk_spec(config, 1), rng); }

Eigen::MatrixXd GaussianPolicy::means(const Eigen::MatrixXd& observations) const {
  return net_.forward(normalizer_.apply(observations));
}

Eigen::MatrixXd GaussianPolicy::means(const Eigen::MatrixXd& observations, MlpCache& cache) const {
  return net_.forward(normalizer_.apply(observations), cache);
}

Eigen::MatrixXd GaussianPolicy::targets(const Eigen::MatrixXd& observations,
                                        const Eigen::MatrixXd& actions) const {
  Eigen::MatrixXd out = action_scale_ * actions;
  if (reference_offset_) return out + reference_joints(observations);
  return out.colwise() + nominal_;
}

Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mean,
                                  const Eigen::VectorXd& log_std) {
  const Eigen::ArrayXd inv_std = (-log_std).array().exp();
  const Eigen::ArrayXXd z = (x - mean).array().colwise() * inv_std;
  const double constant = -log_std.sum() - 0.5 * kLogTwoPi * static_cast<double>(log_std.size());
  return (-0.5 * z.square().colwise().sum() + constant).matrix().transpose();
}

Eigen::VectorXd GaussianPolicy::log_probs(const Eigen::MatrixXd& observations,
                                          const Eigen::MatrixXd& actions) const {
  return gaussian_log_prob(actions, means(observations), log_std_);
}

double GaussianPolicy::entropy() const {
  return log_std_.sum() + 0.5 * (1.0 + kLogTwoPi) * static_cast<double>(log_std_.size());
}

JointVector GaussianPolicy::act(const Eigen::VectorXd& observation, Rng& rng) {
  const Eigen::MatrixXd obs(observation);
  Eigen::MatrixXd a = means(obs);
  if (!deterministic_) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int j = 0; j < kNumJoints; ++j) a(j, 0) += std::exp(log_std_[j]) * gauss(rng);
  }
  return targets(obs, a).col(0);
}

void GaussianPolicy::clamp_log_std(double lo, double hi) { log_std_ = log_std_.cwiseMax(lo).cwiseMin(hi); }

Checkpoint GaussianPolicy::to_checkpoint() const {
  Checkpoint c;
  c.net = net_;
  c.metadata = {{"kind", "gaussian_policy"},
                {"log_std", vector_to_json(log_std_)},
                {"normalizer", normalizer_.to_json()},
                {"action_scale", action_scale_},
                {"reference_offset", reference_offset_},
                {"nominal", vector_to_json(nominal_)}};
  return c;
}

GaussianPolicy GaussianPolicy::from_checkpoint(const Checkpoint& c) {
  if (c.metadata.value("kind", "") != "gaussian_policy") {
    throw Error(ErrorCode::kCorruptFile, "checkpoint does not hold a Gaussian policy");
  }
  GaussianPolicy p;
  p.net_ = c.net;
  p.log_std_ = vector_from_json(c.metadata.at("log_std"));
  p.normalizer_ = RunningNormalizer::from_json(c.metadata.at("normalizer"));
  p.action_scale_ = c.metadata.at("action_scale").get<double>();
  p.reference_offset_ = c.metadata.at("reference_offset").get<bool>();
  const Eigen::VectorXd nominal = vector_from_json(c.metadata.at("nominal"));
  if (nominal.size() != kNumJoints) throw Error(ErrorCode::kShapeMismatch, "policy nominal pose size");
  p.nominal_ = nominal;
  if (p.net_.input_size() != kObservationDim || p.net_.output_size() != kNumJoints ||
      p.log_std_.size() != kNumJoints || p.normalizer_.mean().size() != kObservationDim) {
    throw Error(ErrorCode::kShapeMismatch, "policy checkpoint has unexpected dimensions");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Advantages

GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const std::vector<unsigned char>& dones, double gamma, double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n + 1 || static_cast<Eigen::Index>(dones.size()) != n) {
    throw Error(ErrorCode::kShapeMismatch, "GAE expects T rewards, T dones and T + 1 values");
  }
  GaeResult out;
  out.advantages.resize(n);
  double next = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * values[t + 1] * live - values[t];
    next = delta + gamma * lambda * live * next;
    out.advantages[t] = next;
  }
  out.returns = out.advantages + values.head(n);
  return out;
}

void compute_gae(RolloutBuffer& b, double gamma, double lambda) {
  b.advantages.resize(b.size());
  b.returns.resize(b.size());
  for (size_t s = 0; s < b.segment_starts.size(); ++s) {
    const int begin = b.segment_starts[s];
    const int end = s + 1 < b.segment_starts.size() ? b.segment_starts[s + 1] : b.size();
    const int n = end - begin;
    Eigen::VectorXd values(n + 1);
    values << b.values.segment(begin, n), b.bootstrap[static_cast<Eigen::Index>(s)];
    const std::vector<unsigned char> dones(b.dones.begin() + begin, b.dones.begin() + end);
    const GaeResult g = compute_gae(b.rewards.segment(begin, n), values, dones, gamma, lambda);
    b.advantages.segment(begin, n) = g.advantages;
    b.returns.segment(begin, n) = g.returns;
  }
}

void normalize_advantages(Eigen::VectorXd& a) {
  if (a.size() < 2) return;
  const double mean = a.mean();
  const double var = (a.array() - mean).square().mean();
  a = ((a.array() - mean) / (std::sqrt(var) + 1e-8)).matrix();
}

// ---------------------------------------------------------------------------
// Losses

SurrogateGradient surrogate_gradient(const GaussianPolicy& policy, const Eigen::MatrixXd& observations,
                                     const Eigen::MatrixXd& actions, const Eigen::VectorXd& old_log_probs,
                                     const Eigen::VectorXd& advantages, double clip_range) {
  const Eigen::Index n = observations.cols();
  MlpCache cache;
  const Eigen::MatrixXd mu = policy.means(observations, cache);
  const Eigen::VectorXd& log_std = policy.log_std();
  const Eigen::VectorXd logp = gaussian_log_prob(actions, mu, log_std);
  const Eigen::ArrayXd inv_var = (-2.0 * log_std).array().exp();

  SurrogateGradient g;
  Eigen::MatrixXd mean_grad = Eigen::MatrixXd::Zero(kNumJoints, n);
  g.log_std = Eigen::VectorXd::Zero(log_std.size());
  int clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ratio = std::exp(logp[i] - old_log_probs[i]);
    const double a = advantages[i];
    const double unclipped = ratio * a;
    const double bounded = std::clamp(ratio, 1.0 - clip_range, 1.0 + clip_range) * a;
    g.loss -= std::min(unclipped, bounded);
    g.approx_kl += old_log_probs[i] - logp[i];
    // The clipped branch is flat in the parameters.
    if (bounded < unclipped) {
      ++clipped;
      continue;
    }
    const double dl_dlogp = -a * ratio / static_cast<double>(n);
    const Eigen::ArrayXd diff = (actions.col(i) - mu.col(i)).array();
    mean_grad.col(i) = (dl_dlogp * diff * inv_var).matrix();
    g.log_std += (dl_dlogp * (diff.square() * inv_var - 1.0)).matrix();
  }
  g.loss /= static_cast<double>(n);
  g.approx_kl /= static_cast<double>(n);
  g.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);
  g.net = policy.net().backward(cache, mean_grad);
  return g;
}

MlpParams value_gradient(const Mlp& value, const Eigen::MatrixXd& normalized_observations,
                         const Eigen::VectorXd& returns, double* loss) {
  MlpCache cache;
  const Eigen::RowVectorXd v = value.forward(normalized_observations, cache).row(0);
  const Eigen::RowVectorXd err = v - returns.transpose();
  const double n = static_cast<double>(returns.size());
  if (loss) *loss = 0.5 * err.squaredNorm() / n;
  return value.backward(cache, err / n);
}

double clip_grad_norm(MlpParams& grads, Eigen::VectorXd* extra, double max_norm) {
  double sq = grads.squared_norm();
  if (extra) sq += extra->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    grads.scale(s);
    if (extra) *extra *= s;
  }
  return norm;
}

PpoOptimizer PpoOptimizer::create(const GaussianPolicy& policy, const Mlp& value, const PpoConfig& config) {
  const AdamOptions adam{config.learning_rate, 0.9, 0.999, 1e-8};
  PpoOptimizer o;
  o.policy = AdamState::for_spec(policy.net().spec(), adam);
  o.value = AdamState::for_spec(value.spec(), adam);
  o.log_std.options = adam;
  o.log_std.m.weights = {Eigen::MatrixXd(0, 0)};
  o.log_std.m.biases = {Eigen::VectorXd::Zero(policy.log_std().size())};
  o.log_std.v = o.log_std.m;
  return o;
}

namespace {

MlpParams wrap(const Eigen::VectorXd& v) {
  MlpParams p;
  p.weights = {Eigen::MatrixXd(0, 0)};
  p.biases = {v};
  return p;
}

}  // namespace

PpoStats ppo_update(GaussianPolicy& policy, Mlp& value, PpoOptimizer& opt, RolloutBuffer& buffer,
                    const PpoConfig& config, Rng& rng) {
  PpoStats stats;
  const int n = buffer.size();
  if (n == 0) return stats;
  normalize_advantages(buffer.advantages);

  const GaussianPolicy policy_backup = policy;
  const Mlp value_backup = value;
  const PpoOptimizer opt_backup = opt;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const int mb = std::min(config.minibatch, n);
  int updates = 0;
  for (int epoch = 0; epoch < config.epochs_per_iter; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start + mb <= n; start += mb) {
      Eigen::MatrixXd obs(kObservationDim, mb), act(kNumJoints, mb);
      Eigen::VectorXd old_logp(mb), adv(mb), ret(mb);
      for (int k = 0; k < mb; ++k) {
        const int i = order[start + k];
        obs.col(k) = buffer.observations.col(i);
        act.col(k) = buffer.actions.col(i);
        old_logp[k] = buffer.log_probs[i];
        adv[k] = buffer.advantages[i];
        ret[k] = buffer.returns[i];
      }
      SurrogateGradient g = surrogate_gradient(policy, obs, act, old_logp, adv, config.clip_range);
      double vloss = 0.0;
      MlpParams vgrad = value_gradient(value, policy.normalizer().apply(obs), ret, &vloss);

      const bool finite = std::isfinite(g.loss) && std::isfinite(vloss) && g.net.all_finite() &&
                          g.log_std.allFinite() && vgrad.all_finite();
      if (!finite) {
        policy = policy_backup;
        value = value_backup;
        opt = opt_backup;
        stats.aborted = true;
        return stats;
      }
      const double pnorm = clip_grad_norm(g.net, &g.log_std, config.max_grad_norm);
      clip_grad_norm(vgrad, nullptr, config.max_grad_norm);
      stats.grad_norm = std::max(stats.grad_norm, pnorm);
      stats.clipped_grad_norm = std::max(
          {stats.clipped_grad_norm, std::sqrt(g.net.squared_norm() + g.log_std.squaredNorm()),
           std::sqrt(vgrad.squared_norm())});

      adam_step(policy.net().params(), g.net, opt.policy);
      MlpParams ls = wrap(policy.log_std());
      adam_step(ls, wrap(g.log_std), opt.log_std);
      policy.log_std() = ls.biases[0];
      policy.clamp_log_std(config.log_std_min, config.log_std_max);
      adam_step(value.params(), vgrad, opt.value);

      stats.policy_loss += g.loss;
      stats.value_loss += vloss;
      stats.approx_kl += g.approx_kl;
      stats.clip_fraction += g.clip_fraction;
      ++updates;
    }
  }
  if (updates > 0) {
    stats.policy_loss /= updates;
    stats.value_loss /= updates;
    stats.approx_kl /= updates;
    stats.clip_fraction /= updates;
  }
  stats.entropy = policy.entropy();
  return stats;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

struct EnvSlot {
  ImitationEnv env;
  Eigen::VectorXd obs;
  long episodes = 0;
};

}  // namespace

double trailing_reward(const std::vector<PolicyLogRow>& log, size_t end, int window) {
  const size_t w = static_cast<size_t>(std::max(window, 1));
  if (end < w) return -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (size_t i = end - w; i < end; ++i) sum += log[i].mean_reward;
  return sum / static_cast<double>(w);
}

std::optional<long> steps_to_reward(const std::vector<PolicyLogRow>& log, double threshold, int window) {
  for (size_t i = 0; i < log.size(); ++i) {
    if (trailing_reward(log, i + 1, window) >= threshold) return log[i].steps;
  }
  return std::nullopt;
}

PolicyTrainResult train_policy(const QuadrupedModel& model, const PolicyTrainOptions& options) {
  const PpoConfig& cfg = options.ppo;
  cfg.validate();
  options.schedule.validate();
  if (options.total_steps < 0) throw Error(ErrorCode::kInvalidArgument, "total_steps must be >= 0");

  Rng init_rng(derive_seed(options.seed, 0x9010));
  PolicyTrainResult result;
  const RobotState state = state_of(options.schedule.stages.front().tasks.front());
  result.policy = GaussianPolicy(cfg, canonical_pose(model, state).joints, init_rng);
  result.value = make_value_net(cfg, init_rng);
  if (options.total_steps == 0) return result;

  GaussianPolicy& policy = result.policy;
  Mlp& value = result.value;
  PpoOptimizer opt = PpoOptimizer::create(policy, value, cfg);
  Rng update_rng(derive_seed(options.seed, 0x9011));
  Rng action_rng(derive_seed(options.seed, 0x9012));
  CurriculumProgress progress;

  EnvOptions env_options = options.env;
  env_options.max_duration = options.episode_duration;
  std::vector<EnvSlot> slots;
  for (int e = 0; e < cfg.num_envs; ++e) slots.push_back({ImitationEnv(model, env_options), {}, 0});

  long episode_counter = 0;
  auto start_episode = [&](int e) {
    EnvSlot& slot = slots[e];
    const std::uint64_t seed = derive_seed(options.seed, static_cast<std::uint64_t>(e) + 1,
                                           static_cast<std::uint64_t>(slot.episodes++));
    Rng rng(seed);
    const CurriculumStage& stage = options.schedule.stages[progress.stage];
    const Task task = stage.tasks[std::uniform_int_distribution<size_t>(0, stage.tasks.size() - 1)(rng)];
    const DomainParams domain = options.randomize ? sample_domain(stage.dr_scale, rng) : DomainParams{};
    MotionClip reference = gen_task_motion(model, {task, stage.difficulty}, options.episode_duration, rng);
    reference = inject_noise(reference, options.reference_noise, rng);
    slot.obs = slot.env.reset(std::move(reference), domain, rng());
    result.episodes.push_back({episode_counter++, task, stage.difficulty, progress.stage, domain, seed});
  };
  for (int e = 0; e < cfg.num_envs; ++e) start_episode(e);

  const int per_env = cfg.rollout_horizon / cfg.num_envs;
  int iteration = 0;
  while (result.steps < options.total_steps) {
    RolloutBuffer buf;
    const int total = cfg.rollout_horizon;
    buf.observations.resize(kObservationDim, total);
    buf.actions.resize(kNumJoints, total);
    buf.log_probs.resize(total);
    buf.rewards.resize(total);
    buf.dones.assign(total, 0);
    buf.bootstrap.resize(cfg.num_envs);
    for (int e = 0; e < cfg.num_envs; ++e) buf.segment_starts.push_back(e * per_env);

    PolicyLogRow row;
    Eigen::Array<double, 6, 1> comp = Eigen::Array<double, 6, 1>::Zero();
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Eigen::ArrayXd std_dev = policy.log_std().array().exp();
    for (int t = 0; t < per_env; ++t) {
      Eigen::MatrixXd obs(kObservationDim, cfg.num_envs);
      for (int e = 0; e < cfg.num_envs; ++e) obs.col(e) = slots[e].obs;
      const Eigen::MatrixXd mu = policy.means(obs);
      Eigen::MatrixXd act = mu;
      for (int e = 0; e < cfg.num_envs; ++e) {
        for (int j = 0; j < kNumJoints; ++j) act(j, e) += std_dev[j] * gauss(action_rng);
      }
      const Eigen::VectorXd logp = gaussian_log_prob(act, mu, policy.log_std());
      for (int e = 0; e < cfg.num_envs; ++e) {
        const int i = e * per_env + t;
        buf.observations.col(i) = obs.col(e);
        buf.actions.col(i) = act.col(e);
        buf.log_probs[i] = logp[e];
        const StepResult s = slots[e].env.step(policy.targets(obs.col(e), act.col(e)).col(0));
        buf.rewards[i] = s.reward.total;
        comp += Eigen::Array<double, 6, 1>(s.reward.joint, s.reward.end_effector, s.reward.root_position,
                                           s.reward.root_orientation, s.reward.support,
                                           s.reward.acceleration);
        slots[e].obs = s.observation;
        if (s.done) {
          buf.dones[i] = 1;
          ++row.episodes_finished;
          start_episode(e);
        }
      }
    }
    result.steps += total;

    // Values are evaluated after the rollout with the statistics that also
    // feed the update.
    policy.normalizer().update(buf.observations);
    buf.log_probs = policy.log_probs(buf.observations, buf.actions);
    buf.values = value.forward(policy.normalizer().apply(buf.observations)).row(0).transpose();
    Eigen::MatrixXd last(kObservationDim, cfg.num_envs);
    for (int e = 0; e < cfg.num_envs; ++e) last.col(e) = slots[e].obs;
    buf.bootstrap = value.forward(policy.normalizer().apply(last)).row(0).transpose();
    compute_gae(buf, cfg.gamma, cfg.gae_lambda);

    row.iteration = iteration++;
    row.steps = result.steps;
    row.mean_reward = buf.rewards.mean();
    row.stage = progress.stage;
    comp /= static_cast<double>(total);
    row.components = {comp[0], comp[1], comp[2], comp[3], comp[4], comp[5], row.mean_reward};

    row.stats = ppo_update(policy, value, opt, buf, cfg, update_rng);
    if (row.stats.aborted) {
      throw Error(ErrorCode::kNumericFailure,
                  "non-finite PPO update at iteration " + std::to_string(row.iteration));
    }
    row.log_std_mean = policy.log_std().mean();
    curriculum_update(options.schedule, progress, row.mean_reward);
    result.log.push_back(row);
    if (options.on_iteration) options.on_iteration(row);
    if (options.stop_reward &&
        trailing_reward(result.log, result.log.size(), options.reward_window) >= *options.stop_reward) {
      break;
    }
  }
  return result;
}

}  // namespace quadmimic
