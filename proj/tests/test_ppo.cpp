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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "quadmimic/curriculum.hpp"
#include "quadmimic/ppo.hpp"
#include "test_util.hpp"

namespace quadmimic {
namespace {

template <typename Fn>
void expect_error(ErrorCode code, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

Eigen::MatrixXd gaussian(int rows, int cols, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = g(rng);
  return m;
}

PpoConfig small_config() {
  PpoConfig c;
  c.hidden = 16;
  return c;
}

TEST(Gae, HandComputedTwoStepExample) {
  const GaeResult g = compute_gae(Eigen::Vector2d(1.0, 1.0), Eigen::Vector3d::Zero(), {0, 0}, 0.95, 0.95);
  EXPECT_NEAR(g.advantages[0], 1.9025, 1e-12);
  EXPECT_NEAR(g.advantages[1], 1.0, 1e-12);
  EXPECT_NEAR(g.returns[0], 1.9025, 1e-12);
  EXPECT_NEAR(g.returns[1], 1.0, 1e-12);
}

TEST(Gae, DoneTruncatesAtThatStep) {
  const Eigen::Vector3d r(0.5, 2.0, -1.0);
  const Eigen::Vector4d v(0.3, 0.7, -0.2, 5.0);
  const GaeResult g = compute_gae(r, v, {1, 0, 0}, 0.95, 0.95);
  EXPECT_NEAR(g.advantages[0], 0.5 - 0.3, 1e-15);
}

TEST(Gae, LambdaZeroIsTdError) {
  Rng rng(1);
  const Eigen::VectorXd r = gaussian(50, 1, rng), v = gaussian(51, 1, rng);
  std::vector<unsigned char> dones(50, 0);
  dones[17] = dones[33] = 1;
  const GaeResult g = compute_gae(r, v, dones, 0.95, 0.0);
  for (int t = 0; t < 50; ++t) {
    const double delta = r[t] + 0.95 * v[t + 1] * (dones[t] ? 0.0 : 1.0) - v[t];
    EXPECT_NEAR(g.advantages[t], delta, 1e-15);
  }
}

// Discounted sum of rewards until the episode ends, bootstrapping from the
// final value when the buffer ends first.
double brute_force_return(const Eigen::VectorXd& r, const Eigen::VectorXd& v,
                          const std::vector<unsigned char>& dones, int t, double gamma) {
  double total = 0.0, discount = 1.0;
  for (int k = t; k < r.size(); ++k) {
    total += discount * r[k];
    discount *= gamma;
    if (dones[k]) return total;
  }
  return total + discount * v[r.size()];
}

TEST(Gae, LambdaOneMatchesBruteForce) {
  Rng rng(2);
  std::bernoulli_distribution done(0.1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + trial;
    const Eigen::VectorXd r = gaussian(n, 1, rng), v = gaussian(n + 1, 1, rng);
    std::vector<unsigned char> dones(n);
    for (auto& d : dones) d = done(rng);
    for (double gamma : {1.0, 0.95}) {
      const GaeResult g = compute_gae(r, v, dones, gamma, 1.0);
      for (int t = 0; t < n; ++t) {
        EXPECT_NEAR(g.returns[t], brute_force_return(r, v, dones, t, gamma), 1e-10);
        EXPECT_NEAR(g.advantages[t], brute_force_return(r, v, dones, t, gamma) - v[t], 1e-10);
      }
    }
    // gamma = lambda = 1 with V = 0: plain reward-to-go.
    const GaeResult z = compute_gae(r, Eigen::VectorXd::Zero(n + 1), dones, 1.0, 1.0);
    for (int t = 0; t < n; ++t) {
      double sum = 0.0;
      for (int k = t; k < n; ++k) {
        sum += r[k];
        if (dones[k]) break;
      }
      EXPECT_NEAR(z.advantages[t], sum, 1e-10);
    }
  }
}

TEST(Gae, ShapeErrorsAndNormalization) {
  expect_error(ErrorCode::kShapeMismatch, [] { compute_gae(Eigen::Vector2d::Ones(), Eigen::Vector2d::Ones(), {0, 0}, 0.9, 0.9); });
  Rng rng(3);
  Eigen::VectorXd a = gaussian(200, 1, rng, 4.0).array() + 3.0;
  normalize_advantages(a);
  EXPECT_NEAR(a.mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(a.array().square().mean()), 1.0, 1e-6);
}

struct Batch {
  Eigen::MatrixXd obs, actions;
  Eigen::VectorXd old_logp, adv;
};

Batch sample_batch(const GaussianPolicy& policy, int n, Rng& rng) {
  Batch b;
  b.obs = gaussian(kObservationDim, n, rng);
  b.actions = policy.means(b.obs) + gaussian(kNumJoints, n, rng, std::exp(policy.log_std()[0]));
  b.old_logp = policy.log_probs(b.obs, b.actions);
  b.adv = gaussian(n, 1, rng);
  return b;
}

TEST(Surrogate, RatioOneEqualsPolicyGradient) {
  Rng rng(4);
  GaussianPolicy policy(small_config(), JointVector::Zero(), rng);
  const Batch b = sample_batch(policy, 32, rng);
  const SurrogateGradient g = surrogate_gradient(policy, b.obs, b.actions, b.old_logp, b.adv, 0.2);
  EXPECT_EQ(g.clip_fraction, 0.0);
  EXPECT_NEAR(g.approx_kl, 0.0, 1e-15);

  // -mean(A grad log pi) assembled directly from the Gaussian score.
  MlpCache cache;
  const Eigen::MatrixXd mu = policy.means(b.obs, cache);
  const Eigen::ArrayXd inv_var = (-2.0 * policy.log_std()).array().exp();
  Eigen::MatrixXd dmu(kNumJoints, 32);
  Eigen::VectorXd dlogstd = Eigen::VectorXd::Zero(kNumJoints);
  for (int i = 0; i < 32; ++i) {
    const Eigen::ArrayXd diff = (b.actions.col(i) - mu.col(i)).array();
    dmu.col(i) = (-b.adv[i] / 32.0 * diff * inv_var).matrix();
    dlogstd += (-b.adv[i] / 32.0 * (diff.square() * inv_var - 1.0)).matrix();
  }
  const MlpParams expected = policy.net().backward(cache, dmu);
  for (size_t k = 0; k < expected.weights.size(); ++k) {
    EXPECT_LT((g.net.weights[k] - expected.weights[k]).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((g.net.biases[k] - expected.biases[k]).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_LT((g.log_std - dlogstd).cwiseAbs().maxCoeff(), 1e-10);
}

double surrogate_loss(const GaussianPolicy& p, const Batch& b, double clip) {
  const Eigen::VectorXd logp = p.log_probs(b.obs, b.actions);
  double loss = 0.0;
  for (int i = 0; i < b.adv.size(); ++i) {
    const double ratio = std::exp(logp[i] - b.old_logp[i]);
    loss -= std::min(ratio * b.adv[i], std::clamp(ratio, 1.0 - clip, 1.0 + clip) * b.adv[i]);
  }
  return loss / static_cast<double>(b.adv.size());
}

TEST(Surrogate, GradientMatchesCentralDifferencesOffPolicy) {
  Rng rng(5);
  GaussianPolicy policy(small_config(), JointVector::Zero(), rng);
  policy.net().params().weights.back() *= 30.0;  // undo the small init so means matter
  Batch b = sample_batch(policy, 16, rng);
  // Perturb the old log-probs so some ratios sit away from 1 but inside the clip.
  b.old_logp.array() += gaussian(16, 1, rng, 0.05).array();
  const SurrogateGradient g = surrogate_gradient(policy, b.obs, b.actions, b.old_logp, b.adv, 0.2);
  const double eps = 1e-6;
  double worst = 0.0;
  auto compare = [&](double analytic, double numeric) {
    worst = std::max(worst, std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)}));
  };
  GaussianPolicy probe = policy;
  for (size_t k = 0; k < g.net.weights.size(); ++k) {
    for (Eigen::Index i = 0; i < g.net.weights[k].size(); i += 7) {
      double& p = probe.net().params().weights[k](i);
      const double orig = p;
      p = orig + eps;
      const double up = surrogate_loss(probe, b, 0.2);
      p = orig - eps;
      const double down = surrogate_loss(probe, b, 0.2);
      p = orig;
      compare(g.net.weights[k](i), (up - down) / (2.0 * eps));
    }
  }
  for (int j = 0; j < kNumJoints; ++j) {
    double& p = probe.log_std()[j];
    const double orig = p;
    p = orig + eps;
    const double up = surrogate_loss(probe, b, 0.2);
    p = orig - eps;
    const double down = surrogate_loss(probe, b, 0.2);
    p = orig;
    compare(g.log_std[j], (up - down) / (2.0 * eps));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(ValueGradient, MatchesCentralDifferences) {
  Rng rng(6);
  const Mlp value = make_value_net(small_config(), rng);
  const Eigen::MatrixXd x = gaussian(kObservationDim, 8, rng);
  const Eigen::VectorXd ret = gaussian(8, 1, rng);
  const MlpParams g = value_gradient(value, x, ret);
  auto loss = [&](const Mlp& v) {
    double l = 0.0;
    value_gradient(v, x, ret, &l);
    return l;
  };
  Mlp probe = value;
  const double eps = 1e-6;
  double worst = 0.0;
  for (size_t k = 0; k < g.weights.size(); ++k) {
    for (Eigen::Index i = 0; i < g.weights[k].size(); i += 5) {
      double& p = probe.params().weights[k](i);
      const double orig = p;
      p = orig + eps;
      const double up = loss(probe);
      p = orig - eps;
      const double down = loss(probe);
      p = orig;
      const double numeric = (up - down) / (2.0 * eps);
      worst = std::max(worst, std::abs(g.weights[k](i) - numeric) / std::max({1.0, std::abs(numeric)}));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

RolloutBuffer buffer_from(const GaussianPolicy& policy, const Batch& b) {
  RolloutBuffer buf;
  buf.observations = b.obs;
  buf.actions = b.actions;
  buf.log_probs = policy.log_probs(b.obs, b.actions);
  buf.advantages = b.adv;
  buf.returns = b.adv;
  buf.values = Eigen::VectorXd::Zero(b.adv.size());
  buf.rewards = b.adv;
  buf.dones.assign(static_cast<size_t>(b.adv.size()), 0);
  return buf;
}

TEST(PpoUpdate, PositiveAdvantageRaisesLogProb) {
  Rng rng(7);
  PpoConfig config = small_config();
  config.learning_rate = 1e-3;
  GaussianPolicy policy(config, JointVector::Zero(), rng);
  Mlp value = make_value_net(config, rng);
  PpoOptimizer opt = PpoOptimizer::create(policy, value, config);
  Batch b = sample_batch(policy, 1, rng);
  b.adv << 1.0;
  RolloutBuffer buf = buffer_from(policy, b);
  const double before = policy.log_probs(b.obs, b.actions)[0];
  const PpoStats stats = ppo_update(policy, value, opt, buf, config, rng);
  EXPECT_FALSE(stats.aborted);
  EXPECT_GT(policy.log_probs(b.obs, b.actions)[0], before);
}

TEST(PpoUpdate, ClippedGradientNormBound) {
  Rng rng(8);
  PpoConfig config = small_config();
  GaussianPolicy policy(config, JointVector::Zero(), rng);
  Mlp value = make_value_net(config, rng);
  PpoOptimizer opt = PpoOptimizer::create(policy, value, config);
  Batch b = sample_batch(policy, 256, rng);
  RolloutBuffer buf = buffer_from(policy, b);
  buf.returns *= 1000.0;
  const PpoStats stats = ppo_update(policy, value, opt, buf, config, rng);
  EXPECT_GT(stats.grad_norm, 0.5);
  EXPECT_LE(stats.clipped_grad_norm, 0.5 + 1e-9);

  MlpParams g = MlpParams::zeros_like(policy.net().spec());
  g.weights[0].setConstant(3.0);
  Eigen::VectorXd extra = Eigen::VectorXd::Constant(12, -2.0);
  const double norm = clip_grad_norm(g, &extra, 0.5);
  EXPECT_GT(norm, 0.5);
  EXPECT_NEAR(std::sqrt(g.squared_norm() + extra.squaredNorm()), 0.5, 1e-12);
}

TEST(PpoUpdate, NonFiniteBatchIsRejected) {
  Rng rng(9);
  PpoConfig config = small_config();
  GaussianPolicy policy(config, JointVector::Zero(), rng);
  Mlp value = make_value_net(config, rng);
  PpoOptimizer opt = PpoOptimizer::create(policy, value, config);
  Batch b = sample_batch(policy, 128, rng);
  RolloutBuffer buf = buffer_from(policy, b);
  buf.returns[5] = std::numeric_limits<double>::quiet_NaN();
  const GaussianPolicy before = policy;
  const PpoStats stats = ppo_update(policy, value, opt, buf, config, rng);
  EXPECT_TRUE(stats.aborted);
  EXPECT_EQ(policy.net().params().weights[0], before.net().params().weights[0]);
  EXPECT_EQ(opt.policy.step, 0);
}

TEST(PpoUpdate, LogStdStaysInBounds) {
  Rng rng(10);
  PpoConfig config = small_config();
  config.learning_rate = 0.5;
  GaussianPolicy policy(config, JointVector::Zero(), rng);
  Mlp value = make_value_net(config, rng);
  PpoOptimizer opt = PpoOptimizer::create(policy, value, config);
  for (int round = 0; round < 5; ++round) {
    Batch b = sample_batch(policy, 128, rng);
    b.adv = (b.actions - policy.means(b.obs)).colwise().squaredNorm().transpose();  // favours wide actions
    RolloutBuffer buf = buffer_from(policy, b);
    ppo_update(policy, value, opt, buf, config, rng);
    EXPECT_GE(policy.log_std().minCoeff(), config.log_std_min);
    EXPECT_LE(policy.log_std().maxCoeff(), config.log_std_max);
    EXPECT_TRUE(std::isfinite(policy.entropy()));
  }
  policy.log_std().setConstant(-9.0);
  policy.clamp_log_std(-4.0, 1.0);
  EXPECT_EQ(policy.log_std(), Eigen::VectorXd::Constant(12, -4.0));
}

TEST(Normalizer, MergedStatisticsMatchConcatenation) {
  Rng rng(11);
  const Eigen::MatrixXd a = gaussian(3, 40, rng, 2.0), b = gaussian(3, 25, rng, 0.5).array() + 4.0;
  RunningNormalizer n(3);
  n.update(a);
  n.update(b);
  Eigen::MatrixXd all(3, 65);
  all << a, b;
  const Eigen::VectorXd mean = all.rowwise().mean();
  const Eigen::VectorXd sd = ((all.colwise() - mean).rowwise().squaredNorm() / 65.0).cwiseSqrt();
  EXPECT_EQ(n.count(), 65.0);
  EXPECT_LT((n.mean() - mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((n.stddev() - sd).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::VectorXd x = all.col(7);
  EXPECT_LT((n.apply(x) - ((x - mean).array() / sd.array()).matrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(RunningNormalizer::from_json(n.to_json()).mean(), n.mean());
}

TEST(Policy, TargetsAndCheckpoint) {
  Rng rng(12);
  PpoConfig config = small_config();
  JointVector nominal;
  nominal.setLinSpaced(-1.0, 1.0);
  GaussianPolicy policy(config, nominal, rng);
  const Eigen::MatrixXd obs = gaussian(kObservationDim, 2, rng);
  const Eigen::MatrixXd act = gaussian(kNumJoints, 2, rng);
  const Eigen::MatrixXd t = policy.targets(obs, act);
  EXPECT_LT((t.col(1) - (nominal + 0.15 * act.col(1))).cwiseAbs().maxCoeff(), 1e-15);

  config.reference_offset = true;
  GaussianPolicy offset(config, nominal, rng);
  const Eigen::MatrixXd t2 = offset.targets(obs, act);
  EXPECT_LT((t2.col(0) - (obs.col(0).segment<kNumJoints>(kObsTargetJointsOffset) + 0.15 * act.col(0))).cwiseAbs().maxCoeff(),
            1e-15);

  policy.normalizer().update(obs);
  const GaussianPolicy back = GaussianPolicy::from_checkpoint(policy.to_checkpoint());
  EXPECT_EQ(back.means(obs), policy.means(obs));
  EXPECT_EQ(back.log_std(), policy.log_std());
  EXPECT_EQ(back.nominal(), nominal);
  Checkpoint wrong = policy.to_checkpoint();
  wrong.metadata["kind"] = "value";
  expect_error(ErrorCode::kCorruptFile, [&] { GaussianPolicy::from_checkpoint(wrong); });
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(PpoConfig{}.validate());
  PpoConfig c;
  c.clip_range = 0.0;
  expect_error(ErrorCode::kInvalidArgument, [&] { c.validate(); });
  c = {};
  c.gamma = 1.0;
  expect_error(ErrorCode::kInvalidArgument, [&] { c.validate(); });
  c = {};
  c.rollout_horizon = 100;
  expect_error(ErrorCode::kInvalidArgument, [&] { c.validate(); });
  c = {};
  c.log_std_init = 2.0;
  expect_error(ErrorCode::kInvalidArgument, [&] { c.validate(); });
}

PolicyTrainOptions quick_options() {
  PolicyTrainOptions o;
  o.ppo.hidden = 32;
  o.ppo.num_envs = 4;
  o.ppo.rollout_horizon = 256;
  o.ppo.minibatch = 64;
  o.total_steps = 512;
  o.episode_duration = 2.0;
  o.seed = 5;
  return o;
}

TEST(Train, ZeroStepsReturnsInitialPolicy) {
  PolicyTrainOptions o = quick_options();
  o.total_steps = 0;
  const PolicyTrainResult r = train_policy(QuadrupedModel::a1_like(), o);
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(r.steps, 0);
  EXPECT_EQ(r.policy.log_std(), Eigen::VectorXd::Constant(12, -1.0));
  o.total_steps = -1;
  expect_error(ErrorCode::kInvalidArgument, [&] { train_policy(QuadrupedModel::a1_like(), o); });
}

TEST(Train, DeterministicGivenSeed) {
  const auto model = QuadrupedModel::a1_like();
  const PolicyTrainResult a = train_policy(model, quick_options());
  const PolicyTrainResult b = train_policy(model, quick_options());
  ASSERT_EQ(a.log.size(), 2u);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].mean_reward, b.log[i].mean_reward);
    EXPECT_EQ(a.log[i].stats.policy_loss, b.log[i].stats.policy_loss);
    EXPECT_EQ(a.log[i].steps, 256 * static_cast<long>(i + 1));
  }
  EXPECT_EQ(a.policy.net().params().weights[1], b.policy.net().params().weights[1]);
  ASSERT_EQ(a.episodes.size(), b.episodes.size());
  for (size_t i = 0; i < a.episodes.size(); ++i) {
    EXPECT_EQ(a.episodes[i].seed, b.episodes[i].seed);
    EXPECT_EQ(a.episodes[i].domain, b.episodes[i].domain);
    // Stage 0 of the Stand schedule runs without randomization.
    EXPECT_EQ(a.episodes[i].domain, DomainParams{});
  }
}

TEST(Train, StepsToRewardUsesTrailingMean) {
  std::vector<PolicyLogRow> log;
  const double rewards[] = {0.2, 0.9, 0.9, 0.5, 0.8, 0.8, 0.8};
  for (int i = 0; i < 7; ++i) {
    PolicyLogRow row;
    row.iteration = i;
    row.steps = 100 * (i + 1);
    row.mean_reward = rewards[i];
    log.push_back(row);
  }
  EXPECT_EQ(steps_to_reward(log, 0.7, 1), 200);
  // Windows of three: 0.667, 0.767, 0.733, 0.7, 0.8.
  EXPECT_EQ(steps_to_reward(log, 0.7, 3), 400);
  EXPECT_EQ(steps_to_reward(log, 0.75, 3), 400);
  EXPECT_EQ(steps_to_reward(log, 0.8, 3), 700);
  EXPECT_FALSE(steps_to_reward(log, 0.7, 10).has_value());
  EXPECT_NEAR(trailing_reward(log, 7, 7), 4.9 / 7.0, 1e-15);
  EXPECT_EQ(trailing_reward(log, 2, 3), -std::numeric_limits<double>::infinity());
}

TEST(Curriculum, DefaultSchedulesValidate) {
  for (RobotState s : kAllRobotStates) {
    const CurriculumSchedule c = CurriculumSchedule::for_state(s);
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.stages.size(), 5u);
    EXPECT_EQ(c.stages.front().dr_scale, 0.0);
    EXPECT_EQ(c.stages.back().dr_scale, 1.0);
    EXPECT_EQ(c.final_only().stages.size(), 1u);
    for (const auto& stage : c.without_randomization().stages) EXPECT_EQ(stage.dr_scale, 0.0);
  }
  EXPECT_EQ(CurriculumSchedule::for_state(RobotState::kWalk).stages.back().tasks.size(), 3u);
}

TEST(Curriculum, ValidationRejectsBadOrderings) {
  CurriculumSchedule c = CurriculumSchedule::for_state(RobotState::kStand);
  CurriculumSchedule bad = c;
  std::swap(bad.stages[0], bad.stages[3]);  // shrinking task set
  expect_error(ErrorCode::kInvalidArgument, [&] { bad.validate(); });
  bad = c;
  bad.stages[1].difficulty = 0.1;  // easier than stage 0 with the same tasks
  expect_error(ErrorCode::kInvalidArgument, [&] { bad.validate(); });
  bad = c;
  bad.stages[2].dr_scale = 0.1;
  expect_error(ErrorCode::kInvalidArgument, [&] { bad.validate(); });
  bad = c;
  bad.stages[0].tasks.clear();
  expect_error(ErrorCode::kEmptyTasks, [&] { bad.validate(); });
  bad.stages.clear();
  expect_error(ErrorCode::kInvalidArgument, [&] { bad.validate(); });
}

TEST(Curriculum, AdvancesAfterPatienceAndNeverRegresses) {
  const CurriculumSchedule c = CurriculumSchedule::for_state(RobotState::kStand);
  CurriculumProgress p;
  for (int i = 0; i < 19; ++i) EXPECT_EQ(curriculum_update(c, p, 0.7), 0);
  EXPECT_EQ(curriculum_update(c, p, 0.6), 0);  // not strictly above: streak resets
  for (int i = 0; i < 19; ++i) EXPECT_EQ(curriculum_update(c, p, 0.9), 0);
  EXPECT_EQ(curriculum_update(c, p, 0.9), 1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(curriculum_update(c, p, 0.0), 1);

  Rng rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CurriculumProgress q;
  int prev = 0;
  for (int i = 0; i < 5000; ++i) {
    const int stage = curriculum_update(c, q, u(rng) < 0.97 ? 0.8 : 0.1);
    EXPECT_GE(stage, prev);
    EXPECT_LE(stage, 4);
    prev = stage;
  }
  EXPECT_EQ(prev, 4);

  CurriculumProgress never;
  for (int i = 0; i < 1000; ++i) curriculum_update(c, never, 0.59);
  EXPECT_EQ(never.stage, 0);
}

}  // namespace
}  // namespace quadmimic
