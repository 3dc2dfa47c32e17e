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

#include <benchmark/benchmark.h>

#include "quadmimic/datagen.hpp"
#include "quadmimic/imitation.hpp"
#include "quadmimic/ppo.hpp"
#include "quadmimic/retarget.hpp"

namespace quadmimic {
namespace {

Eigen::MatrixXd gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = g(rng);
  return m;
}

void BM_ForwardKinematics(benchmark::State& state) {
  const auto model = QuadrupedModel::a1_like();
  const Pose pose = canonical_pose(model, RobotState::kStand);
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics(model, pose));
}
BENCHMARK(BM_ForwardKinematics);

void BM_LegIk(benchmark::State& state) {
  const auto model = QuadrupedModel::a1_like();
  const Pose pose = canonical_pose(model, RobotState::kStand);
  const Vec3 target = forward_kinematics(model, pose).world[0] + Vec3(0.03, 0.02, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(solve_leg_ik(model, pose, 0, target));
}
BENCHMARK(BM_LegIk);

void BM_RetargetNetForwardBackward(benchmark::State& state) {
  Rng rng(1);
  const Mlp net(RetargetNet::default_spec(), rng);
  const Eigen::MatrixXd x = gaussian(RetargetNet::kInputDim, static_cast<int>(state.range(0)), rng);
  const Eigen::MatrixXd g = gaussian(RetargetNet::kOutputDim, static_cast<int>(state.range(0)), rng);
  MlpCache cache;
  for (auto _ : state) {
    net.forward(x, cache);
    benchmark::DoNotOptimize(net.backward(cache, g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RetargetNetForwardBackward)->Arg(1)->Arg(64);

void BM_SurrogateStep(benchmark::State& state) {
  Rng rng(2);
  const PpoConfig config;
  GaussianPolicy policy(config, JointVector::Zero(), rng);
  const int n = config.minibatch;
  const Eigen::MatrixXd obs = gaussian(kObservationDim, n, rng);
  const Eigen::MatrixXd act = policy.means(obs) + 0.3 * gaussian(kNumJoints, n, rng);
  const Eigen::VectorXd logp = policy.log_probs(obs, act);
  const Eigen::VectorXd adv = gaussian(n, 1, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(surrogate_gradient(policy, obs, act, logp, adv, config.clip_range));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SurrogateStep);

void BM_Gae(benchmark::State& state) {
  Rng rng(3);
  const int n = 4096;
  const Eigen::VectorXd r = gaussian(n, 1, rng), v = gaussian(n + 1, 1, rng);
  std::vector<unsigned char> dones(n, 0);
  for (int i = 299; i < n; i += 300) dones[i] = 1;
  for (auto _ : state) benchmark::DoNotOptimize(compute_gae(r, v, dones, 0.95, 0.95));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Gae);

void BM_EnvStep(benchmark::State& state) {
  const auto model = QuadrupedModel::a1_like();
  Rng rng(4);
  const MotionClip clip = label_contacts(gen_task_motion(model, {Task::kTiltAtStand, 1.0}, 10.0, rng), model);
  ImitationEnv env(model);
  ReferencePolicy policy;
  Rng act_rng(5);
  Eigen::VectorXd obs = env.reset(clip, DomainParams{}, 6);
  for (auto _ : state) {
    if (env.done()) obs = env.reset(clip, DomainParams{}, 6);
    obs = env.step(policy.act(obs, act_rng)).observation;
  }
}
BENCHMARK(BM_EnvStep);

void BM_RetargetFrame(benchmark::State& state) {
  const auto model = QuadrupedModel::a1_like();
  // Untrained experts cost the same per frame as trained ones.
  Rng rng(7);
  ExpertSet experts;
  for (auto& r : experts.retarget) r = {Mlp(RetargetNet::default_spec(), rng), {}};
  for (auto& c : experts.contact) c = {Mlp(ContactNet::default_spec(), rng), {}};
  for (auto& r : experts.retarget) {
    r.input.mean = Eigen::VectorXd::Zero(RetargetNet::kInputDim);
    r.input.scale = Eigen::VectorXd::Ones(RetargetNet::kInputDim);
  }
  for (auto& c : experts.contact) {
    c.input.mean = Eigen::VectorXd::Zero(ContactNet::kInputDim);
    c.input.scale = Eigen::VectorXd::Ones(ContactNet::kInputDim);
  }
  const MotionClip robot = label_contacts(gen_task_motion(model, {Task::kTiltAtStand, 1.0}, 10.0, rng), model);
  const HumanClip human = gen_human_clip(model, robot, HumanStyle(7), rng);
  std::vector<HumanFrame> frames(human.begin(), human.begin() + 30);
  experts.index = KnnIndex(frames, std::vector<RobotState>(frames.size(), RobotState::kStand));
  RetargetHistory history = RetargetHistory::start(model, RobotState::kStand);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(retarget_frame(experts, model, human[i], history, 1.0 / 30.0));
    i = (i + 1) % human.size();
  }
}
BENCHMARK(BM_RetargetFrame);

}  // namespace
}  // namespace quadmimic

BENCHMARK_MAIN();
