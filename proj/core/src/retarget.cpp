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

#include "quadmimic/retarget.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include <unsupported/Eigen/AutoDiff>

namespace quadmimic {
namespace {

constexpr double kDerivativeScale = 0.1;  // acceleration range = velocity range / 0.1 s
constexpr int kQuat = 0, kJoints = 4, kRootRate = 16, kJointRate = 19, kRootAcc = 31, kJointAcc = 34;

using Ad = Eigen::AutoDiffScalar<Eigen::Matrix<double, 15, 1>>;
using AdVec3 = Eigen::Matrix<Ad, 3, 1>;

double rate_range(const QuadrupedModel& model) { return 2.0 * model.joint_velocity_limit; }

// Loss and gradient with respect to the tanh head `y` for one sample.
MapLoss map_loss_and_grad(const Eigen::VectorXd& y, const MotionFrame& target,
                          const FootRates& target_rates, const QuadrupedModel& model,
                          const LossWeights& w, Eigen::Ref<Eigen::VectorXd> grad) {
  grad.setZero();
  MapLoss loss;

  // Orientation: acos(2<q,t>^2 - 1) through the normalization of the head.
  const Eigen::Vector4d raw = y.segment<4>(kQuat);
  const double n = std::max(raw.norm(), 1e-9);
  const Eigen::Vector4d q = raw / n;
  const Quat& tq = target.pose.root_orientation;
  const Eigen::Vector4d t(tq.w(), tq.x(), tq.y(), tq.z());
  const double dot = q.dot(t);
  const double c = std::clamp(2.0 * dot * dot - 1.0, -1.0, 1.0);
  loss.orientation = std::acos(c);
  const double dl_dc = -1.0 / std::sqrt(1.0 - c * c + 1e-8);
  const Eigen::Vector4d dc_dq = 4.0 * dot * t;
  grad.segment<4>(kQuat) += w.orientation * dl_dc * (dc_dq - q * q.dot(dc_dq)) / n;

  // Joints.
  const JointVector lo = model.lower_limits(), hi = model.upper_limits();
  const JointVector half_span = 0.5 * (hi - lo);
  const JointVector joints = lo + (y.segment<kNumJoints>(kJoints).array() + 1.0).matrix().cwiseProduct(half_span);
  const JointVector dj = joints - target.pose.joints;
  loss.joints = dj.squaredNorm();
  grad.segment<kNumJoints>(kJoints) += w.joints * 2.0 * dj.cwiseProduct(half_span);

  // End-effector rates in the body frame, differentiated with forward-mode AD
  // over (q, qd, qdd, omega, alpha) of each leg.
  const double vr = rate_range(model);
  const double ar = vr / kDerivativeScale;
  const Vec3 omega = vr * y.segment<3>(kRootRate);
  const Vec3 alpha = ar * y.segment<3>(kRootAcc);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    AdVec3 aq, aqd, aqdd, aw, aa;
    for (int i = 0; i < 3; ++i) {
      aq[i] = Ad(joints[3 * leg + i], 15, i);
      aqd[i] = Ad(vr * y[kJointRate + 3 * leg + i], 15, 3 + i);
      aqdd[i] = Ad(ar * y[kJointAcc + 3 * leg + i], 15, 6 + i);
      aw[i] = Ad(omega[i], 15, 9 + i);
      aa[i] = Ad(alpha[i], 15, 12 + i);
    }
    AdVec3 vel, acc;
    leg_foot_rates_body<Ad>(model, leg, aq, aqd, aqdd, aw, aa, vel, acc);
    Eigen::Matrix<double, 15, 1> d = Eigen::Matrix<double, 15, 1>::Zero();
    for (int i = 0; i < 3; ++i) {
      const double ev = vel[i].value() - target_rates.velocity[leg][i];
      const double ea = acc[i].value() - target_rates.acceleration[leg][i];
      loss.velocity += ev * ev;
      loss.acceleration += ea * ea;
      d += 2.0 * w.velocity * ev * vel[i].derivatives() + 2.0 * w.acceleration * ea * acc[i].derivatives();
    }
    for (int i = 0; i < 3; ++i) {
      grad[kJoints + 3 * leg + i] += d[i] * half_span[3 * leg + i];
      grad[kJointRate + 3 * leg + i] += d[3 + i] * vr;
      grad[kJointAcc + 3 * leg + i] += d[6 + i] * ar;
      grad[kRootRate + i] += d[9 + i] * vr;
      grad[kRootAcc + i] += d[12 + i] * ar;
    }
  }
  loss.total = w.orientation * loss.orientation + w.joints * loss.joints +
               w.velocity * loss.velocity + w.acceleration * loss.acceleration;
  return loss;
}

Eigen::MatrixXd triplet_columns(const std::vector<const PairedSample*>& samples) {
  Eigen::MatrixXd x(RetargetNet::kInputDim, static_cast<Eigen::Index>(samples.size()));
  for (size_t i = 0; i < samples.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = samples[i]->human.triplet();
  return x;
}

Eigen::MatrixXd contact_columns(const std::vector<const PairedSample*>& samples) {
  Eigen::MatrixXd x(ContactNet::kInputDim, static_cast<Eigen::Index>(samples.size()));
  for (size_t i = 0; i < samples.size(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) = samples[i]->human.pose_and_velocity();
  }
  return x;
}

struct Split {
  std::vector<const PairedSample*> train;
  std::vector<const PairedSample*> holdout;
};

Split split_for(const Dataset& dataset, RobotState state) {
  Split s{dataset.select(state, false), dataset.select(state, true)};
  if (s.train.size() + s.holdout.size() < 76) {
    throw Error(ErrorCode::kInsufficientData,
                std::string("need at least 76 samples for state ") + state_name(state) + ", have " +
                    std::to_string(s.train.size() + s.holdout.size()));
  }
  if (s.train.empty()) throw Error(ErrorCode::kInsufficientData, "no training samples");
  if (s.holdout.empty()) s.holdout = s.train;
  return s;
}

// Shared minibatch loop with holdout early stopping. `grad_fn` fills the
// output gradient for a batch and returns the mean loss; `eval_fn` returns the
// holdout loss of the current network.
template <typename GradFn, typename EvalFn>
Mlp run_training(Mlp net, int num_train, const TrainOptions& options, GradFn grad_fn, EvalFn eval_fn,
                 TrainReport* report) {
  Rng rng(derive_seed(options.seed, 0x6261746368ull));
  std::uniform_int_distribution<int> pick(0, num_train - 1);
  AdamState adam = AdamState::for_spec(net.spec(), {options.learning_rate});
  TrainReport rep;
  TrainRecord first{};
  first.holdout_loss = eval_fn(net, &first);
  rep.initial_holdout = first.holdout_loss;
  rep.best_holdout = first.holdout_loss;
  rep.history.push_back(first);
  Mlp best = net;
  int stale = 0;
  std::vector<int> batch(options.batch_size);
  MlpCache cache;
  double running = 0.0;
  int step = 0;
  while (step < options.max_steps) {
    for (int& b : batch) b = pick(rng);
    Eigen::MatrixXd out_grad;
    running = grad_fn(net, batch, cache, out_grad);
    MlpParams grads = net.backward(cache, out_grad);
    adam_step(net.params(), grads, adam);
    ++step;
    if (!net.params().all_finite()) throw Error(ErrorCode::kNumericFailure, "training diverged");
    if (step % options.eval_interval == 0 || step == options.max_steps) {
      TrainRecord rec{step, running, 0.0, {}};
      rec.holdout_loss = eval_fn(net, &rec);
      rep.history.push_back(rec);
      if (rec.holdout_loss < rep.best_holdout) {
        rep.best_holdout = rec.holdout_loss;
        rep.best_step = step;
        best = net;
        stale = 0;
      } else if (++stale >= options.patience) {
        break;
      }
    }
  }
  rep.steps = step;
  if (report != nullptr) *report = std::move(rep);
  return best;
}

void write_le_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t read_le_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw Error(ErrorCode::kCorruptFile, "kNN index truncated");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

const char* const kStateFiles[kNumRobotStates] = {"stand", "sit", "walk"};

nlohmann::json net_doc(const Mlp& mlp, const Standardizer& input, const std::string& role,
                       RobotState state) {
  nlohmann::json doc = mlp_to_json(mlp);
  doc["format"] = "quadmimic-mlp";
  doc["version"] = Checkpoint::kVersion;
  doc["metadata"] = {{"role", role}, {"state", state_name(state)}, {"input_norm", input.to_json()}};
  return doc;
}

template <typename Net>
Net load_net(const std::filesystem::path& path, int input_dim) {
  Checkpoint c = load_checkpoint(path);
  Net net{std::move(c.net), {}};
  try {
    net.input = Standardizer::from_json(c.metadata.at("input_norm"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": missing input normalization");
  }
  if (net.mlp.input_size() != input_dim || net.input.mean.size() != input_dim) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": unexpected input size");
  }
  return net;
}

// Keyframe transition from an arbitrary start pose to the canonical pose of
// `to`, placed at the start pose's ground position and heading. Feet ease from
// their start positions to the canonical stance.
MotionClip transition_from(const QuadrupedModel& model, const Pose& start, RobotState to,
                           double duration, double frame_rate) {
  const Pose target_local = canonical_pose(model, to);
  const FootArray feet_local = canonical_feet(model, to);
  const double yaw = rpy_from_quat(start.root_orientation).z();
  const Quat heading(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
  const Vec3 ground(start.root_position.x(), start.root_position.y(), 0.0);
  const Vec3 end_root = ground + heading * target_local.root_position;
  const Quat end_rot = heading * target_local.root_orientation;
  const FootArray start_feet = forward_kinematics(model, start).world;
  FootArray end_feet;
  for (int leg = 0; leg < kNumLegs; ++leg) end_feet[leg] = ground + heading * feet_local[leg];

  const int n = std::max(2, static_cast<int>(std::lround(duration * frame_rate)) + 1);
  MotionClip clip;
  clip.frame_rate = frame_rate;
  clip.frames.resize(n);
  Pose prev = start;
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    const double e = s * s * (3.0 - 2.0 * s);
    Pose pose = prev;
    pose.root_position = start.root_position + e * (end_root - start.root_position);
    pose.root_orientation = start.root_orientation.slerp(e, end_rot);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const IkResult ik = solve_leg_ik(model, pose, leg, start_feet[leg] + e * (end_feet[leg] - start_feet[leg]));
      pose.set_leg_joints(leg, ik.angles);
    }
    if (i > 0) pose = rate_limit(prev, pose, 1.0 / frame_rate, model.joint_velocity_limit);
    clip.frames[i].time = i / frame_rate;
    clip.frames[i].pose = pose;
    prev = pose;
  }
  return clip;
}

MotionClip append_clip(MotionClip a, const MotionClip& b) {
  const double offset = a.frames.back().time;
  for (size_t i = 1; i < b.frames.size(); ++i) {
    MotionFrame f = b.frames[i];
    f.time += offset;
    a.frames.push_back(f);
  }
  return a;
}

MotionClip transition_path(const QuadrupedModel& model, const Pose& start, RobotState from,
                           RobotState to, double frame_rate) {
  if (from == to) throw Error(ErrorCode::kSameState, "transition needs two different states");
  const bool via_stand = from != RobotState::kStand && to != RobotState::kStand;
  if (!via_stand) return transition_from(model, start, to, transition_duration(from, to), frame_rate);
  MotionClip first = transition_from(model, start, RobotState::kStand,
                                     transition_duration(from, RobotState::kStand), frame_rate);
  MotionClip second = transition_from(model, first.frames.back().pose, to,
                                      transition_duration(RobotState::kStand, to), frame_rate);
  return append_clip(std::move(first), second);
}

void fill_rates(MotionFrame& frame, const MotionFrame& prev, double dt) {
  const Quat rel = prev.pose.root_orientation.conjugate() * frame.pose.root_orientation;
  frame.rates.root_angular_velocity = quat_log(rel) / dt;
  frame.rates.joint_velocities = (frame.pose.joints - prev.pose.joints) / dt;
  frame.accel.root_angular_velocity =
      (frame.rates.root_angular_velocity - prev.rates.root_angular_velocity) / dt;
  frame.accel.joint_velocities = (frame.rates.joint_velocities - prev.rates.joint_velocities) / dt;
}

}  // namespace

MapLoss map_loss_head(const Eigen::VectorXd& y, const MotionFrame& target, const QuadrupedModel& model,
                      const LossWeights& weights, Eigen::VectorXd* grad) {
  if (y.size() != RetargetNet::kOutputDim) {
    throw Error(ErrorCode::kShapeMismatch, "network head has " + std::to_string(y.size()) + " entries");
  }
  Eigen::VectorXd g(RetargetNet::kOutputDim);
  const FootRates rates = end_effector_rates_body(model, target.pose, target.rates, target.accel);
  const MapLoss loss = map_loss_and_grad(y, target, rates, model, weights, g);
  if (grad != nullptr) *grad = std::move(g);
  return loss;
}

MapLoss compute_map_loss(const MotionFrame& output, const MotionFrame& target,
                         const QuadrupedModel& model, const LossWeights& w) {
  MapLoss loss;
  loss.orientation = quaternion_distance(output.pose.root_orientation, target.pose.root_orientation);
  loss.joints = (output.pose.joints - target.pose.joints).squaredNorm();
  const FootRates a = end_effector_rates_body(model, output.pose, output.rates, output.accel);
  const FootRates b = end_effector_rates_body(model, target.pose, target.rates, target.accel);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    loss.velocity += (a.velocity[leg] - b.velocity[leg]).squaredNorm();
    loss.acceleration += (a.acceleration[leg] - b.acceleration[leg]).squaredNorm();
  }
  loss.total = w.orientation * loss.orientation + w.joints * loss.joints + w.velocity * loss.velocity +
               w.acceleration * loss.acceleration;
  return loss;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  s.mean = x.rowwise().mean();
  s.scale.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double var = (x.row(r).array() - s.mean[r]).square().mean();
    const double sd = std::sqrt(var);
    s.scale[r] = sd > 1e-6 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  return (x.colwise() - mean).array().colwise() / scale.array();
}

nlohmann::json Standardizer::to_json() const {
  return {{"mean", vector_to_json(mean)}, {"scale", vector_to_json(scale)}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  Standardizer s{vector_from_json(j.at("mean")), vector_from_json(j.at("scale"))};
  if (s.mean.size() != s.scale.size()) throw Error(ErrorCode::kCorruptFile, "normalizer size mismatch");
  return s;
}

MlpSpec RetargetNet::default_spec() {
  return {kInputDim,
          {{256, Activation::kLeakyReLU},
           {256, Activation::kLeakyReLU},
           {256, Activation::kLeakyReLU},
           {kOutputDim, Activation::kTanh}}};
}

MotionFrame RetargetNet::decode(const Eigen::VectorXd& y, const QuadrupedModel& model) {
  if (y.size() != kOutputDim) throw Error(ErrorCode::kShapeMismatch, "retarget head must have 46 outputs");
  MotionFrame f;
  Eigen::Vector4d q = y.segment<4>(kQuat);
  if (q.norm() < 1e-9) q = Eigen::Vector4d(1, 0, 0, 0);
  q.normalize();
  f.pose.root_orientation = Quat(q[0], q[1], q[2], q[3]);
  const JointVector lo = model.lower_limits(), hi = model.upper_limits();
  f.pose.joints = lo + 0.5 * (y.segment<kNumJoints>(kJoints).array() + 1.0).matrix().cwiseProduct(hi - lo);
  const double vr = rate_range(model);
  f.rates.root_angular_velocity = vr * y.segment<3>(kRootRate);
  f.rates.joint_velocities = vr * y.segment<kNumJoints>(kJointRate);
  f.accel.root_angular_velocity = vr / kDerivativeScale * y.segment<3>(kRootAcc);
  f.accel.joint_velocities = vr / kDerivativeScale * y.segment<kNumJoints>(kJointAcc);
  return f;
}

MotionFrame RetargetNet::infer(const HumanFrame& human, const QuadrupedModel& model) const {
  const Eigen::VectorXd x = input.apply(human.triplet());
  MotionFrame f = decode(mlp.forward(x), model);
  f.time = human.time;
  return f;
}

MlpSpec ContactNet::default_spec() {
  return {kInputDim,
          {{128, Activation::kReLU}, {128, Activation::kReLU}, {kNumLegs, Activation::kSigmoid}}};
}

ContactLabels ContactNet::infer(const HumanFrame& human) const {
  const Eigen::VectorXd y = mlp.forward(Eigen::VectorXd(input.apply(human.pose_and_velocity())));
  ContactLabels c{};
  for (int leg = 0; leg < kNumLegs; ++leg) c[leg] = y[leg];
  return c;
}

RetargetEval evaluate_retarget(const RetargetNet& net, const std::vector<const PairedSample*>& samples,
                               const QuadrupedModel& model, const LossWeights& weights) {
  RetargetEval ev;
  if (samples.empty()) return ev;
  const Eigen::MatrixXd y = net.mlp.forward(net.input.apply(triplet_columns(samples)));
  for (size_t i = 0; i < samples.size(); ++i) {
    const MotionFrame out = RetargetNet::decode(y.col(static_cast<Eigen::Index>(i)), model);
    const MapLoss l = compute_map_loss(out, samples[i]->robot, model, weights);
    ev.loss.total += l.total;
    ev.loss.orientation += l.orientation;
    ev.loss.joints += l.joints;
    ev.loss.velocity += l.velocity;
    ev.loss.acceleration += l.acceleration;
    ev.joint_mae += (out.pose.joints - samples[i]->robot.pose.joints).cwiseAbs().mean();
  }
  const double n = static_cast<double>(samples.size());
  ev.loss.total /= n;
  ev.loss.orientation /= n;
  ev.loss.joints /= n;
  ev.loss.velocity /= n;
  ev.loss.acceleration /= n;
  ev.joint_mae /= n;
  return ev;
}

RetargetNet train_retarget(const Dataset& dataset, RobotState state, const QuadrupedModel& model,
                           const TrainOptions& options, TrainReport* report) {
  if (!dataset.model_hash.empty() && dataset.model_hash != model.hash()) {
    throw Error(ErrorCode::kInvalidArgument, "dataset was generated for a different robot model");
  }
  const Split split = split_for(dataset, state);
  const Eigen::MatrixXd raw = triplet_columns(split.train);
  RetargetNet net;
  net.input = Standardizer::fit(raw);
  const Eigen::MatrixXd x = net.input.apply(raw);
  std::vector<FootRates> target_rates;
  target_rates.reserve(split.train.size());
  for (const auto* s : split.train) {
    target_rates.push_back(end_effector_rates_body(model, s->robot.pose, s->robot.rates, s->robot.accel));
  }
  Rng init_rng(derive_seed(options.seed, 0x726574ull, static_cast<std::uint64_t>(state)));
  Mlp mlp(RetargetNet::default_spec(), init_rng);

  auto grad_fn = [&](const Mlp& m, const std::vector<int>& batch, MlpCache& cache, Eigen::MatrixXd& g) {
    Eigen::MatrixXd xb(x.rows(), static_cast<Eigen::Index>(batch.size()));
    for (size_t i = 0; i < batch.size(); ++i) xb.col(static_cast<Eigen::Index>(i)) = x.col(batch[i]);
    const Eigen::MatrixXd y = m.forward(xb, cache);
    g.resize(y.rows(), y.cols());
    double total = 0.0;
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      total += map_loss_and_grad(y.col(c), split.train[batch[i]]->robot, target_rates[batch[i]], model,
                                 options.weights, g.col(c))
                   .total;
      g.col(c) *= inv;
    }
    // The tanh derivative is applied by the network's backward pass.
    return total * inv;
  };
  auto eval_fn = [&](const Mlp& m, TrainRecord* rec) {
    const RetargetEval ev = evaluate_retarget({m, net.input}, split.holdout, model, options.weights);
    if (rec != nullptr) rec->holdout_components = ev.loss;
    return ev.loss.total;
  };
  net.mlp = run_training(std::move(mlp), static_cast<int>(split.train.size()), options, grad_fn, eval_fn,
                         report);
  return net;
}

ContactEval evaluate_contact(const ContactNet& net, const std::vector<const PairedSample*>& samples) {
  ContactEval ev;
  if (samples.empty()) return ev;
  const Eigen::MatrixXd y = net.mlp.forward(net.input.apply(contact_columns(samples)));
  int correct = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const ContactLabels& labels = samples[i]->robot.contact_labels.value();
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const double p = y(leg, static_cast<Eigen::Index>(i));
      ev.loss += (p - labels[leg]) * (p - labels[leg]);
      correct += (p > 0.5) == (labels[leg] > 0.5);
    }
  }
  ev.loss /= static_cast<double>(samples.size());
  ev.accuracy = correct / static_cast<double>(kNumLegs * samples.size());
  return ev;
}

ContactNet train_contact(const Dataset& dataset, RobotState state, const TrainOptions& options,
                         TrainReport* report) {
  const Split split = split_for(dataset, state);
  for (const auto* s : split.train) {
    if (!s->robot.contact_labels) throw Error(ErrorCode::kInvalidArgument, "dataset lacks contact labels");
  }
  const Eigen::MatrixXd raw = contact_columns(split.train);
  ContactNet net;
  net.input = Standardizer::fit(raw);
  const Eigen::MatrixXd x = net.input.apply(raw);
  Eigen::MatrixXd labels(kNumLegs, x.cols());
  for (size_t i = 0; i < split.train.size(); ++i) {
    for (int leg = 0; leg < kNumLegs; ++leg) {
      labels(leg, static_cast<Eigen::Index>(i)) = (*split.train[i]->robot.contact_labels)[leg];
    }
  }
  Rng init_rng(derive_seed(options.seed, 0x636f6eull, static_cast<std::uint64_t>(state)));
  Mlp mlp(ContactNet::default_spec(), init_rng);

  auto grad_fn = [&](const Mlp& m, const std::vector<int>& batch, MlpCache& cache, Eigen::MatrixXd& g) {
    Eigen::MatrixXd xb(x.rows(), static_cast<Eigen::Index>(batch.size()));
    Eigen::MatrixXd tb(kNumLegs, static_cast<Eigen::Index>(batch.size()));
    for (size_t i = 0; i < batch.size(); ++i) {
      xb.col(static_cast<Eigen::Index>(i)) = x.col(batch[i]);
      tb.col(static_cast<Eigen::Index>(i)) = labels.col(batch[i]);
    }
    const Eigen::MatrixXd diff = m.forward(xb, cache) - tb;
    const double inv = 1.0 / static_cast<double>(batch.size());
    g = 2.0 * inv * diff;
    return diff.squaredNorm() * inv;
  };
  auto eval_fn = [&](const Mlp& m, TrainRecord*) {
    return evaluate_contact({m, net.input}, split.holdout).loss;
  };
  net.mlp = run_training(std::move(mlp), static_cast<int>(split.train.size()), options, grad_fn, eval_fn,
                         report);
  return net;
}

KnnIndex::KnnIndex(const std::vector<HumanFrame>& frames, const std::vector<RobotState>& labels, int k)
    : k_(k), labels_(labels) {
  if (frames.size() != labels.size()) throw Error(ErrorCode::kShapeMismatch, "one label per frame");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (frames.empty()) return;
  Eigen::MatrixXd raw(HumanFrame::kTripletDim, static_cast<Eigen::Index>(frames.size()));
  for (size_t i = 0; i < frames.size(); ++i) raw.col(static_cast<Eigen::Index>(i)) = frames[i].triplet();
  norm_ = Standardizer::fit(raw);
  points_ = norm_.apply(raw);
}

RobotState KnnIndex::classify(const HumanFrame& query, RobotState current) const {
  if (empty()) throw Error(ErrorCode::kEmptyIndex, "kNN index is empty");
  const Eigen::VectorXd q = norm_.apply(query.triplet());
  const Eigen::VectorXd d2 = (points_.colwise() - q).colwise().squaredNorm().transpose();
  std::vector<int> order(labels_.size());
  std::iota(order.begin(), order.end(), 0);
  const size_t k = std::min<size_t>(static_cast<size_t>(k_), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                    [&](int a, int b) { return d2[a] < d2[b] || (d2[a] == d2[b] && a < b); });
  std::array<int, kNumRobotStates> votes{};
  for (size_t i = 0; i < k; ++i) ++votes[static_cast<int>(labels_[order[i]])];
  const int best = *std::max_element(votes.begin(), votes.end());
  if (votes[static_cast<int>(current)] == best) return current;
  for (RobotState s : kAllRobotStates) {
    if (votes[static_cast<int>(s)] == best) return s;
  }
  return current;
}

void KnnIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  const nlohmann::json header = {{"format", "quadmimic-knn"},
                                 {"version", 1},
                                 {"k", k_},
                                 {"dim", HumanFrame::kTripletDim},
                                 {"count", labels_.size()},
                                 {"input_norm", labels_.empty() ? nlohmann::json() : norm_.to_json()}};
  out << header.dump() << '\n';
  for (Eigen::Index c = 0; c < points_.cols(); ++c) {
    for (Eigen::Index r = 0; r < points_.rows(); ++r) write_le_u64(out, std::bit_cast<std::uint64_t>(points_(r, c)));
  }
  for (RobotState s : labels_) out.put(static_cast<char>(s));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

KnnIndex KnnIndex::from_dataset(const Dataset& dataset, int k) {
  std::vector<HumanFrame> frames;
  std::vector<RobotState> labels;
  for (const auto& sample : dataset.samples) {
    if (sample.holdout) continue;
    frames.push_back(sample.human);
    labels.push_back(sample.state);
  }
  return KnnIndex(frames, labels, k);
}

KnnIndex KnnIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kCorruptFile, "empty kNN index");
  KnnIndex idx;
  size_t count = 0;
  try {
    const auto h = nlohmann::json::parse(line);
    if (h.value("format", "") != "quadmimic-knn") throw Error(ErrorCode::kCorruptFile, "not a kNN index");
    if (h.at("version").get<int>() != 1) throw Error(ErrorCode::kVersionMismatch, "kNN index version");
    if (h.at("dim").get<int>() != HumanFrame::kTripletDim) throw Error(ErrorCode::kCorruptFile, "kNN dim");
    idx.k_ = h.at("k").get<int>();
    count = h.at("count").get<size_t>();
    if (count > 0) idx.norm_ = Standardizer::from_json(h.at("input_norm"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("bad kNN header: ") + e.what());
  }
  idx.points_.resize(HumanFrame::kTripletDim, static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < idx.points_.cols(); ++c) {
    for (Eigen::Index r = 0; r < idx.points_.rows(); ++r) idx.points_(r, c) = std::bit_cast<double>(read_le_u64(in));
  }
  idx.labels_.resize(count);
  for (auto& s : idx.labels_) {
    const int v = in.get();
    if (v < 0 || v >= kNumRobotStates) throw Error(ErrorCode::kCorruptFile, "bad kNN label");
    s = static_cast<RobotState>(v);
  }
  return idx;
}

void ExpertSet::validate() const {
  for (int s = 0; s < kNumRobotStates; ++s) {
    if (retarget[s].mlp.input_size() != RetargetNet::kInputDim ||
        retarget[s].mlp.output_size() != RetargetNet::kOutputDim) {
      throw Error(ErrorCode::kInvalidArgument, std::string("missing retarget expert for ") + kStateFiles[s]);
    }
    if (contact[s].mlp.input_size() != ContactNet::kInputDim || contact[s].mlp.output_size() != kNumLegs) {
      throw Error(ErrorCode::kInvalidArgument, std::string("missing contact expert for ") + kStateFiles[s]);
    }
  }
  if (index.empty()) throw Error(ErrorCode::kEmptyIndex, "expert set has an empty kNN index");
}

std::filesystem::path retarget_file(const std::filesystem::path& dir, RobotState state) {
  return dir / (std::string(kStateFiles[static_cast<int>(state)]) + "_retarget.json");
}

std::filesystem::path contact_file(const std::filesystem::path& dir, RobotState state) {
  return dir / (std::string(kStateFiles[static_cast<int>(state)]) + "_contact.json");
}

std::filesystem::path index_file(const std::filesystem::path& dir) { return dir / "knn.bin"; }

void save_retarget_net(const std::filesystem::path& path, const RetargetNet& net, RobotState state) {
  write_json_file(path, net_doc(net.mlp, net.input, "retarget", state));
}

RetargetNet load_retarget_net(const std::filesystem::path& path) {
  return load_net<RetargetNet>(path, RetargetNet::kInputDim);
}

void save_contact_net(const std::filesystem::path& path, const ContactNet& net, RobotState state) {
  write_json_file(path, net_doc(net.mlp, net.input, "contact", state));
}

ContactNet load_contact_net(const std::filesystem::path& path) {
  return load_net<ContactNet>(path, ContactNet::kInputDim);
}

void ExpertSet::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const RobotState state : kAllRobotStates) {
    save_retarget_net(retarget_file(dir, state), retarget[static_cast<int>(state)], state);
    save_contact_net(contact_file(dir, state), contact[static_cast<int>(state)], state);
  }
  index.save(index_file(dir));
}

ExpertSet ExpertSet::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kFileNotFound, dir.string());
  ExpertSet e;
  for (const RobotState state : kAllRobotStates) {
    e.retarget[static_cast<int>(state)] = load_retarget_net(retarget_file(dir, state));
    e.contact[static_cast<int>(state)] = load_contact_net(contact_file(dir, state));
  }
  e.index = KnnIndex::load(index_file(dir));
  e.validate();
  return e;
}

RobotState select_expert(const ExpertSet& experts, const HumanFrame& human, RobotState current) {
  return experts.index.classify(human, current);
}

double transition_duration(RobotState from, RobotState to) {
  if (from == to) throw Error(ErrorCode::kSameState, "transition needs two different states");
  auto pair_is = [&](RobotState a, RobotState b) { return (from == a && to == b) || (from == b && to == a); };
  if (pair_is(RobotState::kStand, RobotState::kSit)) return 2.0;
  if (pair_is(RobotState::kStand, RobotState::kWalk)) return 1.0;
  return 3.0;  // sit <-> walk passes through stand
}

MotionClip state_transition(const QuadrupedModel& model, RobotState from, RobotState to, double frame_rate) {
  MotionClip clip = transition_path(model, canonical_pose(model, from), from, to, frame_rate);
  return label_contacts(finite_difference(clip), model);
}

RetargetHistory RetargetHistory::start(const QuadrupedModel& model, RobotState state) {
  RetargetHistory h;
  h.previous.pose = canonical_pose(model, state);
  h.previous_feet = forward_kinematics(model, h.previous.pose).world;
  h.state = state;
  h.pending = state;
  return h;
}

RetargetOutput retarget_frame(const ExpertSet& experts, const QuadrupedModel& model,
                              const HumanFrame& human, RetargetHistory& history, double dt,
                              const RetargetOptions& options) {
  RetargetOutput out;
  const MotionFrame& prev = history.previous;

  // (1) Expert selection with hysteresis; a switch starts a transition clip.
  if (!history.in_transition()) {
    const RobotState vote = select_expert(experts, human, history.state);
    if (vote == history.state) {
      history.votes = 0;
    } else {
      if (vote != history.pending) {
        history.pending = vote;
        history.votes = 0;
      }
      if (++history.votes >= options.hysteresis_frames) {
        history.transition = transition_path(model, prev.pose, history.state, vote, 1.0 / dt);
        history.transition_index = 1;  // frame 0 is the current pose
        history.state = vote;
        history.votes = 0;
        out.switched = true;
      }
    }
  }

  MotionFrame frame;
  if (history.in_transition()) {
    frame.pose = history.transition.frames[history.transition_index++].pose;
    out.in_transition = true;
    out.contact_probabilities.fill(1.0);
  } else {
    // (2) Network inference.
    const int s = static_cast<int>(history.state);
    const MotionFrame net = experts.retarget[s].infer(human, model);
    const ContactLabels probs = experts.contact[s].infer(human);
    out.contact_probabilities = probs;
    frame.pose = net.pose;

    std::vector<int> contacts;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (probs[leg] > options.contact_threshold) contacts.push_back(leg);
    }
    // Root placement: translate the body so the feet believed to be in
    // contact best match where they were on the previous frame.
    auto place_root = [&](Pose& pose) {
      if (contacts.empty()) return;
      const FootArray feet = forward_kinematics(model, pose).world;
      Vec3 shift = Vec3::Zero();
      for (int leg : contacts) shift += history.previous_feet[leg] - feet[leg];
      pose.root_position += shift / static_cast<double>(contacts.size());
    };
    frame.pose.root_position = prev.pose.root_position;
    place_root(frame.pose);

    const double step = model.joint_velocity_limit * dt;
    auto in_box = [&](const Pose& pose) {
      return ((pose.joints - prev.pose.joints).cwiseAbs().array() <= step).all();
    };
    // Pins the contact feet; false if a foot is out of reach.
    auto pin = [&](Pose& pose) {
      for (int leg : contacts) {
        const IkResult ik = solve_leg_ik(model, pose, leg, history.previous_feet[leg]);
        if (!ik.ok()) return false;
        pose.set_leg_joints(leg, ik.angles);
      }
      return true;
    };
    // With both corrections on, a pinned pose that needs more joint motion
    // than one step allows would be pulled off its contacts by the clip, and
    // a root rotation far from the previous one can put a pinned foot out of
    // reach. Back the rotation off towards the previous frame until the
    // pinned legs are reachable and fit in the velocity box.
    auto pin_within_rate = [&](Pose& pose) {
      const Pose net_pose = pose;
      auto attempt = [&](double frac, Pose& out) {
        out = net_pose;
        out.root_orientation = prev.pose.root_orientation.slerp(frac, net_pose.root_orientation);
        out.root_position = prev.pose.root_position;
        place_root(out);
        return pin(out);
      };
      Pose full;
      if (attempt(1.0, full) && in_box(full)) {
        pose = full;
        return;
      }
      Pose best;
      if (!attempt(0.0, best) || !in_box(best)) {
        // Even holding the rotation cannot keep every foot; settle for the
        // closest placements inside the box.
        out.ik_fallback = !attempt(0.0, best);
        for (int leg : contacts) {
          IkOptions boxed;
          const Vec3 centre = prev.pose.leg_joints(leg);
          boxed.bounds = {centre.array() - step, centre.array() + step};
          best.set_leg_joints(leg, solve_leg_ik(model, best, leg, history.previous_feet[leg], boxed).angles);
        }
        pose = best;
        return;
      }
      double lo = 0.0, hi = 1.0;
      for (int i = 0; i < 8; ++i) {
        const double mid = 0.5 * (lo + hi);
        Pose trial;
        if (attempt(mid, trial) && in_box(trial)) {
          best = trial;
          lo = mid;
        } else {
          hi = mid;
        }
      }
      pose = best;
    };
    auto pin_or_flag = [&](Pose& pose) {
      Pose pinned = pose;
      if (pin(pinned)) {
        pose = pinned;
      } else {
        out.ik_fallback = true;
      }
    };
    auto clip = [&](Pose& pose) {
      pose = rate_limit(prev.pose, pose, dt, model.joint_velocity_limit);
    };

    // (3) contact pinning and (4) velocity clipping, in the configured order.
    if (options.clip_before_pin) {
      if (options.temporal_correction) clip(frame.pose);
      if (options.contact_correction) pin_or_flag(frame.pose);
    } else {
      if (options.contact_correction) {
        if (options.temporal_correction) {
          pin_within_rate(frame.pose);
        } else {
          pin_or_flag(frame.pose);
        }
      }
      if (options.temporal_correction) clip(frame.pose);
    }
    place_root(frame.pose);
  }

  frame.time = human.time;
  fill_rates(frame, prev, dt);
  frame.contact_labels = out.contact_probabilities;
  history.previous = frame;
  history.previous_feet = forward_kinematics(model, frame.pose).world;
  history.started = true;
  out.frame = frame;
  out.state = history.state;
  return out;
}

RetargetRun retarget_clip(const ExpertSet& experts, const QuadrupedModel& model, const HumanClip& human,
                          RobotState initial_state, double frame_rate, const RetargetOptions& options) {
  RetargetRun run;
  run.clip.frame_rate = frame_rate;
  RetargetHistory history = RetargetHistory::start(model, initial_state);
  const double dt = 1.0 / frame_rate;
  for (const HumanFrame& h : human) {
    const RetargetOutput o = retarget_frame(experts, model, h, history, dt, options);
    if (!run.clip.frames.empty()) {
      const double v = (o.frame.pose.joints - run.clip.frames.back().pose.joints).cwiseAbs().maxCoeff() / dt;
      run.max_joint_velocity = std::max(run.max_joint_velocity, v);
    }
    run.clip.frames.push_back(o.frame);
    run.contact_probabilities.push_back(o.contact_probabilities);
    run.states.push_back(o.state);
    run.fallback_frames += o.ik_fallback;
  }
  return run;
}

double foot_skate(const QuadrupedModel& model, const MotionClip& clip,
                  const std::vector<ContactLabels>& labels) {
  if (labels.size() != clip.size()) throw Error(ErrorCode::kShapeMismatch, "one label set per frame");
  double total = 0.0;
  int count = 0;
  FootArray prev;
  for (size_t i = 0; i < clip.size(); ++i) {
    const FootArray feet = forward_kinematics(model, clip.frames[i].pose).world;
    if (i > 0) {
      for (int leg = 0; leg < kNumLegs; ++leg) {
        if (labels[i - 1][leg] > 0.9 && labels[i][leg] > 0.9) {
          total += (feet[leg] - prev[leg]).head<2>().norm();
          ++count;
        }
      }
    }
    prev = feet;
  }
  return count > 0 ? total / count : 0.0;
}

}  // namespace quadmimic
