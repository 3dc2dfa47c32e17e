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

#include "quadmimic/motion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace quadmimic {
namespace {

int stencil_span(double step, double frame_rate) {
  return std::max(1, static_cast<int>(std::lround(step * frame_rate)));
}

template <typename T>
std::vector<double> vec_of(const T& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

template <int N>
Eigen::Matrix<double, N, 1> fixed_from(const nlohmann::json& j, const char* key) {
  const auto& arr = j.at(key);
  if (!arr.is_array() || static_cast<int>(arr.size()) != N) {
    throw Error(ErrorCode::kCorruptFile, std::string("field '") + key + "' has wrong length");
  }
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = arr[i].get<double>();
  return out;
}

}  // namespace

void MotionClip::validate() const {
  if (!(frame_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "frame_rate must be positive");
  const double expected = 1.0 / frame_rate;
  for (size_t i = 0; i < frames.size(); ++i) {
    if (i > 0) {
      const double gap = frames[i].time - frames[i - 1].time;
      if (!(gap > 0.0) || std::abs(gap - expected) > 1e-9) {
        throw Error(ErrorCode::kInvalidArgument,
                    "frame " + std::to_string(i) + " breaks uniform spacing");
      }
    }
    if (frames[i].contact_labels) {
      for (double c : *frames[i].contact_labels) {
        if (!(c >= 0.0 && c <= 1.0)) {
          throw Error(ErrorCode::kInvalidArgument, "contact label outside [0,1]");
        }
      }
    }
  }
}

Eigen::VectorXd HumanFrame::triplet() const {
  Eigen::VectorXd out(kTripletDim);
  out << q, qd, qdd;
  return out;
}

Eigen::VectorXd HumanFrame::pose_and_velocity() const {
  Eigen::VectorXd out(2 * kFeatureDim);
  out << q, qd;
  return out;
}

MotionClip finite_difference(const MotionClip& clip, double step) {
  const int n = static_cast<int>(clip.size());
  if (n < 3) throw Error(ErrorCode::kTooShort, "finite_difference needs at least 3 frames");
  const int k = stencil_span(step, clip.frame_rate);
  MotionClip out = clip;

  auto window = [&](int i) { return std::pair{std::max(0, i - k), std::min(n - 1, i + k)}; };

  for (int i = 0; i < n; ++i) {
    const auto [lo, hi] = window(i);
    const double span = clip.frames[hi].time - clip.frames[lo].time;
    const auto& a = clip.frames[lo].pose;
    const auto& b = clip.frames[hi].pose;
    out.frames[i].rates.joint_velocities = (b.joints - a.joints) / span;
    out.frames[i].rates.root_angular_velocity =
        quat_log(a.root_orientation.conjugate() * b.root_orientation) / span;
  }
  for (int i = 0; i < n; ++i) {
    const auto [lo, hi] = window(i);
    const double span = clip.frames[hi].time - clip.frames[lo].time;
    const auto& a = out.frames[lo].rates;
    const auto& b = out.frames[hi].rates;
    out.frames[i].accel.joint_velocities = (b.joint_velocities - a.joint_velocities) / span;
    out.frames[i].accel.root_angular_velocity =
        (b.root_angular_velocity - a.root_angular_velocity) / span;
  }
  return out;
}

std::vector<Eigen::VectorXd> differentiate_sequence(const std::vector<Eigen::VectorXd>& values,
                                                    double frame_rate, double step) {
  const int n = static_cast<int>(values.size());
  if (n < 3) throw Error(ErrorCode::kTooShort, "differentiation needs at least 3 samples");
  const int k = stencil_span(step, frame_rate);
  std::vector<Eigen::VectorXd> out(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - k);
    const int hi = std::min(n - 1, i + k);
    out[i] = (values[hi] - values[lo]) * (frame_rate / (hi - lo));
  }
  return out;
}

void differentiate_human(HumanClip& clip, double frame_rate, double step) {
  std::vector<Eigen::VectorXd> q(clip.size());
  for (size_t i = 0; i < clip.size(); ++i) q[i] = clip[i].q;
  const auto qd = differentiate_sequence(q, frame_rate, step);
  const auto qdd = differentiate_sequence(qd, frame_rate, step);
  for (size_t i = 0; i < clip.size(); ++i) {
    clip[i].qd = qd[i];
    clip[i].qdd = qdd[i];
  }
}

double quaternion_distance(const Quat& a, const Quat& b) {
  const double dot = a.coeffs().dot(b.coeffs());
  return std::acos(std::clamp(2.0 * dot * dot - 1.0, -1.0, 1.0));
}

MotionClip inject_noise(const MotionClip& clip, double magnitude, Rng& rng) {
  if (magnitude < 0.0) throw Error(ErrorCode::kInvalidArgument, "noise magnitude must be >= 0");
  if (magnitude == 0.0 || clip.empty()) return clip;

  // Five-tap Gaussian kernel scaled to unit energy so the smoothed noise keeps
  // the requested standard deviation.
  constexpr int kHalf = 2;
  std::array<double, 2 * kHalf + 1> kernel{};
  double energy = 0.0;
  for (int i = -kHalf; i <= kHalf; ++i) {
    kernel[i + kHalf] = std::exp(-0.5 * i * i);
    energy += kernel[i + kHalf] * kernel[i + kHalf];
  }
  for (double& w : kernel) w /= std::sqrt(energy);

  const int n = static_cast<int>(clip.size());
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd white(kNumJoints, n + 2 * kHalf);
  for (int c = 0; c < white.cols(); ++c) {
    for (int j = 0; j < kNumJoints; ++j) white(j, c) = gauss(rng);
  }

  MotionClip out = clip;
  for (int i = 0; i < n; ++i) {
    JointVector smoothed = JointVector::Zero();
    for (int t = 0; t <= 2 * kHalf; ++t) smoothed += kernel[t] * white.col(i + t);
    out.frames[i].pose.joints += magnitude * smoothed;
  }
  return n >= 3 ? finite_difference(out) : out;
}

Pose rate_limit(const Pose& prev, const Pose& proposed, double dt, double limit) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rate_limit needs dt > 0");
  Pose out = proposed;
  const double max_step = limit * dt;
  for (int i = 0; i < kNumJoints; ++i) {
    const double p = prev.joints[i];
    const double delta = proposed.joints[i] - p;
    if (std::abs(delta) <= max_step && std::abs(delta) / dt <= limit) continue;
    double q = p + std::clamp(delta, -max_step, max_step);
    // Rounding in p + step can overshoot by an ulp; walk back until the
    // realised rate honours the limit.
    while (std::abs(q - p) / dt > limit) q = std::nextafter(q, p);
    out.joints[i] = q;
  }
  return out;
}

nlohmann::json frame_to_json(const MotionFrame& f, bool with_rates) {
  nlohmann::json j;
  j["t"] = f.time;
  j["root_pos"] = vec_of(f.pose.root_position);
  const Quat& q = f.pose.root_orientation;
  j["root_quat"] = {q.w(), q.x(), q.y(), q.z()};
  j["joints"] = vec_of(f.pose.joints);
  if (f.contact_labels) j["contacts"] = *f.contact_labels;
  if (with_rates) {
    j["root_ang_vel"] = vec_of(f.rates.root_angular_velocity);
    j["joint_vel"] = vec_of(f.rates.joint_velocities);
    j["root_ang_acc"] = vec_of(f.accel.root_angular_velocity);
    j["joint_acc"] = vec_of(f.accel.joint_velocities);
  }
  return j;
}

MotionFrame frame_from_json(const nlohmann::json& j) {
  MotionFrame f;
  try {
    f.time = j.at("t").get<double>();
    f.pose.root_position = fixed_from<3>(j, "root_pos");
    const auto wxyz = fixed_from<4>(j, "root_quat");
    f.pose.root_orientation = Quat(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
    f.pose.joints = fixed_from<kNumJoints>(j, "joints");
    if (j.contains("contacts")) {
      const auto c = fixed_from<kNumLegs>(j, "contacts");
      f.contact_labels = ContactLabels{c[0], c[1], c[2], c[3]};
    }
    if (j.contains("joint_vel")) {
      f.rates.root_angular_velocity = fixed_from<3>(j, "root_ang_vel");
      f.rates.joint_velocities = fixed_from<kNumJoints>(j, "joint_vel");
      f.accel.root_angular_velocity = fixed_from<3>(j, "root_ang_acc");
      f.accel.joint_velocities = fixed_from<kNumJoints>(j, "joint_acc");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("bad motion frame: ") + e.what());
  }
  return f;
}

void write_clip_jsonl(std::ostream& out, const MotionClip& clip, bool with_rates) {
  for (const auto& f : clip.frames) out << frame_to_json(f, with_rates).dump() << '\n';
}

void save_clip(const std::filesystem::path& path, const MotionClip& clip, bool with_rates) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_clip_jsonl(out, clip, with_rates);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

MotionClip read_clip_jsonl(std::istream& in, double frame_rate) {
  MotionClip clip;
  clip.frame_rate = frame_rate;
  std::string line;
  bool all_rates = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kCorruptFile, std::string("bad JSON line: ") + e.what());
    }
    all_rates = all_rates && j.contains("joint_vel");
    clip.frames.push_back(frame_from_json(j));
  }
  if (clip.frames.size() >= 2) {
    clip.frame_rate = 1.0 / (clip.frames[1].time - clip.frames[0].time);
    // Snap to the nominal rate when the file was written at it.
    if (std::abs(clip.frame_rate - frame_rate) < 1e-6) clip.frame_rate = frame_rate;
  }
  clip.validate();
  if (!all_rates && clip.size() >= 3) clip = finite_difference(clip);
  return clip;
}

MotionClip load_clip(const std::filesystem::path& path, double frame_rate) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return read_clip_jsonl(in, frame_rate);
}

nlohmann::json human_frame_to_json(const HumanFrame& f) {
  return {{"t", f.time}, {"q", vec_of(f.q)}, {"dq", vec_of(f.qd)}, {"ddq", vec_of(f.qdd)}};
}

HumanFrame human_frame_from_json(const nlohmann::json& j) {
  HumanFrame f;
  try {
    f.time = j.at("t").get<double>();
    f.q = fixed_from<HumanFrame::kFeatureDim>(j, "q");
    f.qd = fixed_from<HumanFrame::kFeatureDim>(j, "dq");
    f.qdd = fixed_from<HumanFrame::kFeatureDim>(j, "ddq");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("bad human frame: ") + e.what());
  }
  return f;
}

void save_human_clip(const std::filesystem::path& path, const HumanClip& clip) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& f : clip) out << human_frame_to_json(f).dump() << '\n';
}

HumanClip load_human_clip(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  HumanClip clip;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      clip.push_back(human_frame_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kCorruptFile, std::string("bad JSON line: ") + e.what());
    }
  }
  return clip;
}

}  // namespace quadmimic
