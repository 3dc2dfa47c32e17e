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

#ifndef QUADMIMIC_MOTION_HPP_
#define QUADMIMIC_MOTION_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadmimic/common.hpp"
#include "quadmimic/kinematics.hpp"

namespace quadmimic {

struct MotionFrame {
  double time = 0.0;
  Pose pose;
  PoseRates rates;
  PoseRates accel;
  std::optional<ContactLabels> contact_labels;
};

struct MotionClip {
  std::vector<MotionFrame> frames;
  double frame_rate = 30.0;

  size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  double dt() const { return 1.0 / frame_rate; }
  double duration() const { return frames.empty() ? 0.0 : frames.back().time - frames.front().time; }

  // Strictly increasing, uniformly spaced timestamps and labels in [0,1].
  void validate() const;
};

// Human features: root quaternion (4), chest quaternion relative to the root
// (4), then elbows, hands, knees and feet (8 keypoints x 3) normalised by
// limb length. Derivatives share the layout.
struct HumanFrame {
  static constexpr int kFeatureDim = 32;
  static constexpr int kTripletDim = 3 * kFeatureDim;
  using Features = Eigen::Matrix<double, kFeatureDim, 1>;

  double time = 0.0;
  Features q = Features::Zero();
  Features qd = Features::Zero();
  Features qdd = Features::Zero();

  Eigen::VectorXd triplet() const;
  // (q, qd): the contact network's input.
  Eigen::VectorXd pose_and_velocity() const;
};

using HumanClip = std::vector<HumanFrame>;

// Difference span used for every derivative estimate, in seconds.
inline constexpr double kDerivativeStep = 0.1;

// Fills rates and accelerations. Differences span round(step * frame_rate)
// frames (central in the interior, one-sided near the ends); orientation
// rates are body-frame angular velocities from the relative quaternion.
MotionClip finite_difference(const MotionClip& clip, double step = kDerivativeStep);

// Same stencil applied to a generic sequence of feature vectors.
std::vector<Eigen::VectorXd> differentiate_sequence(const std::vector<Eigen::VectorXd>& values,
                                                    double frame_rate,
                                                    double step = kDerivativeStep);
void differentiate_human(HumanClip& clip, double frame_rate, double step = kDerivativeStep);

// arccos(2<a,b>^2 - 1), in [0, pi].
double quaternion_distance(const Quat& a, const Quat& b);

// Adds Gaussian noise with standard deviation `magnitude` to the joint angles,
// smoothed over five frames, then recomputes derivatives.
MotionClip inject_noise(const MotionClip& clip, double magnitude, Rng& rng);

// Caps each joint's step from `prev` to limit*dt. Root state passes through.
Pose rate_limit(const Pose& prev, const Pose& proposed, double dt, double limit);

// JSON-lines clip format, one frame per line.
nlohmann::json frame_to_json(const MotionFrame& frame, bool with_rates);
MotionFrame frame_from_json(const nlohmann::json& j);
void write_clip_jsonl(std::ostream& out, const MotionClip& clip, bool with_rates = true);
void save_clip(const std::filesystem::path& path, const MotionClip& clip, bool with_rates = true);
// Rates are recomputed unless every frame carries them.
MotionClip read_clip_jsonl(std::istream& in, double frame_rate = 30.0);
MotionClip load_clip(const std::filesystem::path& path, double frame_rate = 30.0);

nlohmann::json human_frame_to_json(const HumanFrame& frame);
HumanFrame human_frame_from_json(const nlohmann::json& j);
void save_human_clip(const std::filesystem::path& path, const HumanClip& clip);
HumanClip load_human_clip(const std::filesystem::path& path);

}  // namespace quadmimic

#endif  // QUADMIMIC_MOTION_HPP_
