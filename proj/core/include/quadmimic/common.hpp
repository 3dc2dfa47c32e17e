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

#ifndef QUADMIMIC_COMMON_HPP_
#define QUADMIMIC_COMMON_HPP_

#include <array>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace quadmimic {

inline constexpr int kNumLegs = 4;
inline constexpr int kJointsPerLeg = 3;
inline constexpr int kNumJoints = kNumLegs * kJointsPerLeg;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using JointVector = Eigen::Matrix<double, kNumJoints, 1>;
using FootArray = std::array<Vec3, kNumLegs>;
using ContactFlags = std::array<bool, kNumLegs>;
using ContactLabels = std::array<double, kNumLegs>;

// Every stochastic routine takes an explicit engine so runs are reproducible.
using Rng = std::mt19937_64;

// SplitMix64 mixing of a base seed with stream keys, so per-item RNG streams
// do not depend on generation order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x632be59bd9b4e019ull));
}

// Legs are ordered front-right, front-left, rear-right, rear-left.
enum class Leg : int { kFR = 0, kFL = 1, kRR = 2, kRL = 3 };

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

enum class ErrorCode {
  kInvalidArgument,
  kTooShort,
  kUnreachable,
  kNoGoalFound,
  kGaitInfeasible,
  kShapeMismatch,
  kCorruptFile,
  kVersionMismatch,
  kFileNotFound,
  kIo,
  kInsufficientData,
  kEmptyIndex,
  kSameState,
  kEmptyTasks,
  kNumericFailure,
};

const char* error_code_name(ErrorCode code);

// Library-wide exception. The code lets callers (and the CLI exit-code
// mapping) dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace quadmimic

#endif  // QUADMIMIC_COMMON_HPP_
