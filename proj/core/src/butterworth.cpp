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

#include "quadmimic/butterworth.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "quadmimic/common.hpp"

namespace quadmimic {

ButterworthFilter::ButterworthFilter(int channels, double cutoff_hz, double sample_hz)
    : channels_(channels), sample_hz_(sample_hz) {
  if (channels < 1) throw Error(ErrorCode::kInvalidArgument, "filter needs at least one channel");
  if (!(cutoff_hz > 0.0 && cutoff_hz < 0.5 * sample_hz)) {
    throw Error(ErrorCode::kInvalidArgument, "cutoff must lie in (0, fs/2)");
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_hz);
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
  a1_ = 2.0 * (k * k - 1.0) * norm;
  a2_ = (1.0 - std::numbers::sqrt2 * k + k * k) * norm;
  // Derive the numerator from the denominator so the DC gain is 1 exactly.
  b0_ = 0.25 * (1.0 + a1_ + a2_);
  b1_ = 2.0 * b0_;
  b2_ = b0_;
  z1_ = Eigen::VectorXd::Zero(channels);
  z2_ = Eigen::VectorXd::Zero(channels);
}

Eigen::VectorXd ButterworthFilter::filter(const Eigen::VectorXd& x) {
  if (x.size() != channels_) throw Error(ErrorCode::kShapeMismatch, "filter channel count mismatch");
  if (!primed_) {
    z1_ = (1.0 - b0_) * x;
    z2_ = (b2_ - a2_) * x;
    primed_ = true;
  }
  // Transposed direct form II.
  Eigen::VectorXd y = b0_ * x + z1_;
  z1_ = b1_ * x - a1_ * y + z2_;
  z2_ = b2_ * x - a2_ * y;
  return y;
}

double ButterworthFilter::gain(double f) const {
  const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f / sample_hz_);
  const std::complex<double> num = b0_ + b1_ * z + b2_ * z * z;
  const std::complex<double> den = 1.0 + a1_ * z + a2_ * z * z;
  return std::abs(num / den);
}

}  // namespace quadmimic
