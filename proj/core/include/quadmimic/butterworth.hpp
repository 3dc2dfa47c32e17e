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

#ifndef QUADMIMIC_BUTTERWORTH_HPP_
#define QUADMIMIC_BUTTERWORTH_HPP_

#include <Eigen/Dense>

namespace quadmimic {

// Second-order low-pass designed by the bilinear transform with frequency
// prewarping, applied independently to each channel.
class ButterworthFilter {
 public:
  ButterworthFilter(int channels, double cutoff_hz = 5.0, double sample_hz = 30.0);

  // The first sample after construction or reset() primes the filter at
  // steady state, so a constant stream passes through unchanged.
  Eigen::VectorXd filter(const Eigen::VectorXd& x);
  void reset() { primed_ = false; }

  double b0() const { return b0_; }
  double b1() const { return b1_; }
  double b2() const { return b2_; }
  double a1() const { return a1_; }
  double a2() const { return a2_; }
  // |H(e^{jw})| at frequency f.
  double gain(double frequency_hz) const;

 private:
  int channels_;
  double sample_hz_;
  double b0_, b1_, b2_, a1_, a2_;
  Eigen::VectorXd z1_, z2_;
  bool primed_ = false;
};

}  // namespace quadmimic

#endif  // QUADMIMIC_BUTTERWORTH_HPP_
