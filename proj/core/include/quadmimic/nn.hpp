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

#ifndef QUADMIMIC_NN_HPP_
#define QUADMIMIC_NN_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "quadmimic/common.hpp"

namespace quadmimic {

enum class Activation { kLeakyReLU, kReLU, kTanh, kSigmoid, kLinear };

inline constexpr double kLeakySlope = 0.01;

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct LayerSpec {
  int width = 1;
  Activation activation = Activation::kLinear;
  bool operator==(const LayerSpec&) const = default;
};

struct MlpSpec {
  int input_size = 1;
  std::vector<LayerSpec> layers;

  void validate() const;
  int output_size() const { return layers.empty() ? input_size : layers.back().width; }
  bool operator==(const MlpSpec&) const = default;
};

// Weights are (out x in); a batch is one sample per column.
struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpParams zeros_like(const MlpSpec& spec);
  size_t count() const;
  bool all_finite() const;
  double squared_norm() const;
  void scale(double s);
  void add(const MlpParams& other, double s = 1.0);
};

struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;  // input of each layer
  std::vector<Eigen::MatrixXd> outputs;  // post-activation output of each layer
};

class Mlp {
 public:
  Mlp() = default;
  // He init for ReLU-family layers, Xavier otherwise; zero biases.
  Mlp(const MlpSpec& spec, Rng& rng);
  Mlp(const MlpSpec& spec, MlpParams params);

  const MlpSpec& spec() const { return spec_; }
  const MlpParams& params() const { return params_; }
  MlpParams& params() { return params_; }
  int input_size() const { return spec_.input_size; }
  int output_size() const { return spec_.output_size(); }

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch, MlpCache& cache) const;

  // Gradients are summed over the batch columns.
  MlpParams backward(const MlpCache& cache, const Eigen::MatrixXd& output_grad,
                     Eigen::MatrixXd* input_grad = nullptr) const;

 private:
  MlpSpec spec_;
  MlpParams params_;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamOptions options;
  long step = 0;
  MlpParams m, v;

  static AdamState for_spec(const MlpSpec& spec, const AdamOptions& options = {});
};

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state);

// Largest relative error between backward() and central differences of
// sum(output .* probe), over every parameter and input entry.
double gradient_check(const Mlp& net, const Eigen::MatrixXd& batch, Rng& rng, double eps = 1e-5);

struct Checkpoint {
  static constexpr int kVersion = 1;
  Mlp net;
  std::optional<AdamState> adam;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json mlp_to_json(const Mlp& net, const AdamState* adam = nullptr);
Mlp mlp_from_json(const nlohmann::json& j, std::optional<AdamState>* adam = nullptr);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Versioned JSON document helpers shared by every checkpoint kind.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_versioned_json(const std::filesystem::path& path, const std::string& format,
                                   int version);

}  // namespace quadmimic

#endif  // QUADMIMIC_NN_HPP_
