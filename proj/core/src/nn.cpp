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

#include "quadmimic/nn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace quadmimic {
namespace {

void activate(Activation a, Eigen::MatrixXd& x) {
  switch (a) {
    case Activation::kLeakyReLU:
      x = x.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
      break;
    case Activation::kReLU:
      x = x.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      x = x.array().tanh();
      break;
    case Activation::kSigmoid:
      x = x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      break;
    case Activation::kLinear:
      break;
  }
}

// Derivative of the activation written in terms of its output y. For the
// ReLU family y and the pre-activation have the same sign.
void scale_by_derivative(Activation a, const Eigen::MatrixXd& y, Eigen::MatrixXd& g) {
  switch (a) {
    case Activation::kLeakyReLU:
      g = (y.array() > 0.0).select(g, kLeakySlope * g);
      break;
    case Activation::kReLU:
      g = (y.array() > 0.0).select(g, 0.0);
      break;
    case Activation::kTanh:
      g.array() *= 1.0 - y.array().square();
      break;
    case Activation::kSigmoid:
      g.array() *= y.array() * (1.0 - y.array());
      break;
    case Activation::kLinear:
      break;
  }
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw Error(ErrorCode::kCorruptFile, "matrix data does not match its shape");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r * cols + c].get<double>();
  }
  return m;
}

nlohmann::json params_to_json(const MlpParams& p) {
  nlohmann::json w = nlohmann::json::array(), b = nlohmann::json::array();
  for (size_t i = 0; i < p.weights.size(); ++i) {
    w.push_back(matrix_to_json(p.weights[i]));
    b.push_back(vector_to_json(p.biases[i]));
  }
  return {{"weights", w}, {"biases", b}};
}

MlpParams params_from_json(const nlohmann::json& j, const MlpSpec& spec) {
  MlpParams p;
  const auto& w = j.at("weights");
  const auto& b = j.at("biases");
  if (w.size() != spec.layers.size() || b.size() != spec.layers.size()) {
    throw Error(ErrorCode::kCorruptFile, "layer count does not match spec");
  }
  int fan_in = spec.input_size;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    p.weights.push_back(matrix_from_json(w[i]));
    p.biases.push_back(vector_from_json(b[i]));
    if (p.weights.back().rows() != spec.layers[i].width || p.weights.back().cols() != fan_in ||
        p.biases.back().size() != spec.layers[i].width) {
      throw Error(ErrorCode::kCorruptFile, "parameter shape does not match spec");
    }
    fan_in = spec.layers[i].width;
  }
  return p;
}

nlohmann::json spec_to_json(const MlpSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers) {
    layers.push_back({{"width", l.width}, {"activation", activation_name(l.activation)}});
  }
  return {{"input_size", spec.input_size}, {"layers", layers}};
}

MlpSpec spec_from_json(const nlohmann::json& j) {
  MlpSpec spec;
  spec.input_size = j.at("input_size").get<int>();
  for (const auto& l : j.at("layers")) {
    spec.layers.push_back({l.at("width").get<int>(),
                           activation_from_name(l.at("activation").get<std::string>())});
  }
  spec.validate();
  return spec;
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kLeakyReLU: return "leaky_relu";
    case Activation::kReLU: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kLinear: return "linear";
  }
  return "unknown";
}

Activation activation_from_name(const std::string& name) {
  for (Activation a : {Activation::kLeakyReLU, Activation::kReLU, Activation::kTanh,
                       Activation::kSigmoid, Activation::kLinear}) {
    if (name == activation_name(a)) return a;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
  if (layers.empty()) throw Error(ErrorCode::kInvalidArgument, "an MLP needs at least one layer");
  if (input_size < 1) throw Error(ErrorCode::kInvalidArgument, "input size must be >= 1");
  for (const auto& l : layers) {
    if (l.width < 1) throw Error(ErrorCode::kInvalidArgument, "layer width must be >= 1");
  }
}

MlpParams MlpParams::zeros_like(const MlpSpec& spec) {
  MlpParams p;
  int fan_in = spec.input_size;
  for (const auto& l : spec.layers) {
    p.weights.push_back(Eigen::MatrixXd::Zero(l.width, fan_in));
    p.biases.push_back(Eigen::VectorXd::Zero(l.width));
    fan_in = l.width;
  }
  return p;
}

size_t MlpParams::count() const {
  size_t n = 0;
  for (size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
  return n;
}

bool MlpParams::all_finite() const {
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!weights[i].allFinite() || !biases[i].allFinite()) return false;
  }
  return true;
}

double MlpParams::squared_norm() const {
  double s = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) s += weights[i].squaredNorm() + biases[i].squaredNorm();
  return s;
}

void MlpParams::scale(double s) {
  for (size_t i = 0; i < weights.size(); ++i) {
    weights[i] *= s;
    biases[i] *= s;
  }
}

void MlpParams::add(const MlpParams& other, double s) {
  for (size_t i = 0; i < weights.size(); ++i) {
    weights[i] += s * other.weights[i];
    biases[i] += s * other.biases[i];
  }
}

Mlp::Mlp(const MlpSpec& spec, Rng& rng) : spec_(spec) {
  spec_.validate();
  params_ = MlpParams::zeros_like(spec_);
  int fan_in = spec_.input_size;
  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    const int fan_out = spec_.layers[i].width;
    const Activation a = spec_.layers[i].activation;
    const bool relu_family = a == Activation::kReLU || a == Activation::kLeakyReLU;
    const double var = relu_family ? 2.0 / fan_in : 2.0 / (fan_in + fan_out);
    std::normal_distribution<double> gauss(0.0, std::sqrt(var));
    auto& w = params_.weights[i];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = gauss(rng);
    }
    fan_in = fan_out;
  }
}

Mlp::Mlp(const MlpSpec& spec, MlpParams params) : spec_(spec), params_(std::move(params)) {
  spec_.validate();
  const MlpParams ref = MlpParams::zeros_like(spec_);
  if (params_.weights.size() != ref.weights.size() || params_.biases.size() != ref.biases.size()) {
    throw Error(ErrorCode::kShapeMismatch, "parameter layer count does not match spec");
  }
  for (size_t i = 0; i < ref.weights.size(); ++i) {
    if (params_.weights[i].rows() != ref.weights[i].rows() ||
        params_.weights[i].cols() != ref.weights[i].cols() ||
        params_.biases[i].size() != ref.biases[i].size()) {
      throw Error(ErrorCode::kShapeMismatch, "parameter shape does not match spec");
    }
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input) const {
  return forward(Eigen::MatrixXd(input)).col(0);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& batch) const {
  if (batch.rows() != spec_.input_size) {
    throw Error(ErrorCode::kShapeMismatch, "input has " + std::to_string(batch.rows()) +
                                               " rows, network expects " +
                                               std::to_string(spec_.input_size));
  }
  Eigen::MatrixXd x = batch;
  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    Eigen::MatrixXd y = params_.weights[i] * x;
    y.colwise() += params_.biases[i];
    activate(spec_.layers[i].activation, y);
    x = std::move(y);
  }
  return x;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& batch, MlpCache& cache) const {
  if (batch.rows() != spec_.input_size) {
    throw Error(ErrorCode::kShapeMismatch, "input has " + std::to_string(batch.rows()) +
                                               " rows, network expects " +
                                               std::to_string(spec_.input_size));
  }
  cache.inputs.resize(spec_.layers.size());
  cache.outputs.resize(spec_.layers.size());
  const Eigen::MatrixXd* x = &batch;
  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    cache.inputs[i] = *x;
    Eigen::MatrixXd& y = cache.outputs[i];
    y.noalias() = params_.weights[i] * cache.inputs[i];
    y.colwise() += params_.biases[i];
    activate(spec_.layers[i].activation, y);
    x = &y;
  }
  return cache.outputs.back();
}

MlpParams Mlp::backward(const MlpCache& cache, const Eigen::MatrixXd& output_grad,
                        Eigen::MatrixXd* input_grad) const {
  const size_t n = spec_.layers.size();
  if (cache.outputs.size() != n || output_grad.rows() != cache.outputs.back().rows() ||
      output_grad.cols() != cache.outputs.back().cols()) {
    throw Error(ErrorCode::kShapeMismatch, "output gradient does not match the cached forward pass");
  }
  MlpParams grads;
  grads.weights.resize(n);
  grads.biases.resize(n);
  Eigen::MatrixXd g = output_grad;
  for (size_t k = n; k-- > 0;) {
    scale_by_derivative(spec_.layers[k].activation, cache.outputs[k], g);
    grads.weights[k].noalias() = g * cache.inputs[k].transpose();
    grads.biases[k] = g.rowwise().sum();
    if (k > 0 || input_grad != nullptr) {
      Eigen::MatrixXd next = params_.weights[k].transpose() * g;
      g = std::move(next);
    }
  }
  if (input_grad != nullptr) *input_grad = std::move(g);
  return grads;
}

AdamState AdamState::for_spec(const MlpSpec& spec, const AdamOptions& options) {
  AdamState s;
  s.options = options;
  s.m = MlpParams::zeros_like(spec);
  s.v = MlpParams::zeros_like(spec);
  return s;
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state) {
  if (grads.weights.size() != params.weights.size() || state.m.weights.size() != params.weights.size()) {
    throw Error(ErrorCode::kShapeMismatch, "adam_step shape mismatch");
  }
  const AdamOptions& o = state.options;
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseAbs2();
    p.array() -= o.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + o.epsilon);
  };
  for (size_t i = 0; i < params.weights.size(); ++i) {
    update(params.weights[i], grads.weights[i], state.m.weights[i], state.v.weights[i]);
    update(params.biases[i], grads.biases[i], state.m.biases[i], state.v.biases[i]);
  }
}

double gradient_check(const Mlp& net, const Eigen::MatrixXd& batch, Rng& rng, double eps) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd probe(net.output_size(), batch.cols());
  for (Eigen::Index i = 0; i < probe.size(); ++i) probe(i) = gauss(rng);
  MlpCache cache;
  net.forward(batch, cache);
  Eigen::MatrixXd input_grad;
  const MlpParams grads = net.backward(cache, probe, &input_grad);

  auto objective = [&](const Mlp& m, const Eigen::MatrixXd& x) {
    return m.forward(x).cwiseProduct(probe).sum();
  };
  double worst = 0.0;
  auto compare = [&](double analytic, double numeric) {
    const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  };
  Mlp probe_net = net;
  for (size_t k = 0; k < grads.weights.size(); ++k) {
    for (int which = 0; which < 2; ++which) {
      const Eigen::Index count =
          which == 0 ? probe_net.params().weights[k].size() : probe_net.params().biases[k].size();
      for (Eigen::Index i = 0; i < count; ++i) {
        double& p = which == 0 ? probe_net.params().weights[k](i) : probe_net.params().biases[k](i);
        const double orig = p;
        p = orig + eps;
        const double up = objective(probe_net, batch);
        p = orig - eps;
        const double down = objective(probe_net, batch);
        p = orig;
        compare(which == 0 ? grads.weights[k](i) : grads.biases[k](i), (up - down) / (2.0 * eps));
      }
    }
  }
  Eigen::MatrixXd x = batch;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x(i);
    x(i) = orig + eps;
    const double up = objective(net, x);
    x(i) = orig - eps;
    const double down = objective(net, x);
    x(i) = orig;
    compare(input_grad(i), (up - down) / (2.0 * eps));
  }
  return worst;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json mlp_to_json(const Mlp& net, const AdamState* adam) {
  nlohmann::json j = {{"spec", spec_to_json(net.spec())}, {"params", params_to_json(net.params())}};
  if (adam != nullptr) {
    j["adam"] = {{"learning_rate", adam->options.learning_rate},
                 {"beta1", adam->options.beta1},
                 {"beta2", adam->options.beta2},
                 {"epsilon", adam->options.epsilon},
                 {"step", adam->step},
                 {"m", params_to_json(adam->m)},
                 {"v", params_to_json(adam->v)}};
  }
  return j;
}

Mlp mlp_from_json(const nlohmann::json& j, std::optional<AdamState>* adam) {
  try {
    const MlpSpec spec = spec_from_json(j.at("spec"));
    Mlp net(spec, params_from_json(j.at("params"), spec));
    if (!net.params().all_finite()) throw Error(ErrorCode::kCorruptFile, "non-finite parameters");
    if (adam != nullptr) {
      adam->reset();
      if (j.contains("adam")) {
        const auto& a = j.at("adam");
        AdamState s;
        s.options = {a.at("learning_rate").get<double>(), a.at("beta1").get<double>(),
                     a.at("beta2").get<double>(), a.at("epsilon").get<double>()};
        s.step = a.at("step").get<long>();
        s.m = params_from_json(a.at("m"), spec);
        s.v = params_from_json(a.at("v"), spec);
        *adam = std::move(s);
      }
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("bad network description: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kShapeMismatch) {
      throw Error(ErrorCode::kCorruptFile, e.what());
    }
    throw;
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

nlohmann::json read_versioned_json(const std::filesystem::path& path, const std::string& format,
                                   int version) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != format) {
    throw Error(ErrorCode::kCorruptFile, path.string() + " is not a " + format + " file");
  }
  if (!doc.contains("version") || !doc["version"].is_number_integer()) {
    throw Error(ErrorCode::kCorruptFile, path.string() + " has no version");
  }
  if (doc["version"].get<int>() != version) {
    throw Error(ErrorCode::kVersionMismatch, path.string() + " has version " +
                                                 std::to_string(doc["version"].get<int>()) +
                                                 ", expected " + std::to_string(version));
  }
  return doc;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  nlohmann::json doc = mlp_to_json(checkpoint.net, checkpoint.adam ? &*checkpoint.adam : nullptr);
  doc["format"] = "quadmimic-mlp";
  doc["version"] = Checkpoint::kVersion;
  doc["metadata"] = checkpoint.metadata;
  write_json_file(path, doc);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const nlohmann::json doc = read_versioned_json(path, "quadmimic-mlp", Checkpoint::kVersion);
  Checkpoint c;
  c.net = mlp_from_json(doc, &c.adam);
  c.metadata = doc.value("metadata", nlohmann::json::object());
  return c;
}

}  // namespace quadmimic
