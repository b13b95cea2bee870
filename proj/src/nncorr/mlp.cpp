#include "meshmotion/nncorr/mlp.hpp"

#include "meshmotion/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace meshmotion {

std::vector<int> mlp_default_widths() { return {8, 128, 128, 128, 128, 128, 128, 2}; }

std::vector<int> depth_sweep_widths(int hidden_layers) {
  static const int widths[] = {284, 202, 165, 143, 128};
  if (hidden_layers < 2 || hidden_layers > 6) throw std::invalid_argument("depth sweep covers 2 to 6 hidden layers");
  std::vector<int> w{8};
  for (int i = 0; i < hidden_layers; ++i) w.push_back(widths[hidden_layers - 2]);
  w.push_back(2);
  return w;
}

MlpParams MlpParams::zeros(const std::vector<int>& widths) {
  if (widths.size() < 2) throw std::invalid_argument("mlp needs at least input and output widths");
  MlpParams p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    p.weights.push_back(Eigen::MatrixXd::Zero(widths[l + 1], widths[l]));
    p.biases.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
  }
  p.mu = Eigen::VectorXd::Zero(widths.front());
  p.sigma = Eigen::VectorXd::Ones(widths.front());
  return p;
}

MlpParams MlpParams::random(std::uint64_t seed, const std::vector<int>& widths) {
  MlpParams p = zeros(widths);
  CounterRng rng(seed, 0x31);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
    for (Eigen::Index i = 0; i < p.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < p.weights[l].cols(); ++j) p.weights[l](i, j) = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) p.biases[l][i] = rng.uniform(-bound, bound);
  }
  return p;
}

std::vector<int> MlpParams::widths() const {
  std::vector<int> w;
  if (weights.empty()) return w;
  w.push_back(static_cast<int>(weights.front().cols()));
  for (const auto& m : weights) w.push_back(static_cast<int>(m.rows()));
  return w;
}

int MlpParams::num_parameters() const {
  int n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += static_cast<int>(weights[l].size() + biases[l].size());
  return n;
}

Eigen::VectorXd MlpParams::flatten() const {
  Eigen::VectorXd theta(num_parameters());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index i = 0; i < weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weights[l].cols(); ++j) theta[k++] = weights[l](i, j);
    theta.segment(k, biases[l].size()) = biases[l];
    k += biases[l].size();
  }
  return theta;
}

void MlpParams::unflatten(const Eigen::VectorXd& theta) {
  if (theta.size() != num_parameters()) throw std::invalid_argument("mlp: parameter vector has the wrong size");
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Eigen::Index i = 0; i < weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < weights[l].cols(); ++j) weights[l](i, j) = theta[k++];
    biases[l] = theta.segment(k, biases[l].size());
    k += biases[l].size();
  }
}

void MlpParams::validate() const {
  if (weights.empty() || weights.size() != biases.size()) throw std::invalid_argument("mlp: malformed layers");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (biases[l].size() != weights[l].rows()) throw std::invalid_argument("mlp: bias size mismatch");
    if (l > 0 && weights[l].cols() != weights[l - 1].rows()) throw std::invalid_argument("mlp: layer widths do not chain");
  }
  if (mu.size() != weights.front().cols() || sigma.size() != mu.size())
    throw std::invalid_argument("mlp: normalisation size mismatch");
  for (Eigen::Index j = 0; j < sigma.size(); ++j)
    if (!(sigma[j] > 0.0)) throw std::invalid_argument("mlp: sigma must be positive");
}

const Eigen::MatrixXd& mlp_forward(const MlpParams& params, const Eigen::MatrixXd& features, MlpWorkspace& ws) {
  if (features.rows() != params.mu.size()) throw std::invalid_argument("mlp: wrong number of input features");
  const std::size_t depth = params.weights.size();
  ws.activations.resize(depth);
  ws.activations[0] = (features.colwise() - params.mu).array().colwise() / params.sigma.array();
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    ws.activations[l + 1].noalias() = params.weights[l] * ws.activations[l];
    ws.activations[l + 1] = (ws.activations[l + 1].colwise() + params.biases[l]).cwiseMax(0.0);
  }
  ws.output.noalias() = params.weights.back() * ws.activations.back();
  ws.output.colwise() += params.biases.back();
  return ws.output;
}

Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& features) {
  MlpWorkspace ws;
  return mlp_forward(params, features, ws);
}

Eigen::Vector2d mlp_forward(const MlpParams& params, const Eigen::VectorXd& features) {
  const Eigen::MatrixXd out = mlp_forward(params, Eigen::MatrixXd(features));
  if (out.rows() != 2) throw std::invalid_argument("mlp: expected two outputs");
  return out.col(0);
}

void mlp_backward(const MlpParams& params, const MlpWorkspace& ws, const Eigen::MatrixXd& d_out, MlpParams& grad) {
  const std::size_t depth = params.weights.size();
  grad.weights.resize(depth);
  grad.biases.resize(depth);
  Eigen::MatrixXd delta = d_out;
  for (std::size_t l = depth; l-- > 0;) {
    grad.weights[l].noalias() = delta * ws.activations[l].transpose();
    grad.biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = params.weights[l].transpose() * delta;
    delta = (ws.activations[l].array() > 0.0).select(back, 0.0);
  }
}

Json mlp_to_json(const MlpParams& params) {
  Json weights = Json::array(), biases = Json::array();
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < params.weights[l].rows(); ++i) {
      rows.push_back(std::vector<double>(params.weights[l].cols()));
      for (Eigen::Index j = 0; j < params.weights[l].cols(); ++j) rows.back()[j] = params.weights[l](i, j);
    }
    weights.push_back(std::move(rows));
    biases.push_back(std::vector<double>(params.biases[l].data(), params.biases[l].data() + params.biases[l].size()));
  }
  return Json{{"widths", params.widths()},
              {"weights", std::move(weights)},
              {"biases", std::move(biases)},
              {"mu", std::vector<double>(params.mu.data(), params.mu.data() + params.mu.size())},
              {"sigma", std::vector<double>(params.sigma.data(), params.sigma.data() + params.sigma.size())}};
}

MlpParams mlp_from_json(const Json& j) {
  MlpParams p = MlpParams::zeros(j.at("widths").get<std::vector<int>>());
  const Json& weights = j.at("weights");
  const Json& biases = j.at("biases");
  if (weights.size() != p.weights.size() || biases.size() != p.biases.size())
    throw std::invalid_argument("mlp json: layer count does not match widths");
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    if (weights[l].size() != static_cast<std::size_t>(p.weights[l].rows()) ||
        biases[l].size() != static_cast<std::size_t>(p.biases[l].size()))
      throw std::invalid_argument("mlp json: layer shape does not match widths");
    for (Eigen::Index r = 0; r < p.weights[l].rows(); ++r) {
      const auto row = weights[l][r].get<std::vector<double>>();
      if (row.size() != static_cast<std::size_t>(p.weights[l].cols()))
        throw std::invalid_argument("mlp json: row length does not match widths");
      for (Eigen::Index c = 0; c < p.weights[l].cols(); ++c) p.weights[l](r, c) = row[c];
    }
    const auto b = biases[l].get<std::vector<double>>();
    p.biases[l] = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
  const auto mu = j.at("mu").get<std::vector<double>>();
  const auto sigma = j.at("sigma").get<std::vector<double>>();
  p.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
  p.sigma = Eigen::Map<const Eigen::VectorXd>(sigma.data(), static_cast<Eigen::Index>(sigma.size()));
  p.validate();
  return p;
}

}  // namespace meshmotion
