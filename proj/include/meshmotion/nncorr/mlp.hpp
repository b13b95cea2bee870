#pragma once

#include "meshmotion/mesh/io.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace meshmotion {

// 8 inputs, six hidden layers of width 128, 2 outputs.
std::vector<int> mlp_default_widths();
// Equal-width hidden layers for depth 2..6 with about the parameter count
// of the default network (widths 284, 202, 165, 143, 128).
std::vector<int> depth_sweep_widths(int hidden_layers);

/// ReLU multilayer perceptron with a fixed input normalisation
/// x_j -> (x_j - mu_j) / sigma_j. The last layer is affine.
struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;  // out x in
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;

  static MlpParams zeros(const std::vector<int>& widths = mlp_default_widths());
  // Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); mu = 0, sigma = 1.
  static MlpParams random(std::uint64_t seed, const std::vector<int>& widths = mlp_default_widths());

  std::vector<int> widths() const;
  int num_parameters() const;
  // Per layer: weights row-major, then biases.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& theta);
  void validate() const;
};

// Activations kept for the backward pass.
struct MlpWorkspace {
  std::vector<Eigen::MatrixXd> activations;  // normalised input, then each hidden output
  Eigen::MatrixXd output;
};

// Columns are samples.
Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& features);
const Eigen::MatrixXd& mlp_forward(const MlpParams& params, const Eigen::MatrixXd& features, MlpWorkspace& ws);
Eigen::Vector2d mlp_forward(const MlpParams& params, const Eigen::VectorXd& features);

// Gradient of Σ d_out ∘ output with respect to weights and biases, in the
// shape of `params` (mu and sigma untouched).
void mlp_backward(const MlpParams& params, const MlpWorkspace& ws, const Eigen::MatrixXd& d_out, MlpParams& grad);

Json mlp_to_json(const MlpParams& params);
MlpParams mlp_from_json(const Json& j);

}  // namespace meshmotion
