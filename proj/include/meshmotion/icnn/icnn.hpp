#pragma once

#include "meshmotion/mesh/io.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace meshmotion::icnn {

/// Raw parameters θ of the input-convex network Λ̃(θ, s): 1 -> hidden ... -> 1.
/// Effective weights are the entrywise squares of the raw weights; hidden
/// layers use softplus, the output layer is linear with zero bias.
struct IcnnParams {
  std::vector<Eigen::MatrixXd> weights;  // layer l: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> biases;   // hidden layers only
  double eta1 = 0.01;
  double eta2 = 10.0;
  double epsilon = 1e-3;
  bool use_second_bump = false;

  static IcnnParams zeros(const std::vector<int>& widths = {1, 5, 5, 1});
  // Raw weights ~ U(-scale, scale), biases ~ U(-scale, scale).
  static IcnnParams random(std::uint64_t seed, double scale = 1.0, const std::vector<int>& widths = {1, 5, 5, 1});

  std::vector<int> widths() const;
  int num_parameters() const;
  // Weights (row-major) then biases, layer by layer.
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& theta);
  void validate() const;
};

double softplus(double x);
double sigmoid(double x);
// ε ln(1 + e^{t/ε}), evaluated without overflow.
double smooth_plus(double t, double epsilon);

struct IcnnValue {
  double value;   // Λ̃
  double d1;      // dΛ̃/ds
  double d2;      // d²Λ̃/ds²
};

IcnnValue icnn_evaluate(const IcnnParams& params, double s);
double icnn_eval(const IcnnParams& params, double s);
double icnn_derivative(const IcnnParams& params, double s);

// dΛ̃/ds and its gradient with respect to the flattened raw parameters.
double icnn_derivative_gradient(const IcnnParams& params, double s, Eigen::VectorXd& gradient);

/// α(θ, s) = 1 + (s - η1)_{+,ε} dΛ̃/ds (+ (s - η2)_{+,ε} with the second bump).
double alpha_eval(const IcnnParams& params, double s);
// dα/ds.
double alpha_derivative(const IcnnParams& params, double s);

Json icnn_to_json(const IcnnParams& params);
IcnnParams icnn_from_json(const Json& j);

}  // namespace meshmotion::icnn
