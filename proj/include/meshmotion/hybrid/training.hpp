#pragma once

#include "meshmotion/fem/sparse.hpp"
#include "meshmotion/hybrid/hybrid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace meshmotion {

enum class GradientMethod { Adjoint, FiniteDifference };

struct HybridTrainConfig {
  int subsample = 20;       // N
  double lambda = 0.0;      // weight of |θ|²
  int max_iterations = 100;
  int history = 10;
  GradientMethod gradient = GradientMethod::Adjoint;
  double fd_step = 1e-6;
  double gradient_tolerance = 1e-7;  // on |∇L|∞ relative to max(1, L)
  bool warm_start = true;
  fem::NewtonConfig newton = [] {
    fem::NewtonConfig c = hybrid_newton_defaults();
    c.atol = 1e-13;
    c.rtol = 1e-12;
    return c;
  }();

  void validate() const;
};

struct HybridSample {
  BoundaryDisplacement g;
  Field target;  // biharmonic extension of g
};

// Indices 0, s, 2s, ... (N of them) with s = max(1, ⌊n/N⌋).
std::vector<int> subsample_indices(int n, int count);

/// L(θ) = (1/N) Σ |||u_i(θ) - t_i|||² + λ |θ|² with |||v|||² = vᵀ(M + K)v on
/// the reference mesh and u_i(θ) the nonlinear hybrid extension of g_i.
/// Successful solves are cached per sample as the next Newton start.
class HybridLoss {
 public:
  HybridLoss(MeshPtr mesh, std::vector<HybridSample> samples, icnn::IcnnParams layout,
             const HybridTrainConfig& cfg);

  // +inf when a PDE solve fails.
  double value(const Eigen::VectorXd& theta);
  // Value and gradient (adjoint or central differences per the config).
  double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& gradient);
  double adjoint_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& gradient);
  Eigen::VectorXd fd_gradient(const Eigen::VectorXd& theta, double step);

  icnn::IcnnParams params(const Eigen::VectorXd& theta) const;
  int num_samples() const { return static_cast<int>(samples_.size()); }
  int evaluations() const { return evaluations_; }

 private:
  std::optional<Field> solve(int i, const icnn::IcnnParams& p);

  MeshPtr mesh_;
  std::vector<HybridSample> samples_;
  icnn::IcnnParams layout_;
  HybridTrainConfig cfg_;
  fem::SparseMatrix norm_;  // M + K
  std::vector<std::optional<Field>> warm_;
  int evaluations_ = 0;
};

struct HybridTrainResult {
  icnn::IcnnParams params;
  std::vector<double> loss_history;  // initial loss, then one entry per accepted step
  std::vector<int> subsample;
  int iterations = 0;
  int evaluations = 0;
  std::string stop_reason;
};

/// L-BFGS with Armijo backtracking on HybridLoss over the subsampled set.
HybridTrainResult train_hybrid(const MeshPtr& mesh, const std::vector<HybridSample>& samples,
                               const icnn::IcnnParams& initial, const HybridTrainConfig& cfg);

Json hybrid_train_config_to_json(const HybridTrainConfig& cfg);
HybridTrainConfig hybrid_train_config_from_json(const Json& j);

}  // namespace meshmotion
