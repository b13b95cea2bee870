#pragma once

#include "meshmotion/nncorr/nncorr.hpp"

#include <cstdint>
#include <vector>

namespace meshmotion {

// Vertex data of one snapshot (columns are vertices).
struct NNCorrSample {
  Eigen::MatrixXd features;  // 8 x n_v
  Eigen::MatrixXd harmonic;  // 2 x n_v
  Eigen::MatrixXd target;    // 2 x n_v
};

NNCorrSample make_nncorr_sample(const Field& harmonic, const Field& clement, const Field& target);

struct NNCorrTrainConfig {
  int batch_size = 128;
  int epochs = 200;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double plateau_factor = 0.5;
  int plateau_patience = 10;
  double plateau_threshold = 1e-4;  // relative improvement
  std::uint64_t seed = 0;

  void validate() const;
};

// Learning-rate halving on a stalled metric (relative threshold, no cooldown).
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor, int patience, double threshold);
  // Feeds one epoch metric; returns the learning rate for the next epoch.
  double step(double metric);
  double learning_rate() const { return lr_; }

 private:
  double lr_, factor_, threshold_;
  int patience_;
  double best_;
  int bad_ = 0;
};

// Per-feature mean and population standard deviation over all vertices of
// the listed samples (a zero deviation becomes 1).
void fit_normalisation(MlpParams& params, const std::vector<NNCorrSample>& samples, const std::vector<int>& indices);

/// Σ_v |u_h + ℓ N - u_b|₁ over vertices, averaged over the listed samples.
/// With `grad` the gradient of that average is written in the params layout.
double nncorr_loss(const MlpParams& params, const std::vector<NNCorrSample>& samples, const std::vector<int>& indices,
                   const Eigen::VectorXd& mask, MlpParams* grad = nullptr);

struct NNCorrTrainResult {
  MlpParams params;
  std::vector<double> train_loss;  // per epoch, mean over batches
  std::vector<double> val_loss;    // per epoch (empty without a validation split)
  std::vector<double> learning_rate;
};

/// AdamW on random batches of training snapshots with plateau halving on the
/// validation loss (training loss when there is no validation split).
/// Normalisation statistics are fitted on the training split first.
NNCorrTrainResult train_nncorr(const std::vector<NNCorrSample>& samples, const Eigen::VectorXd& mask,
                               const std::vector<int>& train, const std::vector<int>& validation,
                               const MlpParams& initial, const NNCorrTrainConfig& cfg);

Json nncorr_train_config_to_json(const NNCorrTrainConfig& cfg);
NNCorrTrainConfig nncorr_train_config_from_json(const Json& j);

}  // namespace meshmotion
