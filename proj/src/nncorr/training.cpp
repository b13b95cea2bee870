#include "meshmotion/nncorr/training.hpp"

#include "meshmotion/rng.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace meshmotion {

namespace {

constexpr Eigen::Index kChunk = 8192;

// Columns with a positive mask; others carry no correction.
std::vector<int> active_vertices(const Eigen::VectorXd& mask) {
  std::vector<int> out;
  for (Eigen::Index v = 0; v < mask.size(); ++v)
    if (mask[v] > 0.0) out.push_back(static_cast<int>(v));
  return out;
}

void add_into(MlpParams& acc, const MlpParams& g) {
  for (std::size_t l = 0; l < acc.weights.size(); ++l) {
    acc.weights[l] += g.weights[l];
    acc.biases[l] += g.biases[l];
  }
}

}  // namespace

NNCorrSample make_nncorr_sample(const Field& harmonic, const Field& clement, const Field& target) {
  return {nncorr_features(harmonic, clement), vertex_matrix(harmonic), vertex_matrix(target)};
}

void NNCorrTrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("nncorr training: batch size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("nncorr training: epochs must be >= 1");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("nncorr training: weight decay must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("nncorr training: learning rate must be positive");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) throw std::invalid_argument("nncorr training: bad plateau factor");
  if (plateau_patience < 0) throw std::invalid_argument("nncorr training: patience must be >= 0");
}

PlateauScheduler::PlateauScheduler(double lr, double factor, int patience, double threshold)
    : lr_(lr), factor_(factor), threshold_(threshold), patience_(patience),
      best_(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::step(double metric) {
  if (metric < best_ * (1.0 - threshold_)) {
    best_ = metric;
    bad_ = 0;
  } else if (++bad_ > patience_) {
    lr_ *= factor_;
    bad_ = 0;
  }
  return lr_;
}

void fit_normalisation(MlpParams& params, const std::vector<NNCorrSample>& samples, const std::vector<int>& indices) {
  if (indices.empty()) throw std::invalid_argument("normalisation: empty training split");
  const Eigen::Index f = samples[indices.front()].features.rows();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(f), sq = Eigen::VectorXd::Zero(f);
  double n = 0.0;
  for (int i : indices) {
    sum += samples[i].features.rowwise().sum();
    n += static_cast<double>(samples[i].features.cols());
  }
  const Eigen::VectorXd mean = sum / n;
  for (int i : indices) sq += (samples[i].features.colwise() - mean).rowwise().squaredNorm();
  params.mu = mean;
  params.sigma = (sq / n).cwiseSqrt();
  for (Eigen::Index j = 0; j < f; ++j)
    if (!(params.sigma[j] > 0.0)) params.sigma[j] = 1.0;
}

double nncorr_loss(const MlpParams& params, const std::vector<NNCorrSample>& samples, const std::vector<int>& indices,
                   const Eigen::VectorXd& mask, MlpParams* grad) {
  if (indices.empty()) throw std::invalid_argument("nncorr loss: no samples");
  const std::vector<int> active = active_vertices(mask);
  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  const double scale = 1.0 / static_cast<double>(indices.size());
  if (grad) {
    *grad = params;
    for (std::size_t l = 0; l < grad->weights.size(); ++l) {
      grad->weights[l].setZero();
      grad->biases[l].setZero();
    }
  }
  // Gather (sample, vertex) columns in chunks.
  const Eigen::Index total = na * static_cast<Eigen::Index>(indices.size());
  double loss = 0.0;
  MlpWorkspace ws;
  MlpParams part;
  for (Eigen::Index start = 0; start < total; start += kChunk) {
    const Eigen::Index m = std::min(kChunk, total - start);
    Eigen::MatrixXd x(kNNCorrFeatures, m), base(2, m);
    Eigen::VectorXd l(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index flat = start + k;
      const NNCorrSample& s = samples[indices[flat / na]];
      const int v = active[flat % na];
      x.col(k) = s.features.col(v);
      base.col(k) = s.harmonic.col(v) - s.target.col(v);
      l[k] = mask[v];
    }
    const Eigen::MatrixXd& out = mlp_forward(params, x, ws);
    Eigen::MatrixXd r = base + out * l.asDiagonal();
    loss += r.cwiseAbs().sum();
    if (grad) {
      const Eigen::MatrixXd d = (r.array().sign().matrix() * l.asDiagonal()) * scale;
      mlp_backward(params, ws, d, part);
      add_into(*grad, part);
    }
  }
  // boundary and other masked-out vertices contribute a constant
  for (int i : indices) {
    const NNCorrSample& s = samples[i];
    for (Eigen::Index v = 0; v < mask.size(); ++v)
      if (!(mask[v] > 0.0)) loss += (s.harmonic.col(v) - s.target.col(v)).cwiseAbs().sum();
  }
  return loss * scale;
}

NNCorrTrainResult train_nncorr(const std::vector<NNCorrSample>& samples, const Eigen::VectorXd& mask,
                               const std::vector<int>& train, const std::vector<int>& validation,
                               const MlpParams& initial, const NNCorrTrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw std::invalid_argument("nncorr training: empty training split");
  NNCorrTrainResult result;
  MlpParams p = initial;
  fit_normalisation(p, samples, train);
  p.validate();

  MlpParams m = p, v = p;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    m.weights[l].setZero();
    m.biases[l].setZero();
    v.weights[l].setZero();
    v.biases[l].setZero();
  }
  PlateauScheduler scheduler(cfg.learning_rate, cfg.plateau_factor, cfg.plateau_patience, cfg.plateau_threshold);
  CounterRng rng(cfg.seed, 0xba7c);
  std::vector<int> order = train;
  MlpParams grad;
  long step = 0;

  auto adamw = [&](Eigen::Ref<Eigen::MatrixXd> w, const Eigen::MatrixXd& g, Eigen::Ref<Eigen::MatrixXd> m1,
                   Eigen::Ref<Eigen::MatrixXd> m2, double lr, double c1, double c2) {
    w *= 1.0 - lr * cfg.weight_decay;
    m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * g;
    m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * g.cwiseAbs2();
    w.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.eps);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = scheduler.learning_rate();
    result.learning_rate.push_back(lr);
    shuffle(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::vector<int> batch(order.begin() + static_cast<std::ptrdiff_t>(b),
                                   order.begin() + static_cast<std::ptrdiff_t>(
                                                       std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size))));
      epoch_loss += nncorr_loss(p, samples, batch, mask, &grad) * static_cast<double>(batch.size());
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < p.weights.size(); ++l) {
        adamw(p.weights[l], grad.weights[l], m.weights[l], v.weights[l], lr, c1, c2);
        adamw(p.biases[l], grad.biases[l], m.biases[l], v.biases[l], lr, c1, c2);
      }
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    double metric = result.train_loss.back();
    if (!validation.empty()) {
      result.val_loss.push_back(nncorr_loss(p, samples, validation, mask));
      metric = result.val_loss.back();
    }
    scheduler.step(metric);
  }
  result.params = std::move(p);
  return result;
}

Json nncorr_train_config_to_json(const NNCorrTrainConfig& cfg) {
  return Json{{"batch_size", cfg.batch_size},
              {"epochs", cfg.epochs},
              {"learning_rate", cfg.learning_rate},
              {"weight_decay", cfg.weight_decay},
              {"betas", {cfg.beta1, cfg.beta2}},
              {"eps", cfg.eps},
              {"plateau_factor", cfg.plateau_factor},
              {"plateau_patience", cfg.plateau_patience},
              {"plateau_threshold", cfg.plateau_threshold},
              {"seed", cfg.seed}};
}

NNCorrTrainConfig nncorr_train_config_from_json(const Json& j) {
  NNCorrTrainConfig cfg;
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
  if (j.contains("betas")) {
    cfg.beta1 = j.at("betas").at(0).get<double>();
    cfg.beta2 = j.at("betas").at(1).get<double>();
  }
  cfg.eps = j.value("eps", cfg.eps);
  cfg.plateau_factor = j.value("plateau_factor", cfg.plateau_factor);
  cfg.plateau_patience = j.value("plateau_patience", cfg.plateau_patience);
  cfg.plateau_threshold = j.value("plateau_threshold", cfg.plateau_threshold);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

}  // namespace meshmotion
