#include "meshmotion/icnn/counterexample.hpp"

#include "meshmotion/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace meshmotion::icnn {

double counterexample_target(double x, double y) { return std::max(std::max(x + y, 0.0), std::max(x - y, 0.0)); }

double counterexample_depth2_exact(double x, double y) {
  return std::max(0.0, x + std::max(0.0, y) + std::max(0.0, -y));
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Fully connected ReLU net 2 -> hidden... -> 1. With `sum_output` the output
// is the plain sum of the last hidden layer (no parameters).
class ReluNet {
 public:
  ReluNet(std::vector<int> hidden, bool sum_output) : hidden_(std::move(hidden)), sum_output_(sum_output) {
    int in = 2;
    for (int h : hidden_) {
      shapes_.push_back({h, in});
      in = h;
    }
    if (!sum_output_) shapes_.push_back({1, in});
    for (auto [r, c] : shapes_) size_ += r * c + r;
  }

  int size() const { return size_; }

  void init(VectorXd& theta, CounterRng& rng) const {
    theta.resize(size_);
    int k = 0;
    for (auto [r, c] : shapes_) {
      const double s = 1.0 / std::sqrt(double(c));
      for (int i = 0; i < r * c + r; ++i) theta[k++] = rng.uniform(-s, s);
    }
  }

  // Outputs for all samples (columns of x) and, optionally, the Jacobian of
  // the outputs with respect to theta (samples x params).
  VectorXd forward(const VectorXd& theta, const MatrixXd& x, MatrixXd* jac) const {
    return run(theta, x, jac, nullptr, nullptr);
  }

  // Outputs and the gradient of Σ weight_n out_n.
  VectorXd gradient(const VectorXd& theta, const MatrixXd& x, const VectorXd& weight, VectorXd& grad) const {
    return run(theta, x, nullptr, &weight, &grad);
  }

 private:
  VectorXd run(const VectorXd& theta, const MatrixXd& x, MatrixXd* jac, const VectorXd* weight,
               VectorXd* grad) const {
    std::vector<MatrixXd> acts{x}, pre;
    int k = 0;
    std::vector<int> offsets;
    for (std::size_t l = 0; l < shapes_.size(); ++l) {
      const auto [r, c] = shapes_[l];
      offsets.push_back(k);
      const Eigen::Map<const MatrixXd> w(theta.data() + k, r, c);
      const Eigen::Map<const VectorXd> b(theta.data() + k + r * c, r);
      k += r * c + r;
      MatrixXd z = (w * acts.back()).colwise() + b;
      pre.push_back(z);
      const bool last_linear = !sum_output_ && l + 1 == shapes_.size();
      acts.push_back(last_linear ? z : MatrixXd(z.cwiseMax(0.0)));
    }
    const Eigen::Index n = x.cols();
    VectorXd out = sum_output_ ? VectorXd(acts.back().colwise().sum().transpose()) : VectorXd(acts.back().row(0).transpose());
    if (!jac && !grad) return out;
    if (jac) jac->resize(n, size_);
    if (grad) grad->resize(size_);
    // delta = d out / d pre-activation of the current layer
    MatrixXd delta;
    if (sum_output_) {
      delta = (pre.back().array() > 0.0).cast<double>().matrix();
    } else {
      delta = MatrixXd::Ones(1, n);
    }
    if (weight) delta = delta.array().rowwise() * weight->transpose().array();
    for (std::size_t l = shapes_.size(); l-- > 0;) {
      const auto [r, c] = shapes_[l];
      const MatrixXd& a = acts[l];
      if (grad) {
        Eigen::Map<MatrixXd>(grad->data() + offsets[l], r, c) = delta * a.transpose();
        grad->segment(offsets[l] + r * c, r) = delta.rowwise().sum();
      } else {
        for (int i = 0; i < r; ++i) {
          for (int j = 0; j < c; ++j)
            jac->col(offsets[l] + j * r + i) = (delta.row(i).array() * a.row(j).array()).transpose();
          jac->col(offsets[l] + r * c + i) = delta.row(i).transpose();
        }
      }
      if (l == 0) break;
      const Eigen::Map<const MatrixXd> w(theta.data() + offsets[l], r, c);
      delta = ((w.transpose() * delta).array() * (pre[l - 1].array() > 0.0).cast<double>()).matrix();
    }
    return out;
  }

  std::vector<int> hidden_;
  bool sum_output_;
  std::vector<std::pair<int, int>> shapes_;
  int size_ = 0;
};

double fit(const ReluNet& net, const MatrixXd& x, const VectorXd& target, const CounterexampleConfig& cfg,
           CounterRng& rng, VectorXd& theta) {
  net.init(theta, rng);
  const double n = static_cast<double>(x.cols());
  // Adam on the mean squared error
  VectorXd m = VectorXd::Zero(theta.size()), v = VectorXd::Zero(theta.size());
  MatrixXd jac;
  VectorXd g;
  const double b1 = 0.9, b2 = 0.999;
  for (int step = 1; step <= cfg.adam_steps; ++step) {
    const VectorXd r = net.forward(theta, x, nullptr) - target;
    net.gradient(theta, x, (2.0 / n) * r, g);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g.cwiseAbs2();
    const double lr = step < 2 * cfg.adam_steps / 3 ? 1e-2 : 1e-3;
    const double c1 = 1 - std::pow(b1, step), c2 = 1 - std::pow(b2, step);
    theta -= lr * ((m / c1).array() / ((v / c2).array().sqrt() + 1e-8)).matrix();
  }
  // Levenberg-Marquardt polish
  double lambda = 1e-3;
  VectorXd r = net.forward(theta, x, &jac) - target;
  double loss = r.squaredNorm();
  for (int it = 0; it < cfg.lm_steps && lambda < 1e12; ++it) {
    const MatrixXd jtj = jac.transpose() * jac;
    const VectorXd jtr = jac.transpose() * r;
    MatrixXd a = jtj;
    a.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
    const VectorXd step = a.ldlt().solve(-jtr);
    const VectorXd trial = theta + step;
    MatrixXd jt;
    const VectorXd rt = net.forward(trial, x, &jt) - target;
    const double lt = rt.squaredNorm();
    if (std::isfinite(lt) && lt < loss) {
      const bool stalled = loss - lt <= 1e-10 * loss;
      theta = trial;
      r = rt;
      jac = std::move(jt);
      loss = lt;
      lambda = std::max(lambda / 3.0, 1e-12);
      if (stalled || loss <= 1e-26 * n) break;
    } else {
      lambda *= 4.0;
    }
  }
  return r.cwiseAbs().maxCoeff();
}

}  // namespace

CounterexampleReport counterexample_fit(const CounterexampleConfig& cfg) {
  const int g = cfg.grid;
  MatrixXd x(2, g * g);
  VectorXd target(g * g);
  CounterexampleReport report;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double px = -cfg.k + 2.0 * cfg.k * i / (g - 1), py = -cfg.k + 2.0 * cfg.k * j / (g - 1);
      x(0, i * g + j) = px;
      x(1, i * g + j) = py;
      target[i * g + j] = counterexample_target(px, py);
      report.exact_depth2_sup = std::max(report.exact_depth2_sup,
                                         std::abs(counterexample_depth2_exact(px, py) - target[i * g + j]));
    }
  }
  const ReluNet shallow({cfg.units}, true);
  const ReluNet deep({std::max(1, cfg.units / 2), std::max(1, cfg.units / 2)}, false);
  VectorXd best_shallow, best_deep, theta;
  report.shallow_best_sup = report.deep_best_sup = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    CounterRng rng(cfg.seed, 2 * static_cast<std::uint64_t>(r));
    const double es = fit(shallow, x, target, cfg, rng, theta);
    report.shallow_sup.push_back(es);
    if (es < report.shallow_best_sup) {
      report.shallow_best_sup = es;
      best_shallow = theta;
    }
    CounterRng rng2(cfg.seed, 2 * static_cast<std::uint64_t>(r) + 1);
    const double ed = fit(deep, x, target, cfg, rng2, theta);
    report.deep_sup.push_back(ed);
    if (ed < report.deep_best_sup) {
      report.deep_best_sup = ed;
      best_deep = theta;
    }
  }
  MatrixXd px(2, cfg.profile_points);
  for (int i = 0; i < cfg.profile_points; ++i) {
    const double a = cfg.k * (i + 1) / cfg.profile_points;
    px(0, i) = a;
    px(1, i) = 0.0;
    report.profile_alpha.push_back(a);
  }
  const VectorXd fs = shallow.forward(best_shallow, px, nullptr), fd = deep.forward(best_deep, px, nullptr);
  for (int i = 0; i < cfg.profile_points; ++i) {
    report.profile_shallow.push_back(fs[i] - report.profile_alpha[i]);
    report.profile_deep.push_back(fd[i] - report.profile_alpha[i]);
  }
  return report;
}

}  // namespace meshmotion::icnn
