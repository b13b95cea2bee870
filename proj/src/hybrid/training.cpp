#include "meshmotion/hybrid/training.hpp"

#include "meshmotion/errors.hpp"
#include "meshmotion/fem/nonlinear.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace meshmotion {

void HybridTrainConfig::validate() const {
  if (subsample < 1) throw std::invalid_argument("hybrid training: N must be >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("hybrid training: lambda must be >= 0");
  if (max_iterations < 1) throw std::invalid_argument("hybrid training: max_iterations must be >= 1");
  if (history < 1) throw std::invalid_argument("hybrid training: history must be >= 1");
  if (!(fd_step > 0.0)) throw std::invalid_argument("hybrid training: fd_step must be positive");
  newton.validate();
}

std::vector<int> subsample_indices(int n, int count) {
  if (n < 1 || count < 1) throw std::invalid_argument("subsample: empty dataset or count");
  count = std::min(count, n);
  const int stride = std::max(1, n / count);
  std::vector<int> out;
  for (int k = 0; k < count; ++k) out.push_back(k * stride);
  return out;
}

HybridLoss::HybridLoss(MeshPtr mesh, std::vector<HybridSample> samples, icnn::IcnnParams layout,
                       const HybridTrainConfig& cfg)
    : mesh_(std::move(mesh)), samples_(std::move(samples)), layout_(std::move(layout)), cfg_(cfg) {
  if (samples_.empty()) throw std::invalid_argument("hybrid loss: no samples");
  for (const HybridSample& s : samples_) {
    if (s.g.space() != s.target.space() || s.target.num_nodes() != mesh_->num_nodes(s.g.space()))
      throw std::invalid_argument("hybrid loss: target does not match the boundary data");
  }
  const Space space = samples_.front().g.space();
  norm_ = fem::assemble_mass(*mesh_, space, 2) + fem::assemble_laplacian(*mesh_, space, 2).matrix;
  warm_.resize(samples_.size());
}

icnn::IcnnParams HybridLoss::params(const Eigen::VectorXd& theta) const {
  icnn::IcnnParams p = layout_;
  p.unflatten(theta);
  return p;
}

std::optional<Field> HybridLoss::solve(int i, const icnn::IcnnParams& p) {
  try {
    const Field* start = cfg_.warm_start && warm_[i] ? &*warm_[i] : nullptr;
    Field u = hybrid_extend_nonlinear(mesh_, samples_[i].g, p, cfg_.newton, start);
    if (cfg_.warm_start) warm_[i] = u;
    return u;
  } catch (const Error&) {
    return std::nullopt;
  }
}

double HybridLoss::value(const Eigen::VectorXd& theta) {
  ++evaluations_;
  const icnn::IcnnParams p = params(theta);
  double total = 0.0;
  for (int i = 0; i < num_samples(); ++i) {
    const auto u = solve(i, p);
    if (!u) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd e = u->coefficients() - samples_[i].target.coefficients();
    total += e.dot(norm_ * e);
  }
  return total / num_samples() + cfg_.lambda * theta.squaredNorm();
}

double HybridLoss::adjoint_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& gradient) {
  ++evaluations_;
  const icnn::IcnnParams p = params(theta);
  gradient = 2.0 * cfg_.lambda * theta;
  double total = 0.0;
  Eigen::VectorXd dtheta(theta.size());
  for (int i = 0; i < num_samples(); ++i) {
    const auto u = solve(i, p);
    if (!u) {
      gradient.setZero();
      return std::numeric_limits<double>::infinity();
    }
    const Space space = u->space();
    const Eigen::VectorXd e = u->coefficients() - samples_[i].target.coefficients();
    const Eigen::VectorXd ne = norm_ * e;
    total += e.dot(ne);
    const auto mask = fem::constraint_mask(static_cast<int>(e.size()), samples_[i].g.dofs());
    Eigen::VectorXd rhs = 2.0 * ne;
    for (Eigen::Index d = 0; d < rhs.size(); ++d)
      if (mask[d]) rhs[d] = 0.0;
    Eigen::VectorXd r;
    fem::SparseMatrix jac;
    fem::assemble_gradient_form(
        *mesh_, space, u->coefficients(),
        [&p](double s) { return fem::CoefficientValue{icnn::alpha_eval(p, s), icnn::alpha_derivative(p, s)}; },
        fem::CoefficientPlacement::CellCentroid, mask, r, &jac);
    const fem::SparseMatrix jt = jac.transpose();
    fem::LinearSolverOptions opts;
    opts.symmetric = false;
    const Eigen::VectorXd adj = fem::LinearSolver(jt, opts).solve(rhs);
    // dL/dθ = -Σ_c (∂α_c/∂θ) adjᵀ (K_c u)
    const Eigen::VectorXd action = fem::cellwise_form_action(*mesh_, space, u->coefficients(), adj, mask);
    const Eigen::VectorXd s = fem::centroid_gradient_norms(*mesh_, space, u->coefficients());
    Eigen::VectorXd sample_grad = Eigen::VectorXd::Zero(theta.size());
    for (Eigen::Index c = 0; c < s.size(); ++c) {
      if (action[c] == 0.0) continue;
      const double bump = icnn::smooth_plus(s[c] - p.eta1, p.epsilon);
      if (bump == 0.0) continue;
      icnn::icnn_derivative_gradient(p, s[c], dtheta);
      sample_grad -= (bump * action[c]) * dtheta;
    }
    gradient += sample_grad / num_samples();
  }
  return total / num_samples() + cfg_.lambda * theta.squaredNorm();
}

Eigen::VectorXd HybridLoss::fd_gradient(const Eigen::VectorXd& theta, double step) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd a = theta, b = theta;
    a[k] += step;
    b[k] -= step;
    g[k] = (value(a) - value(b)) / (2.0 * step);
  }
  return g;
}

double HybridLoss::value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& gradient) {
  if (cfg_.gradient == GradientMethod::Adjoint) return adjoint_gradient(theta, gradient);
  const double f = value(theta);
  if (!std::isfinite(f)) {
    gradient = Eigen::VectorXd::Zero(theta.size());
    return f;
  }
  gradient = fd_gradient(theta, cfg_.fd_step);
  return f;
}

namespace {

// Two-loop recursion.
Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const std::deque<Eigen::VectorXd>& s,
                                const std::deque<Eigen::VectorXd>& y) {
  Eigen::VectorXd q = -g;
  const std::size_t m = s.size();
  std::vector<double> a(m), rho(m);
  for (std::size_t k = m; k-- > 0;) {
    rho[k] = 1.0 / y[k].dot(s[k]);
    a[k] = rho[k] * s[k].dot(q);
    q -= a[k] * y[k];
  }
  if (m > 0) q *= s.back().dot(y.back()) / y.back().squaredNorm();
  for (std::size_t k = 0; k < m; ++k) {
    const double b = rho[k] * y[k].dot(q);
    q += (a[k] - b) * s[k];
  }
  return q;
}

}  // namespace

HybridTrainResult train_hybrid(const MeshPtr& mesh, const std::vector<HybridSample>& samples,
                               const icnn::IcnnParams& initial, const HybridTrainConfig& cfg) {
  cfg.validate();
  initial.validate();
  HybridTrainResult result;
  result.subsample = subsample_indices(static_cast<int>(samples.size()), cfg.subsample);
  std::vector<HybridSample> chosen;
  for (int i : result.subsample) chosen.push_back(samples[i]);
  HybridLoss loss(mesh, std::move(chosen), initial, cfg);

  Eigen::VectorXd x = initial.flatten(), g;
  double f = loss.value_and_gradient(x, g);
  if (!std::isfinite(f)) throw NonConvergenceError("hybrid training: initial parameters", f);
  result.loss_history.push_back(f);
  const double f0 = f;
  std::deque<Eigen::VectorXd> hs, hy;
  result.stop_reason = "max_iterations";
  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= cfg.gradient_tolerance * f0) {
      result.stop_reason = "gradient_tolerance";
      break;
    }
    Eigen::VectorXd d = lbfgs_direction(g, hs, hy);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      hs.clear();
      hy.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    double t = hs.empty() ? 1.0 / d.lpNorm<Eigen::Infinity>() : 1.0;
    Eigen::VectorXd xn, gn;
    double fn = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      xn = x + t * d;
      fn = loss.value_and_gradient(xn, gn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!hs.empty()) {
        hs.clear();
        hy.clear();
        continue;
      }
      result.stop_reason = "linesearch";
      break;
    }
    const Eigen::VectorXd s = xn - x, y = gn - g;
    if (s.dot(y) > 1e-16 * s.norm() * y.norm()) {
      hs.push_back(s);
      hy.push_back(y);
      if (static_cast<int>(hs.size()) > cfg.history) {
        hs.pop_front();
        hy.pop_front();
      }
    }
    const double change = f - fn;
    x = xn;
    g = gn;
    f = fn;
    result.loss_history.push_back(f);
    result.iterations = it + 1;
    if (change <= 1e-14 * std::max(f, 1e-300)) {
      result.stop_reason = "function_tolerance";
      break;
    }
  }
  result.params = loss.params(x);
  result.evaluations = loss.evaluations();
  return result;
}

Json hybrid_train_config_to_json(const HybridTrainConfig& cfg) {
  return Json{{"N", cfg.subsample},
              {"lambda", cfg.lambda},
              {"max_iterations", cfg.max_iterations},
              {"history", cfg.history},
              {"gradient", cfg.gradient == GradientMethod::Adjoint ? "adjoint" : "finite-difference"},
              {"fd_step", cfg.fd_step},
              {"gradient_tolerance", cfg.gradient_tolerance},
              {"warm_start", cfg.warm_start}};
}

HybridTrainConfig hybrid_train_config_from_json(const Json& j) {
  HybridTrainConfig cfg;
  cfg.subsample = j.value("N", cfg.subsample);
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
  cfg.history = j.value("history", cfg.history);
  const std::string method = j.value("gradient", std::string("adjoint"));
  if (method == "adjoint") cfg.gradient = GradientMethod::Adjoint;
  else if (method == "finite-difference" || method == "fd") cfg.gradient = GradientMethod::FiniteDifference;
  else throw std::invalid_argument("unknown gradient method: " + method);
  cfg.fd_step = j.value("fd_step", cfg.fd_step);
  cfg.gradient_tolerance = j.value("gradient_tolerance", cfg.gradient_tolerance);
  cfg.warm_start = j.value("warm_start", cfg.warm_start);
  cfg.validate();
  return cfg;
}

}  // namespace meshmotion
