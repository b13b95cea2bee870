#include "meshmotion/icnn/icnn.hpp"

#include "meshmotion/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace meshmotion::icnn {

IcnnParams IcnnParams::zeros(const std::vector<int>& widths) {
  if (widths.size() < 2 || widths.front() != 1 || widths.back() != 1) {
    throw std::invalid_argument("ICNN widths must start and end with 1");
  }
  IcnnParams p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    p.weights.push_back(Eigen::MatrixXd::Zero(widths[l + 1], widths[l]));
    if (l + 2 < widths.size()) p.biases.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
  }
  return p;
}

IcnnParams IcnnParams::random(std::uint64_t seed, double scale, const std::vector<int>& widths) {
  IcnnParams p = zeros(widths);
  CounterRng rng(seed, 0x1c);
  Eigen::VectorXd theta(p.num_parameters());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-scale, scale);
  p.unflatten(theta);
  return p;
}

std::vector<int> IcnnParams::widths() const {
  std::vector<int> w{static_cast<int>(weights.front().cols())};
  for (const auto& m : weights) w.push_back(static_cast<int>(m.rows()));
  return w;
}

int IcnnParams::num_parameters() const {
  int n = 0;
  for (const auto& w : weights) n += static_cast<int>(w.size());
  for (const auto& b : biases) n += static_cast<int>(b.size());
  return n;
}

Eigen::VectorXd IcnnParams::flatten() const {
  Eigen::VectorXd theta(num_parameters());
  int k = 0;
  for (const auto& w : weights)
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) theta[k++] = w(i, j);
  for (const auto& b : biases)
    for (int i = 0; i < b.size(); ++i) theta[k++] = b[i];
  return theta;
}

void IcnnParams::unflatten(const Eigen::VectorXd& theta) {
  if (theta.size() != num_parameters()) throw std::invalid_argument("ICNN parameter vector has wrong length");
  int k = 0;
  for (auto& w : weights)
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) w(i, j) = theta[k++];
  for (auto& b : biases)
    for (int i = 0; i < b.size(); ++i) b[i] = theta[k++];
}

void IcnnParams::validate() const {
  if (weights.empty()) throw std::invalid_argument("ICNN has no layers");
  if (biases.size() + 1 != weights.size()) throw std::invalid_argument("ICNN needs one bias per hidden layer");
  if (weights.front().cols() != 1 || weights.back().rows() != 1) throw std::invalid_argument("ICNN maps R to R");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (l > 0 && weights[l].cols() != weights[l - 1].rows()) throw std::invalid_argument("ICNN layer sizes do not chain");
    if (l < biases.size() && biases[l].size() != weights[l].rows()) throw std::invalid_argument("ICNN bias size mismatch");
    if (!weights[l].allFinite()) throw std::invalid_argument("non-finite ICNN weight");
  }
  if (!(eta1 > 0.0) || !(eta2 > eta1) || !(epsilon > 0.0)) {
    throw std::invalid_argument("ICNN hyperparameters need eta2 > eta1 > 0 and epsilon > 0");
  }
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double smooth_plus(double t, double epsilon) { return epsilon * softplus(t / epsilon); }

IcnnValue icnn_evaluate(const IcnnParams& params, double s) {
  const std::size_t k = params.weights.size() - 1;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(1, s);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd yy = Eigen::VectorXd::Zero(1);
  for (std::size_t l = 0; l < k; ++l) {
    const Eigen::MatrixXd w = params.weights[l].array().square().matrix();
    const Eigen::VectorXd z = w * x + params.biases[l];
    const Eigen::VectorXd a = w * y;
    const Eigen::VectorXd aa = w * yy;
    Eigen::VectorXd xn(z.size()), yn(z.size()), yyn(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double sg = sigmoid(z[i]);
      xn[i] = softplus(z[i]);
      yn[i] = sg * a[i];
      yyn[i] = sg * (1.0 - sg) * a[i] * a[i] + sg * aa[i];
    }
    x = std::move(xn);
    y = std::move(yn);
    yy = std::move(yyn);
  }
  const Eigen::MatrixXd w = params.weights[k].array().square().matrix();
  return {(w * x)[0], (w * y)[0], (w * yy)[0]};
}

double icnn_eval(const IcnnParams& params, double s) { return icnn_evaluate(params, s).value; }
double icnn_derivative(const IcnnParams& params, double s) { return icnn_evaluate(params, s).d1; }

double icnn_derivative_gradient(const IcnnParams& params, double s, Eigen::VectorXd& gradient) {
  const std::size_t k = params.weights.size() - 1;
  std::vector<Eigen::MatrixXd> w(k + 1);
  for (std::size_t l = 0; l <= k; ++l) w[l] = params.weights[l].array().square().matrix();
  std::vector<Eigen::VectorXd> xs{Eigen::VectorXd::Constant(1, s)}, ys{Eigen::VectorXd::Ones(1)}, zs, as;
  for (std::size_t l = 0; l < k; ++l) {
    zs.push_back(w[l] * xs[l] + params.biases[l]);
    as.push_back(w[l] * ys[l]);
    Eigen::VectorXd xn(zs[l].size()), yn(zs[l].size());
    for (Eigen::Index i = 0; i < xn.size(); ++i) {
      xn[i] = softplus(zs[l][i]);
      yn[i] = sigmoid(zs[l][i]) * as[l][i];
    }
    xs.push_back(std::move(xn));
    ys.push_back(std::move(yn));
  }
  const double d = (w[k] * ys[k])[0];

  std::vector<Eigen::MatrixXd> wbar(k + 1);
  std::vector<Eigen::VectorXd> bbar(k);
  wbar[k] = ys[k].transpose();
  Eigen::VectorXd ybar = w[k].transpose();
  Eigen::VectorXd xbar = Eigen::VectorXd::Zero(xs[k].size());
  for (std::size_t l = k; l-- > 0;) {
    const Eigen::Index n = zs[l].size();
    Eigen::VectorXd abar(n), zbar(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sg = sigmoid(zs[l][i]);
      abar[i] = sg * ybar[i];
      zbar[i] = sg * (1.0 - sg) * as[l][i] * ybar[i] + sg * xbar[i];
    }
    wbar[l] = abar * ys[l].transpose() + zbar * xs[l].transpose();
    bbar[l] = zbar;
    ybar = w[l].transpose() * abar;
    xbar = w[l].transpose() * zbar;
  }
  gradient.resize(params.num_parameters());
  int idx = 0;
  for (std::size_t l = 0; l <= k; ++l)
    for (int i = 0; i < w[l].rows(); ++i)
      for (int j = 0; j < w[l].cols(); ++j) gradient[idx++] = 2.0 * params.weights[l](i, j) * wbar[l](i, j);
  for (std::size_t l = 0; l < k; ++l)
    for (Eigen::Index i = 0; i < bbar[l].size(); ++i) gradient[idx++] = bbar[l][i];
  return d;
}

double alpha_eval(const IcnnParams& params, double s) {
  double a = 1.0 + smooth_plus(s - params.eta1, params.epsilon) * icnn_derivative(params, s);
  if (params.use_second_bump) a += smooth_plus(s - params.eta2, params.epsilon);
  return a;
}

double alpha_derivative(const IcnnParams& params, double s) {
  const IcnnValue v = icnn_evaluate(params, s);
  const double t = s - params.eta1;
  double d = sigmoid(t / params.epsilon) * v.d1 + smooth_plus(t, params.epsilon) * v.d2;
  if (params.use_second_bump) d += sigmoid((s - params.eta2) / params.epsilon);
  return d;
}

Json icnn_to_json(const IcnnParams& params) {
  Json weights = Json::array(), biases = Json::array();
  for (const auto& w : params.weights) {
    Json rows = Json::array();
    for (int i = 0; i < w.rows(); ++i) {
      std::vector<double> row(w.cols());
      for (int j = 0; j < w.cols(); ++j) row[j] = w(i, j);
      rows.push_back(row);
    }
    weights.push_back(rows);
  }
  for (const auto& b : params.biases) biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  biases.push_back(std::vector<double>{0.0});
  return {{"weights", weights},   {"biases", biases},       {"eta1", params.eta1},
          {"eta2", params.eta2},  {"epsilon", params.epsilon}, {"use_second_bump", params.use_second_bump}};
}

IcnnParams icnn_from_json(const Json& j) {
  IcnnParams p;
  for (const Json& rows : j.at("weights")) {
    const auto r = rows.get<std::vector<std::vector<double>>>();
    if (r.empty()) throw std::invalid_argument("empty ICNN weight matrix");
    Eigen::MatrixXd w(r.size(), r[0].size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i].size() != r[0].size()) throw std::invalid_argument("ragged ICNN weight matrix");
      for (std::size_t c = 0; c < r[i].size(); ++c) w(i, c) = r[i][c];
    }
    p.weights.push_back(std::move(w));
  }
  const auto biases = j.at("biases").get<std::vector<std::vector<double>>>();
  for (std::size_t l = 0; l < biases.size(); ++l) {
    if (l + 1 == p.weights.size()) {
      for (double b : biases[l])
        if (b != 0.0) throw std::invalid_argument("ICNN output bias must be zero");
      continue;
    }
    p.biases.push_back(Eigen::Map<const Eigen::VectorXd>(biases[l].data(), static_cast<Eigen::Index>(biases[l].size())));
  }
  p.eta1 = j.value("eta1", p.eta1);
  p.eta2 = j.value("eta2", p.eta2);
  p.epsilon = j.value("epsilon", p.epsilon);
  p.use_second_bump = j.value("use_second_bump", p.use_second_bump);
  p.validate();
  return p;
}

}  // namespace meshmotion::icnn
