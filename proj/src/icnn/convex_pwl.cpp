#include "meshmotion/icnn/convex_pwl.hpp"

#include <algorithm>
#include <stdexcept>

namespace meshmotion::icnn {

double ShallowReluNet::operator()(const Eigen::VectorXd& x) const {
  double f = c;
  for (std::size_t i = 0; i < w.size(); ++i) f += std::max(0.0, w[i].dot(x) + b[i]);
  return f;
}

double ShallowReluNet::operator()(double x) const { return (*this)(Eigen::VectorXd::Constant(1, x)); }

ShallowReluNet represent_convex_pwl(const std::vector<double>& t, const std::vector<double>& m,
                                    double value_at_first) {
  if (m.empty() || t.size() + 1 != m.size()) throw std::invalid_argument("need one slope more than breakpoints");
  for (std::size_t j = 1; j < t.size(); ++j) {
    if (!(t[j] > t[j - 1])) throw std::invalid_argument("breakpoints must be strictly increasing");
  }
  for (std::size_t j = 1; j < m.size(); ++j) {
    if (!(m[j] > m[j - 1])) throw std::invalid_argument("slopes must be strictly increasing (convexity)");
  }
  ShallowReluNet net;
  auto term = [&](double a, double w, double b) {
    if (a == 0.0) return;
    net.w.push_back(Eigen::VectorXd::Constant(1, a * w));
    net.b.push_back(a * b);
  };
  if (t.empty()) {
    if (m[0] != 0.0) throw std::invalid_argument("an affine function with nonzero slope is not a ReLU sum");
    net.c = value_at_first;
    return net;
  }
  if (m.front() > 0.0 || m.back() < 0.0) {
    throw std::invalid_argument("function is not representable by a nonnegative ReLU sum");
  }
  // pivot breakpoint: m_{p-1} <= 0 <= m_p
  std::size_t p = 1;
  while (p < t.size() && m[p] < 0.0) ++p;
  // f at the pivot, integrating slopes from t_1
  double fp = value_at_first;
  for (std::size_t j = 1; j < p; ++j) fp += m[j] * (t[j] - t[j - 1]);
  net.c = fp;
  const double tp = t[p - 1];
  term(-m[p - 1], -1.0, tp);
  for (std::size_t j = 1; j < p; ++j) term(m[j] - m[j - 1], -1.0, t[j - 1]);
  term(m[p], 1.0, -tp);
  for (std::size_t j = p + 1; j < m.size(); ++j) term(m[j] - m[j - 1], 1.0, -t[j - 1]);
  return net;
}

}  // namespace meshmotion::icnn
