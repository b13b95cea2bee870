#pragma once

#include <Eigen/Dense>

#include <vector>

namespace meshmotion::icnn {

// c + Σ ReLU(w_i · x + b_i): a nonnegative combination of ReLUs with the
// combination coefficients folded into (w_i, b_i).
struct ShallowReluNet {
  std::vector<Eigen::VectorXd> w;
  std::vector<double> b;
  double c = 0.0;

  double operator()(const Eigen::VectorXd& x) const;
  double operator()(double x) const;
};

/// Exact ReLU representation of a convex coercive piecewise affine function
/// of one variable with pieces (-inf, t_1), [t_1, t_2), ..., [t_{n-1}, inf)
/// and slopes m_0 < m_1 < ... < m_{n-1}. `value_at_first` is f(t_1) (f(0)
/// for a single piece). Throws on non-increasing slopes and on functions
/// that a nonnegative ReLU sum cannot represent (m_0 > 0 or m_{n-1} < 0).
ShallowReluNet represent_convex_pwl(const std::vector<double>& breakpoints, const std::vector<double>& slopes,
                                    double value_at_first);

}  // namespace meshmotion::icnn
