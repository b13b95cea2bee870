#pragma once

#include "meshmotion/fem/sparse.hpp"

#include <functional>

namespace meshmotion::fem {

struct NewtonConfig {
  double atol = 1e-10;
  double rtol = 1e-10;
  int max_iterations = 50;
  double backtrack_factor = 0.5;
  int max_backtracks = 25;
  // Jacobian is symmetric (enables LDLT).
  bool symmetric = false;

  void validate() const;
};

// Evaluates the residual at x; fills the Jacobian when `jacobian` is non-null.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& residual,
                                      SparseMatrix* jacobian)>;

struct NewtonResult {
  Eigen::VectorXd solution;
  int iterations = 0;
  double residual_norm = 0.0;
  double initial_residual_norm = 0.0;
};

/// Damped Newton iteration with backtracking on the residual 2-norm.
/// Converged when |r| <= atol or |r| <= rtol |r0|. Exhausting the iteration
/// budget, a stalled linesearch or a singular Jacobian throws
/// NonConvergenceError with the last residual norm.
NewtonResult newton_solve(const ResidualFn& residual, Eigen::VectorXd x0, const NewtonConfig& config = {});

}  // namespace meshmotion::fem
