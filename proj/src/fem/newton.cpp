#include "meshmotion/fem/newton.hpp"

#include "meshmotion/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace meshmotion::fem {

void NewtonConfig::validate() const {
  if (!(atol > 0.0) || !(rtol > 0.0)) throw std::invalid_argument("Newton tolerances must be positive");
  if (max_iterations < 1) throw std::invalid_argument("Newton needs max_iterations >= 1");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw std::invalid_argument("backtrack factor must lie in (0, 1)");
  }
  if (max_backtracks < 0) throw std::invalid_argument("max_backtracks must be >= 0");
}

NewtonResult newton_solve(const ResidualFn& residual, Eigen::VectorXd x0, const NewtonConfig& config) {
  config.validate();
  NewtonResult result;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd r;
  SparseMatrix jac;
  residual(x, r, &jac);
  double norm = r.norm();
  if (!std::isfinite(norm)) throw NonConvergenceError("non-finite initial residual", norm);
  result.initial_residual_norm = norm;
  const double target = std::max(config.atol, config.rtol * norm);

  LinearSolverOptions linear;
  linear.symmetric = config.symmetric;

  int it = 0;
  while (norm > target) {
    if (it == config.max_iterations) {
      throw NonConvergenceError("Newton did not converge in " + std::to_string(it) + " iterations", norm);
    }
    ++it;
    Eigen::VectorXd dx;
    try {
      dx = LinearSolver(jac, linear).solve(-r);
    } catch (const FactorizationError& e) {
      throw NonConvergenceError(std::string("Newton step failed: ") + e.what(), norm);
    }
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd xt, rt;
    SparseMatrix jt;
    for (int k = 0; k <= config.max_backtracks; ++k) {
      xt = x + t * dx;
      residual(xt, rt, &jt);
      const double nt = rt.norm();
      if (std::isfinite(nt) && nt < norm) {
        accepted = true;
        break;
      }
      t *= config.backtrack_factor;
    }
    if (!accepted) throw NonConvergenceError("Newton linesearch stagnated", norm);
    x = std::move(xt);
    r = std::move(rt);
    jac = std::move(jt);
    norm = r.norm();
  }
  result.solution = std::move(x);
  result.iterations = it;
  result.residual_norm = norm;
  return result;
}

}  // namespace meshmotion::fem
