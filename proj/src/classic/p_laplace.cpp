#include "meshmotion/classic/extension.hpp"

#include "meshmotion/errors.hpp"
#include "meshmotion/fem/nonlinear.hpp"

#include <cmath>

namespace meshmotion {

namespace {

fem::ScalarCoefficient p_coefficient(double p, double delta) {
  return [p, delta](double s) {
    const double base = delta + s;
    const double e = 0.5 * (p - 2.0);
    if (e == 0.0) return fem::CoefficientValue{1.0, 0.0};
    return fem::CoefficientValue{std::pow(base, e), e * std::pow(base, e - 1.0)};
  };
}

Eigen::VectorXd solve_p(const TriMesh& mesh, Space space, const std::vector<char>& mask, double p, double delta,
                        const Eigen::VectorXd& x0, const fem::NewtonConfig& newton) {
  const auto coef = p_coefficient(p, delta);
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, fem::SparseMatrix* j) {
    fem::assemble_gradient_form(mesh, space, x, coef, fem::CoefficientPlacement::QuadraturePoints, mask, r, j);
  };
  return fem::newton_solve(residual, x0, newton).solution;
}

}  // namespace

Eigen::VectorXd p_laplace_residual(const TriMesh& mesh, const Field& u, double p, double delta) {
  const auto dofs = fem::vector_dofs(mesh.boundary_nodes(u.space()), 2);
  const auto mask = fem::constraint_mask(static_cast<int>(u.coefficients().size()), dofs);
  Eigen::VectorXd r;
  fem::assemble_gradient_form(mesh, u.space(), u.coefficients(), p_coefficient(p, delta),
                              fem::CoefficientPlacement::QuadraturePoints, mask, r, nullptr);
  return r;
}

Field p_laplace_extend(const MeshPtr& mesh, const BoundaryDisplacement& g, const PLaplaceConfig& cfg) {
  if (!(cfg.p >= 2.0)) throw std::invalid_argument("p-Laplace needs p >= 2");
  if (!(cfg.delta >= 0.0)) throw std::invalid_argument("p-Laplace needs delta >= 0");
  const Field harmonic = harmonic_extend(mesh, g);
  if (cfg.p == 2.0) return harmonic;
  const auto mask = fem::constraint_mask(static_cast<int>(harmonic.coefficients().size()), g.dofs());
  Eigen::VectorXd x;
  try {
    x = solve_p(*mesh, g.space(), mask, cfg.p, cfg.delta, harmonic.coefficients(), cfg.newton);
  } catch (const NonConvergenceError&) {
    if (cfg.p <= 3.0) throw;
    x = harmonic.coefficients();
    for (double p = std::min(3.0, cfg.p);; p = std::min(p + 1.0, cfg.p)) {
      x = solve_p(*mesh, g.space(), mask, p, cfg.delta, x, cfg.newton);
      if (p == cfg.p) break;
    }
  }
  return Field(mesh, g.space(), 2, std::move(x));
}

}  // namespace meshmotion
