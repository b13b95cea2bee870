#include "meshmotion/hybrid/hybrid.hpp"

#include "meshmotion/classic/extension.hpp"
#include "meshmotion/errors.hpp"
#include "meshmotion/fem/nonlinear.hpp"

#include <cmath>
#include <exception>
#include <limits>

namespace meshmotion {

namespace {

fem::ScalarCoefficient alpha_coefficient(const icnn::IcnnParams& params) {
  return [&params](double s) {
    return fem::CoefficientValue{icnn::alpha_eval(params, s), icnn::alpha_derivative(params, s)};
  };
}

}  // namespace

fem::NewtonConfig hybrid_newton_defaults() {
  fem::NewtonConfig cfg;
  cfg.atol = 1e-11;
  cfg.rtol = 1e-10;
  cfg.max_iterations = 50;
  cfg.symmetric = false;
  return cfg;
}

Eigen::VectorXd hybrid_residual(const TriMesh& mesh, const Field& u, const icnn::IcnnParams& params) {
  const auto dofs = fem::vector_dofs(mesh.boundary_nodes(u.space()), 2);
  const auto mask = fem::constraint_mask(static_cast<int>(u.coefficients().size()), dofs);
  Eigen::VectorXd r;
  fem::assemble_gradient_form(mesh, u.space(), u.coefficients(), alpha_coefficient(params),
                              fem::CoefficientPlacement::CellCentroid, mask, r, nullptr);
  return r;
}

Field hybrid_extend_nonlinear(const MeshPtr& mesh, const BoundaryDisplacement& g, const icnn::IcnnParams& params,
                              const fem::NewtonConfig& newton, const Field* initial) {
  params.validate();
  Eigen::VectorXd x0;
  if (initial) {
    if (initial->space() != g.space() || initial->num_nodes() != mesh->num_nodes(g.space()))
      throw std::invalid_argument("hybrid: initial guess does not match the boundary data");
    x0 = initial->coefficients();
  } else {
    x0 = harmonic_extend(mesh, g).coefficients();
  }
  const auto dofs = g.dofs();
  for (std::size_t k = 0; k < dofs.size(); ++k) x0[dofs[k]] = g.values()[static_cast<Eigen::Index>(k)];
  const auto mask = fem::constraint_mask(static_cast<int>(x0.size()), dofs);
  const auto coef = alpha_coefficient(params);
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, fem::SparseMatrix* j) {
    fem::assemble_gradient_form(*mesh, g.space(), x, coef, fem::CoefficientPlacement::CellCentroid, mask, r, j);
  };
  return Field(mesh, g.space(), 2, fem::newton_solve(residual, std::move(x0), newton).solution);
}

Field hybrid_extend_incremental(const MeshPtr& mesh, const Field& u_old, const BoundaryDisplacement& g,
                                const BoundaryDisplacement& g_old, const icnn::IcnnParams& params) {
  params.validate();
  if (u_old.space() != g.space() || g_old.space() != g.space())
    throw std::invalid_argument("hybrid: u_old, g and g_old live in different spaces");
  const MeshPtr moved = deform(*mesh, u_old);
  const Eigen::VectorXd s = fem::centroid_gradient_norms(*mesh, u_old.space(), u_old.coefficients());
  Eigen::VectorXd weight(s.size());
  for (Eigen::Index c = 0; c < s.size(); ++c) weight[c] = icnn::alpha_eval(params, s[c]);
  const fem::SparseMatrix k = fem::assemble_cellwise_laplacian(*moved, g.space(), weight, 2);
  const fem::ConstrainedSolver solver(k, g.dofs());
  const Eigen::VectorXd du = solver.solve(Eigen::VectorXd::Zero(k.rows()), g.values() - g_old.values());
  Eigen::VectorXd u = u_old.coefficients() + du;
  const auto dofs = g.dofs();
  for (std::size_t i = 0; i < dofs.size(); ++i) u[dofs[i]] = g.values()[static_cast<Eigen::Index>(i)];
  return Field(mesh, g.space(), 2, std::move(u));
}

void StrategyConfig::validate() const {
  if (!(threshold > 0.0)) throw std::invalid_argument("strategy threshold must be positive");
}

HybridStrategy parse_strategy(const std::string& name) {
  if (name == "nonlinear") return HybridStrategy::Nonlinear;
  if (name == "incremental" || name == "incremental-lagging") return HybridStrategy::Incremental;
  if (name == "auto") return HybridStrategy::Auto;
  throw std::invalid_argument("unknown hybrid strategy: " + name);
}

std::string strategy_name(HybridStrategy s) {
  switch (s) {
    case HybridStrategy::Nonlinear: return "nonlinear";
    case HybridStrategy::Incremental: return "incremental";
    case HybridStrategy::Auto: return "auto";
  }
  return "?";
}

double strategy_probe(const BoundaryDisplacement& g, const StrategyConfig& cfg) {
  if (!cfg.probe_point) return g.max_norm_on(cfg.moving_tag);
  const TriMesh& mesh = *g.mesh();
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t k = 0; k < g.nodes().size(); ++k) {
    const double d = (mesh.node_position(g.nodes()[k]) - *cfg.probe_point).squaredNorm();
    if (d < best) {
      best = d;
      arg = k;
    }
  }
  return g.at_index(arg).norm();
}

HybridStep hybrid_extend_auto(const MeshPtr& mesh, const HybridState& state, const BoundaryDisplacement& g,
                              const icnn::IcnnParams& params, const StrategyConfig& cfg) {
  cfg.validate();
  const double probe = strategy_probe(g, cfg);
  HybridStrategy first = cfg.strategy;
  if (first == HybridStrategy::Auto)
    first = probe < cfg.threshold ? HybridStrategy::Nonlinear : HybridStrategy::Incremental;

  auto run = [&](HybridStrategy branch) {
    if (branch == HybridStrategy::Nonlinear) return hybrid_extend_nonlinear(mesh, g, params);
    const Field u_old = state.u_old ? *state.u_old : Field::zeros(mesh, g.space(), 2);
    const BoundaryDisplacement g_old = state.g_old ? *state.g_old : BoundaryDisplacement::zero(mesh, g.space());
    return hybrid_extend_incremental(mesh, u_old, g, g_old, params);
  };
  auto step = [&](HybridStrategy branch, Field u, bool fell_back) {
    HybridStep out{std::move(u), {}, branch, probe, fell_back};
    out.state.u_old = out.u;
    out.state.g_old = g;
    return out;
  };

  if (cfg.strategy != HybridStrategy::Auto) return step(first, run(first), false);
  const HybridStrategy second =
      first == HybridStrategy::Nonlinear ? HybridStrategy::Incremental : HybridStrategy::Nonlinear;
  std::exception_ptr first_error;
  try {
    return step(first, run(first), false);
  } catch (const Error&) {
    first_error = std::current_exception();
  }
  try {
    return step(second, run(second), true);
  } catch (const Error&) {
    if (first == HybridStrategy::Nonlinear) std::rethrow_exception(first_error);
    throw;
  }
}

}  // namespace meshmotion
