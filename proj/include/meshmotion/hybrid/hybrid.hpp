#pragma once

#include "meshmotion/classic/boundary.hpp"
#include "meshmotion/fem/newton.hpp"
#include "meshmotion/icnn/icnn.hpp"

#include <optional>
#include <string>
#include <vector>

namespace meshmotion {

// Newton settings for the learned nonlinear extension.
fem::NewtonConfig hybrid_newton_defaults();

/// Newton solution of -div(α(θ, |∇u|²) ∇u) = 0, u = g with α sampled once per
/// cell at the centroid gradient. Starts from `initial` when given (its
/// boundary values are replaced by g), otherwise from the harmonic extension.
Field hybrid_extend_nonlinear(const MeshPtr& mesh, const BoundaryDisplacement& g, const icnn::IcnnParams& params,
                              const fem::NewtonConfig& newton = hybrid_newton_defaults(),
                              const Field* initial = nullptr);

// Residual of the hybrid form (boundary rows zero).
Eigen::VectorXd hybrid_residual(const TriMesh& mesh, const Field& u, const icnn::IcnnParams& params);

/// Lagging-nonlinearity increment: one linear solve of
/// -div(α(θ, |∇u_old|²) ∇u_Δ) = 0 on (id + u_old)(Ω) with u_Δ = g - g_old on
/// the boundary, returning u_old + u_Δ. The weight is the DG0 field
/// α(|∇u_old(centroid)|²) with the gradient taken on the reference mesh.
Field hybrid_extend_incremental(const MeshPtr& mesh, const Field& u_old, const BoundaryDisplacement& g,
                                const BoundaryDisplacement& g_old, const icnn::IcnnParams& params);

enum class HybridStrategy { Nonlinear, Incremental, Auto };

struct StrategyConfig {
  HybridStrategy strategy = HybridStrategy::Auto;
  double threshold = 0.005;
  // Probe |g| at the boundary node nearest to this point instead of
  // max |g| over the moving boundary.
  std::optional<Vec2> probe_point;
  std::string moving_tag = "moving";

  void validate() const;
};

HybridStrategy parse_strategy(const std::string& name);
std::string strategy_name(HybridStrategy s);

double strategy_probe(const BoundaryDisplacement& g, const StrategyConfig& cfg);

// Reference state of the incremental strategy.
struct HybridState {
  std::optional<Field> u_old;
  std::optional<BoundaryDisplacement> g_old;
};

struct HybridStep {
  Field u;
  HybridState state;
  HybridStrategy branch;  // Nonlinear or Incremental, whichever produced u
  double probe = 0.0;
  bool fell_back = false;
};

/// One step of the threshold-switched strategy. Small probe values use the
/// nonlinear solve, which also becomes the new incremental reference; larger
/// ones use the incremental solve from `state` (zero state when empty). A
/// failing branch falls back to the other; if both fail the nonlinear error
/// propagates. Fixed strategies skip the probe.
HybridStep hybrid_extend_auto(const MeshPtr& mesh, const HybridState& state, const BoundaryDisplacement& g,
                              const icnn::IcnnParams& params, const StrategyConfig& cfg = {});

}  // namespace meshmotion
