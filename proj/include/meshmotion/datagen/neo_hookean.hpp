#pragma once

#include "meshmotion/classic/boundary.hpp"
#include "meshmotion/fem/newton.hpp"

#include <string>
#include <vector>

namespace meshmotion {

// Lamé parameters of the solid.
struct Material {
  double mu = 0.0;
  double lambda = 0.0;

  void validate() const;
};

/// Hand-picked boundary loads: (0, F_tip) cos θ on the tip and
/// (0, F_side) cos(θ - φ) on top and bottom where |x - c| < d.
struct LoadConfig {
  double F_tip = 0.0;
  double F_side = 0.0;
  double phi = 0.0;
  double c = 0.0;
  double d = 0.0;

  void validate() const;
  std::string describe() const;
};

Json load_config_to_json(const LoadConfig& load);
LoadConfig load_config_from_json(const Json& j);
Json material_to_json(const Material& material);
Material material_from_json(const Json& j);

// Configs from a {"material": ..., "configs": [...]} file or a bare array.
std::vector<LoadConfig> load_configs_from_json(const Json& j);

/// Compressible neo-Hookean solid on a P2 mesh tagged clamped/tip/top/bottom.
/// Energy W = μ/2 (tr FᵀF - 2) - μ ln J + λ/2 (ln J)², clamped side fixed.
class NeoHookeanProblem {
 public:
  NeoHookeanProblem(MeshPtr solid, Material material);

  const MeshPtr& mesh() const { return mesh_; }
  int num_dofs() const { return 2 * mesh_->num_nodes(Space::P2); }
  const std::vector<int>& clamped_dofs() const { return clamped_; }

  // Consistent nodal forces of the tractions at amplitude θ.
  Eigen::VectorXd external_load(const LoadConfig& load, double theta) const;

  // Stored energy minus the work of `load`; +inf when some J <= 0.
  double energy(const Eigen::VectorXd& u, const Eigen::VectorXd& load) const;
  // Internal minus external forces on every dof (no constraint handling).
  void residual(const Eigen::VectorXd& u, const Eigen::VectorXd& load, Eigen::VectorXd& r,
                fem::SparseMatrix* tangent) const;

 private:
  MeshPtr mesh_;
  Material material_;
  std::vector<int> clamped_;
};

struct NeoHookeanOptions {
  fem::NewtonConfig newton{1e-8, 1e-14, 40, 0.5, 30, true};
  // Continuation ramps tried in turn when the full load fails.
  std::vector<int> ramps{1, 2, 4, 8};
};

struct NeoHookeanResult {
  Field displacement;  // P2 on the solid mesh
  double residual_norm = 0.0;
  int load_steps = 1;
  int newton_iterations = 0;
};

/// Newton solve at amplitude θ. Throws NonConvergenceError echoing the load
/// when every continuation ramp fails.
NeoHookeanResult neo_hookean_solve(const NeoHookeanProblem& problem, const LoadConfig& load, double theta,
                                   const NeoHookeanOptions& options = {});
NeoHookeanResult neo_hookean_solve(const MeshPtr& solid, const LoadConfig& load, double theta,
                                   const Material& material, const NeoHookeanOptions& options = {});

/// Boundary displacement of the fluid mesh: solid values on nodes of
/// `moving_tag` (matched by position), zero elsewhere.
BoundaryDisplacement solid_trace_to_fluid(const Field& solid_displacement, const MeshPtr& fluid, Space space = Space::P2,
                                          const std::string& moving_tag = "moving");

}  // namespace meshmotion
