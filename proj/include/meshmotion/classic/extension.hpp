#pragma once

#include "meshmotion/classic/boundary.hpp"
#include "meshmotion/fem/newton.hpp"
#include "meshmotion/fem/sparse.hpp"

#include <functional>
#include <memory>
#include <string>

namespace meshmotion {

/// Harmonic extension with the constrained Laplacian factorised once, so
/// repeated extensions on one mesh cost two triangular solves each.
class HarmonicExtender {
 public:
  explicit HarmonicExtender(MeshPtr mesh, Space space = Space::P2,
                            const fem::LinearSolverOptions& options = {});

  Field extend(const BoundaryDisplacement& g) const;

  const MeshPtr& mesh() const { return mesh_; }
  Space space() const { return space_; }

 private:
  MeshPtr mesh_;
  Space space_;
  std::unique_ptr<fem::ConstrainedSolver> solver_;
};

Field harmonic_extend(const MeshPtr& mesh, const BoundaryDisplacement& g);

// The vector Laplace system with Dirichlet data applied (node-major dofs).
fem::SparseSystem harmonic_system(const TriMesh& mesh, const BoundaryDisplacement& g);

/// Mixed biharmonic extension with unknowns (u, z) per component:
///   M z - K u = 0 on every row, K z = 0 on interior rows, u = g on the
/// boundary; z is free on the boundary.
class BiharmonicExtender {
 public:
  explicit BiharmonicExtender(MeshPtr mesh, Space space = Space::P2);

  Field extend(const BoundaryDisplacement& g) const;
  // Solution of the coupled system for one component: [u; z].
  Eigen::VectorXd solve_component(const Eigen::VectorXd& boundary_values) const;

  // Scalar coupled matrix (2N x 2N) and its rhs for given boundary values.
  const fem::SparseMatrix& matrix() const { return matrix_; }
  Eigen::VectorXd rhs(const Eigen::VectorXd& boundary_values) const;

 private:
  MeshPtr mesh_;
  Space space_;
  std::vector<int> boundary_;
  fem::SparseMatrix matrix_;
  std::unique_ptr<fem::LinearSolver> solver_;
};

Field biharmonic_extend(const MeshPtr& mesh, const BoundaryDisplacement& g);

struct PLaplaceConfig {
  double p = 4.0;
  double delta = 1e-10;
  fem::NewtonConfig newton{1e-11, 1e-12, 60, 0.5, 25, true};
};

/// Newton solution of -div((δ + |∇u|²)^((p-2)/2) ∇u) = 0, u = g, started from
/// the harmonic extension; for p > 3 a failed direct solve is retried by
/// continuation in p.
Field p_laplace_extend(const MeshPtr& mesh, const BoundaryDisplacement& g, const PLaplaceConfig& cfg = {});

// Residual of the p-Laplace form at interior dofs (boundary rows zero).
Eigen::VectorXd p_laplace_residual(const TriMesh& mesh, const Field& u, double p, double delta);

struct ElasticStiffnessConfig {
  double mu_max = 100.0;
  double mu_min = 1.0;
  std::string gamma_tag = "moving";

  void validate() const;
};

// P1 harmonic stiffness field: mu_max on the Γ tag, mu_min elsewhere on the
// boundary; Γ wins at vertices shared with other tags.
Field elastic_stiffness(const MeshPtr& mesh, const ElasticStiffnessConfig& cfg);

// Solves -div(2 μ ε(u)) = 0, u = g with μ from elastic_stiffness.
Field elastic_extend(const MeshPtr& mesh, const BoundaryDisplacement& g, const ElasticStiffnessConfig& cfg);

// Extension operator on a given mesh.
using ExtensionFn = std::function<Field(const MeshPtr& mesh, const BoundaryDisplacement& g)>;

/// Solves `base` on (id + u_old)(mesh) for g - g_old and returns u_old plus the
/// increment (nodal addition). Throws DegenerateMeshError when the moved mesh
/// is inverted.
Field incremental_extend(const ExtensionFn& base, const MeshPtr& mesh, const Field& u_old,
                         const BoundaryDisplacement& g, const BoundaryDisplacement& g_old);

}  // namespace meshmotion
