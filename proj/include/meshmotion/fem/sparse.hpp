#pragma once

#include "meshmotion/mesh/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace meshmotion::fem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplets = std::vector<Eigen::Triplet<double>>;

struct DirichletConstraint {
  int dof;
  double value;
};

/// Assembled linear system. After apply_constraints the constrained rows and
/// columns are identity and the eliminated column contributions live in rhs.
struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<DirichletConstraint> constraints;
  bool constraints_applied = false;
};

/// Stiffness matrix of  ∫ w ∇φ_i · ∇φ_j  for a P1 or P2 trial space. The
/// weight is a scalar DG0 or P1 field; value_dim > 1 gives one decoupled copy
/// per component with node-major dof numbering. Quadrature is exact for the
/// integrand (degree 2 for P1, degree 4 for P2). A non-positive weight sample
/// throws InvalidWeightError naming the cell.
SparseSystem assemble_weighted_laplacian(const TriMesh& mesh, Space trial, const Field& weight,
                                         int value_dim);
SparseSystem assemble_laplacian(const TriMesh& mesh, Space trial, int value_dim);

// Per-cell weights (DG0 coefficients) without building a Field.
SparseMatrix assemble_cellwise_laplacian(const TriMesh& mesh, Space trial,
                                         const Eigen::VectorXd& cell_weight, int value_dim);

SparseMatrix assemble_mass(const TriMesh& mesh, Space trial, int value_dim);

// ∫ f φ_i for a scalar P1/P2 space.
Eigen::VectorXd assemble_load(const TriMesh& mesh, Space trial,
                              const std::function<double(const Vec2&)>& f, int degree);

// Row replacement with symmetrisation; idempotent.
void apply_constraints(SparseSystem& system);

SparseMatrix to_matrix(const Triplets& triplets, int rows, int cols);

enum class LinearSolverKind { Direct, ConjugateGradient };

struct LinearSolverOptions {
  LinearSolverKind kind = LinearSolverKind::Direct;
  // Hint that the (constrained) matrix is symmetric, enabling LDLT.
  bool symmetric = true;
  double cg_tolerance = 1e-12;
  int cg_max_iterations = 20000;
};

/// Factorised matrix. Symmetric matrices use LDLT and fall back to LU when the
/// pivots or the residual check fail; singular matrices throw
/// FactorizationError.
class LinearSolver {
 public:
  LinearSolver(const SparseMatrix& matrix, const LinearSolverOptions& options = {});
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  int size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd solve_linear(const SparseSystem& system, const LinearSolverOptions& options = {});

/// Repeated solves with a fixed set of Dirichlet dofs: the constrained matrix
/// is factorised once; each solve only changes rhs and boundary values.
class ConstrainedSolver {
 public:
  ConstrainedSolver(const SparseMatrix& matrix, std::vector<int> constrained_dofs,
                    const LinearSolverOptions& options = {});

  // `values[k]` is the prescribed value of constrained_dofs()[k].
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& values) const;

  const std::vector<int>& constrained_dofs() const { return dofs_; }
  const SparseMatrix& constrained_matrix() const { return constrained_; }

 private:
  std::vector<int> dofs_;
  SparseMatrix constrained_;
  SparseMatrix coupling_;  // free rows x constrained columns of the original matrix
  LinearSolver solver_;
};

// Expand scalar-node dofs to node-major vector dofs.
std::vector<int> vector_dofs(const std::vector<int>& nodes, int value_dim);

void write_matrix_market(const SparseMatrix& matrix, std::ostream& out);

}  // namespace meshmotion::fem
