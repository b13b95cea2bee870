#pragma once

#include "meshmotion/fem/sparse.hpp"

#include <functional>
#include <vector>

namespace meshmotion::fem {

struct CoefficientValue {
  double value;
  double derivative;  // with respect to s = |grad u|^2
};

using ScalarCoefficient = std::function<CoefficientValue(double s)>;

// Where a(|grad u|^2) is sampled: at every quadrature point, or once per cell
// at the centroid (a DG0 coefficient).
enum class CoefficientPlacement { QuadraturePoints, CellCentroid };

/// Residual R_i = ∫ a(|∇u|²) ∇u : ∇φ_i of a 2-vector field u (node-major
/// coefficients) and optionally its Jacobian. Rows and columns of dofs with
/// constrained[dof] != 0 are replaced by identity and their residual is 0.
/// The Jacobian is symmetric for quadrature-point placement only.
void assemble_gradient_form(const TriMesh& mesh, Space space, const Eigen::VectorXd& u,
                            const ScalarCoefficient& a, CoefficientPlacement placement,
                            const std::vector<char>& constrained, Eigen::VectorXd& residual,
                            SparseMatrix* jacobian);

// Per cell c: Σ_i w_i (K_c u)_i over unconstrained dofs i, where K_c is the
// unweighted local stiffness matrix. With a DG0 coefficient a_c this is the
// derivative of w · R with respect to a_c.
Eigen::VectorXd cellwise_form_action(const TriMesh& mesh, Space space, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& w, const std::vector<char>& constrained);

// |∇u(centroid)|² per cell for a 2-vector field.
Eigen::VectorXd centroid_gradient_norms(const TriMesh& mesh, Space space, const Eigen::VectorXd& u);

// Dense per-dof mask from a list of constrained dofs.
std::vector<char> constraint_mask(int size, const std::vector<int>& dofs);

}  // namespace meshmotion::fem
