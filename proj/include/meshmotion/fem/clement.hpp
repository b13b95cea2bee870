#pragma once

#include "meshmotion/fem/sparse.hpp"

namespace meshmotion::fem {

/// Clément gradient recovery as a pre-assembled sparse matrix. Each vertex
/// value is the area-weighted average over its cell patch of the cell-mean
/// gradients. Output is a 4-component P1 field ordered
/// (du1/dx, du1/dy, du2/dx, du2/dy).
class ClementOperator {
 public:
  ClementOperator(MeshPtr mesh, Space space);

  Field apply(const Field& field) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& coefficients) const { return matrix_ * coefficients; }

  const SparseMatrix& matrix() const { return matrix_; }
  Space space() const { return space_; }

 private:
  MeshPtr mesh_;
  Space space_;
  SparseMatrix matrix_;
};

Field clement_gradient(const Field& field);

}  // namespace meshmotion::fem
