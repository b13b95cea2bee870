#pragma once

#include "meshmotion/mesh/mesh.hpp"

#include <array>
#include <span>
#include <stdexcept>

namespace meshmotion::fem {

// Reference-triangle point (xi, eta) with weight normalised to sum 1 over the
// cell, so an integral is area * sum(w * f).
struct QuadraturePoint {
  double xi;
  double eta;
  double weight;
};

// Dunavant rules, exact for polynomials up to `degree` (1, 2 or 4).
std::span<const QuadraturePoint> quadrature(int degree);

struct CellGeometry {
  Vec2 origin;
  Eigen::Matrix2d jacobian;       // columns p1 - p0, p2 - p0
  Eigen::Matrix2d inv_transpose;  // maps reference gradients to physical ones
  double area = 0.0;

  static CellGeometry of(const TriMesh& mesh, int cell) {
    const Cell& t = mesh.cell(cell);
    CellGeometry g;
    g.origin = mesh.vertex(t[0]);
    g.jacobian.col(0) = mesh.vertex(t[1]) - g.origin;
    g.jacobian.col(1) = mesh.vertex(t[2]) - g.origin;
    const double det = g.jacobian.determinant();
    g.area = 0.5 * det;
    g.inv_transpose = g.jacobian.inverse().transpose();
    return g;
  }

  Vec2 map(double xi, double eta) const { return origin + jacobian * Vec2(xi, eta); }
};

inline int local_size(Space space) {
  switch (space) {
    case Space::P1: return 3;
    case Space::P2: return 6;
    case Space::DG0: return 1;
  }
  throw std::invalid_argument("bad space");
}

inline std::array<int, 6> local_nodes(const TriMesh& mesh, Space space, int cell) {
  if (space == Space::P2) return mesh.cell_p2_nodes(cell);
  if (space == Space::DG0) return {cell, -1, -1, -1, -1, -1};
  const Cell& t = mesh.cell(cell);
  return {t[0], t[1], t[2], -1, -1, -1};
}

// Basis values and reference gradients at (xi, eta). Unused trailing entries
// are left untouched.
inline void reference_basis(Space space, double xi, double eta, std::array<double, 6>& value,
                            std::array<Vec2, 6>& grad) {
  const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  const Vec2 g0(-1.0, -1.0), g1(1.0, 0.0), g2(0.0, 1.0);
  switch (space) {
    case Space::DG0:
      value[0] = 1.0;
      grad[0] = Vec2::Zero();
      return;
    case Space::P1:
      value[0] = l0; value[1] = l1; value[2] = l2;
      grad[0] = g0; grad[1] = g1; grad[2] = g2;
      return;
    case Space::P2:
      value[0] = l0 * (2.0 * l0 - 1.0);
      value[1] = l1 * (2.0 * l1 - 1.0);
      value[2] = l2 * (2.0 * l2 - 1.0);
      value[3] = 4.0 * l0 * l1;
      value[4] = 4.0 * l1 * l2;
      value[5] = 4.0 * l2 * l0;
      grad[0] = (4.0 * l0 - 1.0) * g0;
      grad[1] = (4.0 * l1 - 1.0) * g1;
      grad[2] = (4.0 * l2 - 1.0) * g2;
      grad[3] = 4.0 * (l0 * g1 + l1 * g0);
      grad[4] = 4.0 * (l1 * g2 + l2 * g1);
      grad[5] = 4.0 * (l2 * g0 + l0 * g2);
      return;
  }
}

// Physical basis values and gradients at a reference point of one cell.
struct BasisAt {
  int n = 0;
  std::array<double, 6> value{};
  std::array<Vec2, 6> grad{};

  BasisAt(Space space, const CellGeometry& geo, double xi, double eta) : n(local_size(space)) {
    std::array<Vec2, 6> ref;
    reference_basis(space, xi, eta, value, ref);
    for (int a = 0; a < n; ++a) grad[a] = geo.inv_transpose * ref[a];
  }
};

// Gradient (rows = components) of a vector field with `dim` components
// at a point, given the local coefficients.
inline Eigen::Matrix2d vector_gradient(const BasisAt& basis, const Eigen::VectorXd& coefficients,
                                       const std::array<int, 6>& nodes) {
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (int a = 0; a < basis.n; ++a) {
    const double u0 = coefficients[2 * nodes[a]];
    const double u1 = coefficients[2 * nodes[a] + 1];
    g.row(0) += u0 * basis.grad[a].transpose();
    g.row(1) += u1 * basis.grad[a].transpose();
  }
  return g;
}

}  // namespace meshmotion::fem
