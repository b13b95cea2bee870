#include "meshmotion/fem/nonlinear.hpp"

#include "meshmotion/errors.hpp"
#include "meshmotion/fem/element.hpp"
#include "meshmotion/timing.hpp"

#include <cmath>

namespace meshmotion::fem {

std::vector<char> constraint_mask(int size, const std::vector<int>& dofs) {
  std::vector<char> mask(size, 0);
  for (int d : dofs) mask.at(d) = 1;
  return mask;
}

Eigen::VectorXd centroid_gradient_norms(const TriMesh& mesh, Space space, const Eigen::VectorXd& u) {
  Eigen::VectorXd s(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = CellGeometry::of(mesh, c);
    const BasisAt basis(space, geo, 1.0 / 3.0, 1.0 / 3.0);
    s[c] = vector_gradient(basis, u, local_nodes(mesh, space, c)).squaredNorm();
  }
  return s;
}

Eigen::VectorXd cellwise_form_action(const TriMesh& mesh, Space space, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& w, const std::vector<char>& constrained) {
  const int n = local_size(space);
  const auto rule = quadrature(space == Space::P2 ? 2 : 1);
  Eigen::VectorXd out(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = CellGeometry::of(mesh, c);
    const auto nodes = local_nodes(mesh, space, c);
    double acc = 0.0;
    for (const QuadraturePoint& q : rule) {
      const BasisAt b(space, geo, q.xi, q.eta);
      const Eigen::Matrix2d g = vector_gradient(b, u, nodes);
      for (int i = 0; i < n; ++i) {
        for (int comp = 0; comp < 2; ++comp) {
          const int row = 2 * nodes[i] + comp;
          if (!constrained[row]) acc += q.weight * geo.area * w[row] * g.row(comp).dot(b.grad[i]);
        }
      }
    }
    out[c] = acc;
  }
  return out;
}

void assemble_gradient_form(const TriMesh& mesh, Space space, const Eigen::VectorXd& u,
                            const ScalarCoefficient& a, CoefficientPlacement placement,
                            const std::vector<char>& constrained, Eigen::VectorXd& residual,
                            SparseMatrix* jacobian) {
  PhaseScope phase(Phase::Assembly);
  const int n = local_size(space);
  const int size = 2 * mesh.num_nodes(space);
  if (u.size() != size || static_cast<int>(constrained.size()) != size) {
    throw std::invalid_argument("gradient form: size mismatch");
  }
  residual = Eigen::VectorXd::Zero(size);
  Triplets triplets;
  if (jacobian) triplets.reserve(static_cast<std::size_t>(mesh.num_cells()) * 4 * n * n + size);
  const auto rule = quadrature(space == Space::P2 ? 4 : 2);
  const auto stiff_rule = quadrature(space == Space::P2 ? 2 : 1);

  Eigen::Matrix<double, 12, 1> r_loc;
  Eigen::Matrix<double, 12, 12> j_loc;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = CellGeometry::of(mesh, c);
    const auto nodes = local_nodes(mesh, space, c);
    r_loc.setZero();
    j_loc.setZero();
    if (placement == CoefficientPlacement::CellCentroid) {
      const BasisAt mid(space, geo, 1.0 / 3.0, 1.0 / 3.0);
      const Eigen::Matrix2d g = vector_gradient(mid, u, nodes);
      const CoefficientValue coef = a(g.squaredNorm());
      if (!(coef.value > 0.0) || !std::isfinite(coef.value)) throw InvalidWeightError(c, coef.value);
      Eigen::Matrix<double, 6, 6> k = Eigen::Matrix<double, 6, 6>::Zero();
      for (const QuadraturePoint& q : stiff_rule) {
        const BasisAt b(space, geo, q.xi, q.eta);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) k(i, j) += q.weight * geo.area * b.grad[i].dot(b.grad[j]);
      }
      // (K u)_{i,comp}
      Eigen::Matrix<double, 6, 2> ku = Eigen::Matrix<double, 6, 2>::Zero();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int comp = 0; comp < 2; ++comp) ku(i, comp) += k(i, j) * u[2 * nodes[j] + comp];
      for (int i = 0; i < n; ++i)
        for (int comp = 0; comp < 2; ++comp) r_loc[2 * i + comp] = coef.value * ku(i, comp);
      if (jacobian) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            for (int kc = 0; kc < 2; ++kc) {
              j_loc(2 * i + kc, 2 * j + kc) += coef.value * k(i, j);
              for (int lc = 0; lc < 2; ++lc) {
                const double ds = 2.0 * g.row(lc).dot(mid.grad[j]);
                j_loc(2 * i + kc, 2 * j + lc) += coef.derivative * ku(i, kc) * ds;
              }
            }
          }
        }
      }
    } else {
      for (const QuadraturePoint& q : rule) {
        const BasisAt b(space, geo, q.xi, q.eta);
        const Eigen::Matrix2d g = vector_gradient(b, u, nodes);
        const CoefficientValue coef = a(g.squaredNorm());
        if (!(coef.value > 0.0) || !std::isfinite(coef.value)) throw InvalidWeightError(c, coef.value);
        const double w = q.weight * geo.area;
        Eigen::Matrix<double, 6, 2> gphi;  // (G row comp) . grad phi_i
        for (int i = 0; i < n; ++i)
          for (int comp = 0; comp < 2; ++comp) gphi(i, comp) = g.row(comp).dot(b.grad[i]);
        for (int i = 0; i < n; ++i)
          for (int comp = 0; comp < 2; ++comp) r_loc[2 * i + comp] += w * coef.value * gphi(i, comp);
        if (jacobian) {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              const double kij = b.grad[i].dot(b.grad[j]);
              for (int kc = 0; kc < 2; ++kc) {
                j_loc(2 * i + kc, 2 * j + kc) += w * coef.value * kij;
                for (int lc = 0; lc < 2; ++lc) {
                  j_loc(2 * i + kc, 2 * j + lc) += w * 2.0 * coef.derivative * gphi(i, kc) * gphi(j, lc);
                }
              }
            }
          }
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int kc = 0; kc < 2; ++kc) {
        const int row = 2 * nodes[i] + kc;
        if (constrained[row]) continue;
        residual[row] += r_loc[2 * i + kc];
        if (!jacobian) continue;
        for (int j = 0; j < n; ++j) {
          for (int lc = 0; lc < 2; ++lc) {
            const int col = 2 * nodes[j] + lc;
            if (!constrained[col]) triplets.emplace_back(row, col, j_loc(2 * i + kc, 2 * j + lc));
          }
        }
      }
    }
  }
  if (jacobian) {
    for (int d = 0; d < size; ++d) {
      if (constrained[d]) triplets.emplace_back(d, d, 1.0);
    }
    *jacobian = to_matrix(triplets, size, size);
  }
}

}  // namespace meshmotion::fem
