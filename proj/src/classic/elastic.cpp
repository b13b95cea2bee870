#include "meshmotion/classic/extension.hpp"

#include "meshmotion/errors.hpp"
#include "meshmotion/fem/element.hpp"
#include "meshmotion/timing.hpp"

#include <set>

namespace meshmotion {

void ElasticStiffnessConfig::validate() const {
  if (!(mu_min > 0.0) || !(mu_max >= mu_min)) throw std::invalid_argument("need mu_max >= mu_min > 0");
}

Field elastic_stiffness(const MeshPtr& mesh, const ElasticStiffnessConfig& cfg) {
  cfg.validate();
  if (!mesh->has_tag(cfg.gamma_tag)) throw std::invalid_argument("mesh has no tag '" + cfg.gamma_tag + "'");
  const auto boundary = mesh->boundary_nodes(Space::P1);
  std::set<int> gamma;
  for (int v : mesh->tagged_nodes(Space::P1, cfg.gamma_tag)) gamma.insert(v);
  Eigen::VectorXd values(boundary.size());
  for (std::size_t k = 0; k < boundary.size(); ++k) values[k] = gamma.count(boundary[k]) ? cfg.mu_max : cfg.mu_min;
  const fem::SparseSystem k = fem::assemble_laplacian(*mesh, Space::P1, 1);
  fem::ConstrainedSolver solver(k.matrix, boundary);
  Eigen::VectorXd mu = solver.solve(Eigen::VectorXd::Zero(mesh->num_vertices()), values);
  return Field(mesh, Space::P1, 1, std::move(mu));
}

namespace {

// ∫ 2 μ ε(u) : ε(v) for a 2-vector field, μ a P1 scalar field.
fem::SparseMatrix assemble_elasticity(const TriMesh& mesh, Space space, const Field& mu) {
  PhaseScope phase(Phase::Assembly);
  const int n = fem::local_size(space);
  const auto rule = fem::quadrature(space == Space::P2 ? 4 : 2);
  const Eigen::VectorXd& m = mu.coefficients();
  fem::Triplets t;
  t.reserve(static_cast<std::size_t>(mesh.num_cells()) * 4 * n * n);
  Eigen::Matrix<double, 12, 12> local;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const fem::CellGeometry geo = fem::CellGeometry::of(mesh, c);
    const auto nodes = fem::local_nodes(mesh, space, c);
    const Cell& tri = mesh.cell(c);
    local.setZero();
    for (const auto& q : rule) {
      const fem::BasisAt b(space, geo, q.xi, q.eta);
      const double muq = (1.0 - q.xi - q.eta) * m[tri[0]] + q.xi * m[tri[1]] + q.eta * m[tri[2]];
      if (!(muq > 0.0)) throw InvalidWeightError(c, muq);
      const double w = q.weight * geo.area * muq;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double dot = b.grad[i].dot(b.grad[j]);
          for (int k = 0; k < 2; ++k) {
            for (int l = 0; l < 2; ++l) {
              // 2 ε(φ_j e_l) : ε(φ_i e_k) = δ_kl ∇φ_i·∇φ_j + ∂_l φ_i ∂_k φ_j
              local(2 * i + k, 2 * j + l) += w * ((k == l ? dot : 0.0) + b.grad[i][l] * b.grad[j][k]);
            }
          }
        }
      }
    }
    for (int i = 0; i < 2 * n; ++i) {
      for (int j = 0; j < 2 * n; ++j) t.emplace_back(2 * nodes[i / 2] + i % 2, 2 * nodes[j / 2] + j % 2, local(i, j));
    }
  }
  const int size = 2 * mesh.num_nodes(space);
  return fem::to_matrix(t, size, size);
}

}  // namespace

Field elastic_extend(const MeshPtr& mesh, const BoundaryDisplacement& g, const ElasticStiffnessConfig& cfg) {
  const Field mu = elastic_stiffness(mesh, cfg);
  const fem::SparseMatrix a = assemble_elasticity(*mesh, g.space(), mu);
  fem::ConstrainedSolver solver(a, g.dofs());
  Eigen::VectorXd u = solver.solve(Eigen::VectorXd::Zero(a.rows()), g.values());
  return Field(mesh, g.space(), 2, std::move(u));
}

}  // namespace meshmotion
