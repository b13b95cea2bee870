#include "meshmotion/classic/extension.hpp"

namespace meshmotion {

BiharmonicExtender::BiharmonicExtender(MeshPtr mesh, Space space)
    : mesh_(std::move(mesh)), space_(space), boundary_(mesh_->boundary_nodes(space)) {
  const int n = mesh_->num_nodes(space_);
  const fem::SparseMatrix k = fem::assemble_laplacian(*mesh_, space_, 1).matrix;
  const fem::SparseMatrix m = fem::assemble_mass(*mesh_, space_, 1);
  std::vector<char> on_boundary(n, 0);
  for (int b : boundary_) on_boundary[b] = 1;

  fem::Triplets t;
  t.reserve(2 * k.nonZeros() + m.nonZeros());
  for (int i = 0; i < n; ++i) {
    // (z, φ_i) - (∇u, ∇φ_i) = 0
    for (fem::SparseMatrix::InnerIterator it(k, i); it; ++it) t.emplace_back(i, it.col(), -it.value());
    for (fem::SparseMatrix::InnerIterator it(m, i); it; ++it) t.emplace_back(i, n + it.col(), it.value());
    if (on_boundary[i]) {
      t.emplace_back(n + i, i, 1.0);
    } else {
      for (fem::SparseMatrix::InnerIterator it(k, i); it; ++it) t.emplace_back(n + i, n + it.col(), it.value());
    }
  }
  matrix_ = fem::to_matrix(t, 2 * n, 2 * n);
  fem::LinearSolverOptions opts;
  opts.symmetric = false;
  solver_ = std::make_unique<fem::LinearSolver>(matrix_, opts);
}

Eigen::VectorXd BiharmonicExtender::rhs(const Eigen::VectorXd& boundary_values) const {
  const int n = mesh_->num_nodes(space_);
  if (boundary_values.size() != static_cast<Eigen::Index>(boundary_.size())) {
    throw std::invalid_argument("one boundary value per boundary node");
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * n);
  for (std::size_t k = 0; k < boundary_.size(); ++k) b[n + boundary_[k]] = boundary_values[static_cast<Eigen::Index>(k)];
  return b;
}

Eigen::VectorXd BiharmonicExtender::solve_component(const Eigen::VectorXd& boundary_values) const {
  return solver_->solve(rhs(boundary_values));
}

Field BiharmonicExtender::extend(const BoundaryDisplacement& g) const {
  if (g.space() != space_ || g.nodes() != boundary_) throw std::invalid_argument("boundary data does not match the extender");
  const int n = mesh_->num_nodes(space_);
  Eigen::VectorXd u(2 * n);
  for (int k = 0; k < 2; ++k) {
    const Eigen::VectorXd uz = solve_component(g.component(k));
    for (int i = 0; i < n; ++i) u[2 * i + k] = uz[i];
  }
  // boundary values exactly as given
  for (std::size_t k = 0; k < boundary_.size(); ++k) u.segment<2>(2 * boundary_[k]) = g.at_index(k);
  return Field(mesh_, space_, 2, std::move(u));
}

Field biharmonic_extend(const MeshPtr& mesh, const BoundaryDisplacement& g) {
  return BiharmonicExtender(mesh, g.space()).extend(g);
}

}  // namespace meshmotion
