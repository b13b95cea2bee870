#include "meshmotion/classic/extension.hpp"

#include "meshmotion/timing.hpp"

namespace meshmotion {

HarmonicExtender::HarmonicExtender(MeshPtr mesh, Space space, const fem::LinearSolverOptions& options)
    : mesh_(std::move(mesh)), space_(space) {
  const fem::SparseSystem k = fem::assemble_laplacian(*mesh_, space_, 1);
  solver_ = std::make_unique<fem::ConstrainedSolver>(k.matrix, mesh_->boundary_nodes(space_), options);
}

Field HarmonicExtender::extend(const BoundaryDisplacement& g) const {
  if (g.space() != space_ || g.mesh()->num_nodes(space_) != mesh_->num_nodes(space_)) {
    throw std::invalid_argument("boundary data does not match the extender");
  }
  const int n = mesh_->num_nodes(space_);
  Eigen::VectorXd u(2 * n);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < 2; ++k) {
    const Eigen::VectorXd uk = solver_->solve(zero, g.component(k));
    for (int i = 0; i < n; ++i) u[2 * i + k] = uk[i];
  }
  return Field(mesh_, space_, 2, std::move(u));
}

Field harmonic_extend(const MeshPtr& mesh, const BoundaryDisplacement& g) {
  return HarmonicExtender(mesh, g.space()).extend(g);
}

fem::SparseSystem harmonic_system(const TriMesh& mesh, const BoundaryDisplacement& g) {
  fem::SparseSystem s = fem::assemble_laplacian(mesh, g.space(), 2);
  const auto dofs = g.dofs();
  for (std::size_t k = 0; k < dofs.size(); ++k) s.constraints.push_back({dofs[k], g.values()[k]});
  fem::apply_constraints(s);
  return s;
}

}  // namespace meshmotion
