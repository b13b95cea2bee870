#include "meshmotion/nncorr/nncorr.hpp"

#include "meshmotion/timing.hpp"

namespace meshmotion {

Eigen::MatrixXd vertex_matrix(const Field& u) {
  if (u.value_dim() != 2 || u.space() == Space::DG0) throw std::invalid_argument("expected a continuous vector field");
  const int nv = u.mesh()->num_vertices();
  Eigen::MatrixXd m(2, nv);
  for (int v = 0; v < nv; ++v) m.col(v) = u.vector(v);
  return m;
}

Eigen::MatrixXd nncorr_features(const Field& u, const Field& clement) {
  const TriMesh& mesh = *u.mesh();
  if (clement.space() != Space::P1 || clement.value_dim() != 4 || clement.mesh()->num_vertices() != mesh.num_vertices())
    throw std::invalid_argument("features: expected a 4-component P1 gradient field");
  const int nv = mesh.num_vertices();
  Eigen::MatrixXd x(kNNCorrFeatures, nv);
  const Eigen::VectorXd& g = clement.coefficients();
  for (int v = 0; v < nv; ++v) {
    x.col(v) << mesh.vertex(v).x(), mesh.vertex(v).y(), u.vector(v).x(), u.vector(v).y(), g[4 * v], g[4 * v + 1],
        g[4 * v + 2], g[4 * v + 3];
  }
  return x;
}

Field embed_p1_in_p2(const MeshPtr& mesh, const Eigen::MatrixXd& c) {
  const int nv = mesh->num_vertices();
  if (c.rows() != 2 || c.cols() != nv) throw std::invalid_argument("embed: expected 2 x n_v values");
  Eigen::VectorXd coef(2 * mesh->num_nodes(Space::P2));
  for (int v = 0; v < nv; ++v) coef.segment<2>(2 * v) = c.col(v);
  for (int e = 0; e < mesh->num_edges(); ++e) {
    const Edge& ed = mesh->edges()[e];
    coef.segment<2>(2 * (nv + e)) = 0.5 * (c.col(ed[0]) + c.col(ed[1]));
  }
  return Field(mesh, Space::P2, 2, std::move(coef));
}

NNCorrExtender::NNCorrExtender(MeshPtr mesh, MlpParams params, Field mask)
    : mesh_(mesh), params_(std::move(params)), mask_(std::move(mask)), harmonic_(mesh, Space::P2),
      clement_(mesh, Space::P2) {
  params_.validate();
  if (mask_.space() != Space::P1 || mask_.value_dim() != 1 || mask_.mesh()->num_vertices() != mesh_->num_vertices())
    throw std::invalid_argument("nncorr: mask must be a scalar P1 field on the mesh");
  const auto w = params_.widths();
  if (w.front() != kNNCorrFeatures || w.back() != 2) throw std::invalid_argument("nncorr: network must map 8 -> 2");
}

Eigen::MatrixXd NNCorrExtender::correction(const Field& harmonic) const {
  const Field grad(mesh_, Space::P1, 4, clement_.apply(harmonic.coefficients()));
  const Eigen::MatrixXd x = nncorr_features(harmonic, grad);
  PhaseScope phase(Phase::NeuralNetwork);
  Eigen::MatrixXd out = mlp_forward(params_, x);
  for (Eigen::Index v = 0; v < out.cols(); ++v) out.col(v) *= mask_.scalar(static_cast<int>(v));
  return out;
}

Field NNCorrExtender::extend(const BoundaryDisplacement& g) const {
  const Field harmonic = harmonic_.extend(g);
  return harmonic + embed_p1_in_p2(mesh_, correction(harmonic));
}

Field nncorr_extend(const MeshPtr& mesh, const BoundaryDisplacement& g, const MlpParams& params, const Field& mask) {
  return NNCorrExtender(mesh, params, mask).extend(g);
}

}  // namespace meshmotion
