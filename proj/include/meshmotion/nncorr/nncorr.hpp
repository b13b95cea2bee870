#pragma once

#include "meshmotion/classic/extension.hpp"
#include "meshmotion/fem/clement.hpp"
#include "meshmotion/nncorr/mlp.hpp"

#include <memory>

namespace meshmotion {

constexpr int kNNCorrFeatures = 8;

/// Per-vertex network inputs (ξ1, ξ2, u1, u2, ∂u1/∂x, ∂u1/∂y, ∂u2/∂x, ∂u2/∂y)
/// from a P1/P2 displacement and its Clément gradient (4-component P1).
Eigen::MatrixXd nncorr_features(const Field& u, const Field& clement);

// Vertex values of a P1/P2 vector field as a 2 x n_v matrix.
Eigen::MatrixXd vertex_matrix(const Field& u);

// P2 field whose vertex values are `c` (2 x n_v) and whose edge midpoint
// values are the averages of the endpoint values.
Field embed_p1_in_p2(const MeshPtr& mesh, const Eigen::MatrixXd& c);

/// u_harm + embed(ℓ · N_θ(ξ, u_harm, D_c u_harm)) with the harmonic solve and
/// the Clément matrix prepared once per mesh.
class NNCorrExtender {
 public:
  NNCorrExtender(MeshPtr mesh, MlpParams params, Field mask);

  Field extend(const BoundaryDisplacement& g) const;
  // Correction for a given harmonic extension (2 x n_v, already masked).
  Eigen::MatrixXd correction(const Field& harmonic) const;

  const Field& mask() const { return mask_; }
  const MlpParams& params() const { return params_; }

 private:
  MeshPtr mesh_;
  MlpParams params_;
  Field mask_;
  HarmonicExtender harmonic_;
  fem::ClementOperator clement_;
};

Field nncorr_extend(const MeshPtr& mesh, const BoundaryDisplacement& g, const MlpParams& params, const Field& mask);

}  // namespace meshmotion
