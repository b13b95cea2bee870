#include "meshmotion/fem/clement.hpp"

#include "meshmotion/fem/element.hpp"

#include <stdexcept>

namespace meshmotion::fem {

ClementOperator::ClementOperator(MeshPtr mesh, Space space) : mesh_(std::move(mesh)), space_(space) {
  if (space == Space::DG0) throw std::invalid_argument("Clement recovery needs a P1 or P2 field");
  const TriMesh& m = *mesh_;
  const int n = local_size(space);
  std::vector<double> patch_area(m.num_vertices(), 0.0);
  for (int c = 0; c < m.num_cells(); ++c) {
    for (int v : m.cell(c)) patch_area[v] += m.signed_area(c);
  }
  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(m.num_cells()) * 3 * n * 4);
  for (int c = 0; c < m.num_cells(); ++c) {
    const CellGeometry geo = CellGeometry::of(m, c);
    // the mean of a linear gradient is its centroid value
    const BasisAt basis(space, geo, 1.0 / 3.0, 1.0 / 3.0);
    const auto nodes = local_nodes(m, space, c);
    for (int v : m.cell(c)) {
      const double w = geo.area / patch_area[v];
      for (int a = 0; a < n; ++a) {
        for (int comp = 0; comp < 2; ++comp) {
          for (int dir = 0; dir < 2; ++dir) {
            triplets.emplace_back(4 * v + 2 * comp + dir, 2 * nodes[a] + comp, w * basis.grad[a][dir]);
          }
        }
      }
    }
  }
  matrix_ = to_matrix(triplets, 4 * m.num_vertices(), 2 * m.num_nodes(space));
}

Field ClementOperator::apply(const Field& field) const {
  if (field.mesh() != mesh_ && field.mesh()->num_cells() != mesh_->num_cells()) {
    throw std::invalid_argument("field lives on a different mesh");
  }
  if (field.space() != space_ || field.value_dim() != 2) {
    throw std::invalid_argument("Clement operator built for a different space");
  }
  return Field(mesh_, Space::P1, 4, matrix_ * field.coefficients());
}

Field clement_gradient(const Field& field) {
  return ClementOperator(field.mesh(), field.space()).apply(field);
}

}  // namespace meshmotion::fem
