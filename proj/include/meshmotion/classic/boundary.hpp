#pragma once

#include "meshmotion/mesh/io.hpp"
#include "meshmotion/mesh/mesh.hpp"

#include <functional>
#include <map>
#include <vector>

namespace meshmotion {

/// Displacement prescribed at every boundary node of a P1 or P2 space.
/// Nodes are the ascending boundary nodes of the space; values are stored
/// node-major (x, y per node).
class BoundaryDisplacement {
 public:
  BoundaryDisplacement(MeshPtr mesh, Space space, const std::map<int, Vec2>& values);
  BoundaryDisplacement(MeshPtr mesh, Space space, Eigen::VectorXd values);

  static BoundaryDisplacement zero(MeshPtr mesh, Space space = Space::P2);
  // f evaluated at every boundary node.
  static BoundaryDisplacement from_function(MeshPtr mesh, Space space,
                                            const std::function<Vec2(const Vec2&)>& f);
  // f on nodes of the "moving" boundary, zero on every other boundary node
  // (nodes shared with another tag stay zero).
  static BoundaryDisplacement from_moving(MeshPtr mesh, Space space,
                                          const std::function<Vec2(const Vec2&)>& f,
                                          const std::string& moving_tag = "moving");
  // Trace of a P1/P2 vector field.
  static BoundaryDisplacement trace(const Field& field);

  const MeshPtr& mesh() const { return mesh_; }
  Space space() const { return space_; }
  const std::vector<int>& nodes() const { return nodes_; }
  const Eigen::VectorXd& values() const { return values_; }
  Vec2 at_index(std::size_t k) const { return {values_[2 * k], values_[2 * k + 1]}; }

  // One component as a vector aligned with nodes().
  Eigen::VectorXd component(int k) const;
  // Node-major vector dofs matching values().
  std::vector<int> dofs() const;
  double max_norm() const;
  // Largest |g| over nodes carrying `tag`.
  double max_norm_on(const std::string& tag) const;

  // Same values attached to a mesh with identical topology.
  BoundaryDisplacement with_mesh(MeshPtr mesh) const;

 private:
  MeshPtr mesh_;
  Space space_;
  std::vector<int> nodes_;
  Eigen::VectorXd values_;
};

BoundaryDisplacement operator+(const BoundaryDisplacement& a, const BoundaryDisplacement& b);
BoundaryDisplacement operator-(const BoundaryDisplacement& a, const BoundaryDisplacement& b);
BoundaryDisplacement operator*(double s, const BoundaryDisplacement& a);

// Max |field - g| over the boundary nodes.
double trace_error(const Field& field, const BoundaryDisplacement& g);

// File format: {"space": "P2", "values": {"<node>": [gx, gy], ...}}.
Json boundary_to_json(const BoundaryDisplacement& g);
BoundaryDisplacement boundary_from_json(const Json& j, const MeshPtr& mesh);

}  // namespace meshmotion
