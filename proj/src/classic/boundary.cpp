#include "meshmotion/classic/boundary.hpp"

#include "meshmotion/fem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace meshmotion {

namespace {

void check_space(Space space) {
  if (space == Space::DG0) throw std::invalid_argument("boundary data needs a P1 or P2 space");
}

}  // namespace

BoundaryDisplacement::BoundaryDisplacement(MeshPtr mesh, Space space, const std::map<int, Vec2>& values)
    : mesh_(std::move(mesh)), space_(space) {
  check_space(space);
  nodes_ = mesh_->boundary_nodes(space);
  if (values.size() != nodes_.size()) {
    throw std::invalid_argument("boundary displacement must cover every boundary node exactly");
  }
  values_.resize(2 * nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto it = values.find(nodes_[k]);
    if (it == values.end()) {
      throw std::invalid_argument("missing boundary value for node " + std::to_string(nodes_[k]));
    }
    values_.segment<2>(2 * k) = it->second;
  }
  if (!values_.allFinite()) throw std::invalid_argument("non-finite boundary displacement");
}

BoundaryDisplacement::BoundaryDisplacement(MeshPtr mesh, Space space, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), space_(space), values_(std::move(values)) {
  check_space(space);
  nodes_ = mesh_->boundary_nodes(space);
  if (values_.size() != static_cast<Eigen::Index>(2 * nodes_.size())) {
    throw std::invalid_argument("boundary displacement has wrong length");
  }
  if (!values_.allFinite()) throw std::invalid_argument("non-finite boundary displacement");
}

BoundaryDisplacement BoundaryDisplacement::zero(MeshPtr mesh, Space space) {
  const std::size_t n = mesh->boundary_nodes(space).size();
  return BoundaryDisplacement(std::move(mesh), space, Eigen::VectorXd::Zero(2 * n));
}

BoundaryDisplacement BoundaryDisplacement::from_function(MeshPtr mesh, Space space,
                                                         const std::function<Vec2(const Vec2&)>& f) {
  const auto nodes = mesh->boundary_nodes(space);
  Eigen::VectorXd v(2 * nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) v.segment<2>(2 * k) = f(mesh->node_position(nodes[k]));
  return BoundaryDisplacement(std::move(mesh), space, std::move(v));
}

BoundaryDisplacement BoundaryDisplacement::from_moving(MeshPtr mesh, Space space,
                                                       const std::function<Vec2(const Vec2&)>& f,
                                                       const std::string& moving_tag) {
  const auto nodes = mesh->boundary_nodes(space);
  std::set<int> moving;
  for (int n : mesh->tagged_nodes(space, moving_tag)) moving.insert(n);
  for (const std::string& tag : mesh->tags()) {
    if (tag == moving_tag) continue;
    for (int n : mesh->tagged_nodes(space, tag)) moving.erase(n);
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (moving.count(nodes[k])) v.segment<2>(2 * k) = f(mesh->node_position(nodes[k]));
  }
  return BoundaryDisplacement(std::move(mesh), space, std::move(v));
}

BoundaryDisplacement BoundaryDisplacement::trace(const Field& field) {
  if (field.value_dim() != 2) throw std::invalid_argument("trace needs a vector field");
  const auto nodes = field.mesh()->boundary_nodes(field.space());
  Eigen::VectorXd v(2 * nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) v.segment<2>(2 * k) = field.vector(nodes[k]);
  return BoundaryDisplacement(field.mesh(), field.space(), std::move(v));
}

Eigen::VectorXd BoundaryDisplacement::component(int k) const {
  Eigen::VectorXd c(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) c[i] = values_[2 * i + k];
  return c;
}

std::vector<int> BoundaryDisplacement::dofs() const { return fem::vector_dofs(nodes_, 2); }

double BoundaryDisplacement::max_norm() const {
  double m = 0.0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) m = std::max(m, at_index(k).norm());
  return m;
}

double BoundaryDisplacement::max_norm_on(const std::string& tag) const {
  const auto tagged = mesh_->tagged_nodes(space_, tag);
  double m = 0.0;
  for (int n : tagged) {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), n);
    m = std::max(m, at_index(static_cast<std::size_t>(it - nodes_.begin())).norm());
  }
  return m;
}

BoundaryDisplacement BoundaryDisplacement::with_mesh(MeshPtr mesh) const {
  if (mesh->num_vertices() != mesh_->num_vertices() || mesh->num_cells() != mesh_->num_cells()) {
    throw std::invalid_argument("meshes differ in topology");
  }
  return BoundaryDisplacement(std::move(mesh), space_, values_);
}

namespace {
void check_compatible(const BoundaryDisplacement& a, const BoundaryDisplacement& b) {
  if (a.space() != b.space() || a.nodes() != b.nodes()) throw std::invalid_argument("incompatible boundary data");
}
}  // namespace

BoundaryDisplacement operator+(const BoundaryDisplacement& a, const BoundaryDisplacement& b) {
  check_compatible(a, b);
  return BoundaryDisplacement(a.mesh(), a.space(), Eigen::VectorXd(a.values() + b.values()));
}

BoundaryDisplacement operator-(const BoundaryDisplacement& a, const BoundaryDisplacement& b) {
  check_compatible(a, b);
  return BoundaryDisplacement(a.mesh(), a.space(), Eigen::VectorXd(a.values() - b.values()));
}

BoundaryDisplacement operator*(double s, const BoundaryDisplacement& a) {
  return BoundaryDisplacement(a.mesh(), a.space(), Eigen::VectorXd(s * a.values()));
}

double trace_error(const Field& field, const BoundaryDisplacement& g) {
  if (field.space() != g.space()) throw std::invalid_argument("field and boundary data differ in space");
  double e = 0.0;
  for (std::size_t k = 0; k < g.nodes().size(); ++k) {
    e = std::max(e, (field.vector(g.nodes()[k]) - g.at_index(k)).cwiseAbs().maxCoeff());
  }
  return e;
}

Json boundary_to_json(const BoundaryDisplacement& g) {
  Json values = Json::object();
  for (std::size_t k = 0; k < g.nodes().size(); ++k) {
    values[std::to_string(g.nodes()[k])] = {g.values()[2 * k], g.values()[2 * k + 1]};
  }
  return {{"space", to_string(g.space())}, {"values", values}};
}

BoundaryDisplacement boundary_from_json(const Json& j, const MeshPtr& mesh) {
  std::map<int, Vec2> values;
  for (const auto& [key, v] : j.at("values").items()) {
    values[std::stoi(key)] = Vec2(v.at(0).get<double>(), v.at(1).get<double>());
  }
  return BoundaryDisplacement(mesh, space_from_string(j.at("space").get<std::string>()), values);
}

}  // namespace meshmotion
