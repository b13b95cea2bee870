#include "meshmotion/mesh/mesh.hpp"

#include "meshmotion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace meshmotion {

std::string to_string(Space space) {
  switch (space) {
    case Space::P1: return "P1";
    case Space::P2: return "P2";
    case Space::DG0: return "DG0";
  }
  return "?";
}

Space space_from_string(std::string_view name) {
  if (name == "P1") return Space::P1;
  if (name == "P2") return Space::P2;
  if (name == "DG0") return Space::DG0;
  throw std::invalid_argument("unknown space '" + std::string(name) + "'");
}

namespace {
Edge sorted_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }
}  // namespace

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<Cell> cells,
                 std::vector<BoundaryEdge> boundary)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), boundary_(std::move(boundary)) {
  const int nv = num_vertices();
  const int nc = num_cells();
  for (int c = 0; c < nc; ++c) {
    for (int v : cells_[c]) {
      if (v < 0 || v >= nv) throw std::invalid_argument("cell vertex index out of range");
    }
    const double a = signed_area(c);
    if (!(a > 0.0)) throw DegenerateMeshError(c, a);
  }

  std::vector<Edge> all;
  all.reserve(3 * cells_.size());
  for (const Cell& cell : cells_) {
    for (int k = 0; k < 3; ++k) all.push_back(sorted_edge(cell[k], cell[(k + 1) % 3]));
  }
  std::sort(all.begin(), all.end());
  edges_.reserve(all.size() / 2 + nv);
  edge_cell_count_.reserve(all.size() / 2 + nv);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i > 0 && all[i] == all[i - 1]) {
      ++edge_cell_count_.back();
      if (edge_cell_count_.back() > 2) throw std::invalid_argument("non-manifold edge");
    } else {
      edges_.push_back(all[i]);
      edge_cell_count_.push_back(1);
    }
  }

  cell_edges_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    for (int k = 0; k < 3; ++k) cell_edges_[c][k] = edge_index(cells_[c][k], cells_[c][(k + 1) % 3]);
  }

  boundary_edge_tag_.assign(edges_.size(), -1);
  boundary_vertex_.assign(nv, false);
  for (const BoundaryEdge& be : boundary_) {
    const int e = edge_index(be.vertices[0], be.vertices[1]);
    if (e < 0) throw std::invalid_argument("boundary edge is not a mesh edge");
    if (edge_cell_count_[e] != 1) {
      throw std::invalid_argument("boundary edge does not belong to exactly one cell");
    }
    if (boundary_edge_tag_[e] >= 0) throw std::invalid_argument("boundary edge tagged twice");
    auto it = std::find(tag_names_.begin(), tag_names_.end(), be.tag);
    if (it == tag_names_.end()) {
      tag_names_.push_back(be.tag);
      it = tag_names_.end() - 1;
    }
    boundary_edge_tag_[e] = static_cast<int>(it - tag_names_.begin());
    boundary_vertex_[be.vertices[0]] = true;
    boundary_vertex_[be.vertices[1]] = true;
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_cell_count_[e] == 1 && boundary_edge_tag_[e] < 0) {
      throw std::invalid_argument("untagged boundary edge (" + std::to_string(edges_[e][0]) + ", " +
                                  std::to_string(edges_[e][1]) + ")");
    }
  }

  vertex_cell_offsets_.assign(nv + 1, 0);
  for (const Cell& cell : cells_) {
    for (int v : cell) ++vertex_cell_offsets_[v + 1];
  }
  for (int v = 0; v < nv; ++v) vertex_cell_offsets_[v + 1] += vertex_cell_offsets_[v];
  vertex_cell_list_.resize(vertex_cell_offsets_[nv]);
  std::vector<int> fill(vertex_cell_offsets_.begin(), vertex_cell_offsets_.end() - 1);
  for (int c = 0; c < nc; ++c) {
    for (int v : cells_[c]) vertex_cell_list_[fill[v]++] = c;
  }
}

std::array<int, 6> TriMesh::cell_p2_nodes(int c) const {
  const Cell& cell = cells_[c];
  const auto& e = cell_edges_[c];
  const int nv = num_vertices();
  return {cell[0], cell[1], cell[2], nv + e[0], nv + e[1], nv + e[2]};
}

int TriMesh::edge_index(int a, int b) const {
  const Edge key = sorted_edge(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return -1;
  return static_cast<int>(it - edges_.begin());
}

bool TriMesh::has_tag(const std::string& tag) const {
  return std::find(tag_names_.begin(), tag_names_.end(), tag) != tag_names_.end();
}

std::vector<int> TriMesh::tagged_edges(const std::string& tag) const {
  std::vector<int> out;
  auto it = std::find(tag_names_.begin(), tag_names_.end(), tag);
  if (it == tag_names_.end()) return out;
  const int id = static_cast<int>(it - tag_names_.begin());
  for (int e = 0; e < num_edges(); ++e) {
    if (boundary_edge_tag_[e] == id) out.push_back(e);
  }
  return out;
}

std::vector<int> TriMesh::tagged_vertices(const std::string& tag) const {
  std::vector<int> out;
  for (int e : tagged_edges(tag)) {
    out.push_back(edges_[e][0]);
    out.push_back(edges_[e][1]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::span<const int> TriMesh::vertex_cells(int v) const {
  return {vertex_cell_list_.data() + vertex_cell_offsets_[v],
          static_cast<std::size_t>(vertex_cell_offsets_[v + 1] - vertex_cell_offsets_[v])};
}

double TriMesh::signed_area(int c) const {
  const Vec2& a = vertices_[cells_[c][0]];
  const Vec2& b = vertices_[cells_[c][1]];
  const Vec2& d = vertices_[cells_[c][2]];
  return 0.5 * ((b.x() - a.x()) * (d.y() - a.y()) - (b.y() - a.y()) * (d.x() - a.x()));
}

double TriMesh::total_area() const {
  double sum = 0.0;
  for (int c = 0; c < num_cells(); ++c) sum += signed_area(c);
  return sum;
}

Vec2 TriMesh::centroid(int c) const {
  return (vertices_[cells_[c][0]] + vertices_[cells_[c][1]] + vertices_[cells_[c][2]]) / 3.0;
}

int TriMesh::num_nodes(Space space) const {
  switch (space) {
    case Space::P1: return num_vertices();
    case Space::P2: return num_vertices() + num_edges();
    case Space::DG0: return num_cells();
  }
  return 0;
}

Vec2 TriMesh::node_position(int node) const {
  if (node < num_vertices()) return vertices_[node];
  const Edge& e = edges_[node - num_vertices()];
  return 0.5 * (vertices_[e[0]] + vertices_[e[1]]);
}

std::vector<int> TriMesh::boundary_nodes(Space space) const {
  if (space == Space::DG0) throw std::invalid_argument("DG0 has no boundary nodes");
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v) {
    if (boundary_vertex_[v]) out.push_back(v);
  }
  if (space == Space::P2) {
    for (int e = 0; e < num_edges(); ++e) {
      if (boundary_edge_tag_[e] >= 0) out.push_back(num_vertices() + e);
    }
  }
  return out;
}

std::vector<int> TriMesh::tagged_nodes(Space space, const std::string& tag) const {
  if (space == Space::DG0) throw std::invalid_argument("DG0 has no boundary nodes");
  std::vector<int> out = tagged_vertices(tag);
  if (space == Space::P2) {
    for (int e : tagged_edges(tag)) out.push_back(num_vertices() + e);
  }
  return out;
}

MeshPtr make_mesh(std::vector<Vec2> vertices, std::vector<Cell> cells,
                  std::vector<BoundaryEdge> boundary) {
  return std::make_shared<const TriMesh>(std::move(vertices), std::move(cells), std::move(boundary));
}

Field::Field(MeshPtr mesh, Space space, int value_dim, Eigen::VectorXd coefficients)
    : mesh_(std::move(mesh)), space_(space), value_dim_(value_dim), coefficients_(std::move(coefficients)) {
  if (!mesh_) throw std::invalid_argument("field without mesh");
  if (value_dim_ < 1) throw std::invalid_argument("value_dim must be positive");
  const Eigen::Index expected = static_cast<Eigen::Index>(value_dim_) * mesh_->num_nodes(space_);
  if (coefficients_.size() != expected) {
    throw std::invalid_argument("field coefficient length " + std::to_string(coefficients_.size()) +
                                " does not match " + std::to_string(expected));
  }
  if (!coefficients_.allFinite()) throw std::invalid_argument("non-finite field coefficient");
}

Field Field::zeros(MeshPtr mesh, Space space, int value_dim) {
  const Eigen::Index n = static_cast<Eigen::Index>(value_dim) * mesh->num_nodes(space);
  return Field(std::move(mesh), space, value_dim, Eigen::VectorXd::Zero(n));
}

Field Field::with_coefficients(Eigen::VectorXd coefficients) const {
  return Field(mesh_, space_, value_dim_, std::move(coefficients));
}

namespace {
void check_compatible(const Field& a, const Field& b) {
  if (a.space() != b.space() || a.value_dim() != b.value_dim() ||
      a.coefficients().size() != b.coefficients().size()) {
    throw std::invalid_argument("incompatible fields");
  }
}
}  // namespace

Field operator+(const Field& a, const Field& b) {
  check_compatible(a, b);
  return a.with_coefficients(a.coefficients() + b.coefficients());
}

Field operator-(const Field& a, const Field& b) {
  check_compatible(a, b);
  return a.with_coefficients(a.coefficients() - b.coefficients());
}

Field operator*(double s, const Field& a) { return a.with_coefficients(s * a.coefficients()); }

Field interpolate_vector(const MeshPtr& mesh, Space space, const std::function<Vec2(const Vec2&)>& f) {
  const int n = mesh->num_nodes(space);
  Eigen::VectorXd c(2 * n);
  for (int i = 0; i < n; ++i) {
    const Vec2 x = space == Space::DG0 ? mesh->centroid(i) : mesh->node_position(i);
    const Vec2 v = f(x);
    c[2 * i] = v.x();
    c[2 * i + 1] = v.y();
  }
  return Field(mesh, space, 2, std::move(c));
}

Field interpolate_scalar(const MeshPtr& mesh, Space space, const std::function<double(const Vec2&)>& f) {
  const int n = mesh->num_nodes(space);
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c[i] = f(space == Space::DG0 ? mesh->centroid(i) : mesh->node_position(i));
  return Field(mesh, space, 1, std::move(c));
}

Field vertex_values(const Field& field) {
  if (field.space() == Space::DG0) throw std::invalid_argument("DG0 field has no vertex values");
  const Eigen::Index n = static_cast<Eigen::Index>(field.mesh()->num_vertices()) * field.value_dim();
  return Field(field.mesh(), Space::P1, field.value_dim(), field.coefficients().head(n));
}

MeshPtr deform(const TriMesh& mesh, const Field& displacement) {
  if (displacement.value_dim() != 2 || displacement.space() == Space::DG0) {
    throw std::invalid_argument("deform expects a P1 or P2 vector field");
  }
  if (displacement.mesh()->num_vertices() != mesh.num_vertices()) {
    throw std::invalid_argument("displacement lives on a different mesh");
  }
  std::vector<Vec2> moved(mesh.vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) moved[v] += displacement.vector(v);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& t = mesh.cell(c);
    const Vec2& a = moved[t[0]];
    const Vec2& b = moved[t[1]];
    const Vec2& d = moved[t[2]];
    const double area = 0.5 * ((b.x() - a.x()) * (d.y() - a.y()) - (b.y() - a.y()) * (d.x() - a.x()));
    if (!(area > 0.0)) throw DegenerateMeshError(c, area);
  }
  return make_mesh(std::move(moved), mesh.cells(), mesh.boundary_edges());
}

MeshPtr deform(const MeshPtr& mesh, const Field& displacement) { return deform(*mesh, displacement); }

Field rebind(const Field& field, const MeshPtr& mesh) {
  return Field(mesh, field.space(), field.value_dim(), field.coefficients());
}

MeshPtr rectangle_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                       const std::string& tag) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("rectangle_mesh needs nx, ny >= 1");
  std::vector<Vec2> vertices;
  vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      vertices.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Cell> cells;
  cells.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<BoundaryEdge> boundary;
  for (int i = 0; i < nx; ++i) {
    boundary.push_back({{id(i, 0), id(i + 1, 0)}, tag});
    boundary.push_back({{id(i + 1, ny), id(i, ny)}, tag});
  }
  for (int j = 0; j < ny; ++j) {
    boundary.push_back({{id(nx, j), id(nx, j + 1)}, tag});
    boundary.push_back({{id(0, j + 1), id(0, j)}, tag});
  }
  return make_mesh(std::move(vertices), std::move(cells), std::move(boundary));
}

MeshPtr unit_square_mesh(int n) { return rectangle_mesh(0.0, 1.0, 0.0, 1.0, n, n); }

MeshPtr refine_uniform(const TriMesh& mesh) {
  const int nv = mesh.num_vertices();
  std::vector<Vec2> vertices(mesh.vertices());
  vertices.reserve(nv + mesh.num_edges());
  for (const Edge& e : mesh.edges()) vertices.push_back(0.5 * (mesh.vertex(e[0]) + mesh.vertex(e[1])));
  std::vector<Cell> cells;
  cells.reserve(4 * mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Cell& t = mesh.cell(c);
    const auto& e = mesh.cell_edges(c);
    const int m01 = nv + e[0], m12 = nv + e[1], m20 = nv + e[2];
    cells.push_back({t[0], m01, m20});
    cells.push_back({m01, t[1], m12});
    cells.push_back({m20, m12, t[2]});
    cells.push_back({m01, m12, m20});
  }
  std::vector<BoundaryEdge> boundary;
  boundary.reserve(2 * mesh.boundary_edges().size());
  for (const BoundaryEdge& be : mesh.boundary_edges()) {
    const int mid = nv + mesh.edge_index(be.vertices[0], be.vertices[1]);
    boundary.push_back({{be.vertices[0], mid}, be.tag});
    boundary.push_back({{mid, be.vertices[1]}, be.tag});
  }
  return make_mesh(std::move(vertices), std::move(cells), std::move(boundary));
}

}  // namespace meshmotion
