#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace meshmotion {

using Vec2 = Eigen::Vector2d;
using Cell = std::array<int, 3>;
using Edge = std::array<int, 2>;

struct BoundaryEdge {
  Edge vertices;
  std::string tag;
};

enum class Space { P1, P2, DG0 };

std::string to_string(Space space);
Space space_from_string(std::string_view name);

/// Conforming triangle mesh with tagged boundary.
///
/// Cells are counter-clockwise vertex triples. The constructor validates the
/// mesh (positive areas, boundary edges matching the topological boundary,
/// every boundary edge tagged exactly once) and builds the edge numbering used
/// by P2 fields: edges are sorted by (min vertex, max vertex), and the P2 node
/// of edge e is `num_vertices() + e`.
class TriMesh {
 public:
  TriMesh(std::vector<Vec2> vertices, std::vector<Cell> cells, std::vector<BoundaryEdge> boundary);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  const std::vector<Edge>& edges() const { return edges_; }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const Cell& cell(int c) const { return cells_[c]; }

  // Local edge k joins cell[k] and cell[(k + 1) % 3].
  const std::array<int, 3>& cell_edges(int c) const { return cell_edges_[c]; }
  // P2 local nodes: three vertices, then edge midpoints in cell_edges order.
  std::array<int, 6> cell_p2_nodes(int c) const;

  // Global edge index, or -1 when (a, b) is not an edge.
  int edge_index(int a, int b) const;

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }
  bool is_boundary_edge(int e) const { return boundary_edge_tag_[e] >= 0; }

  const std::vector<std::string>& tags() const { return tag_names_; }
  bool has_tag(const std::string& tag) const;
  // Global edge indices carrying `tag`, ascending.
  std::vector<int> tagged_edges(const std::string& tag) const;
  std::vector<int> tagged_vertices(const std::string& tag) const;

  std::span<const int> vertex_cells(int v) const;

  double signed_area(int c) const;
  double total_area() const;
  Vec2 centroid(int c) const;

  int num_nodes(Space space) const;
  // Position of a P1/P2 node.
  Vec2 node_position(int node) const;
  // Boundary nodes of a continuous space, ascending.
  std::vector<int> boundary_nodes(Space space) const;
  std::vector<int> tagged_nodes(Space space, const std::string& tag) const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<Cell> cells_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> cell_edges_;
  std::vector<int> edge_cell_count_;
  std::vector<int> boundary_edge_tag_;  // per global edge, -1 for interior
  std::vector<bool> boundary_vertex_;
  std::vector<std::string> tag_names_;
  std::vector<int> vertex_cell_offsets_;
  std::vector<int> vertex_cell_list_;
};

using MeshPtr = std::shared_ptr<const TriMesh>;

MeshPtr make_mesh(std::vector<Vec2> vertices, std::vector<Cell> cells,
                  std::vector<BoundaryEdge> boundary);

/// Finite element function over a mesh. Coefficients are node-major: the
/// value of component k at node n is coefficients[n * value_dim + k].
class Field {
 public:
  Field(MeshPtr mesh, Space space, int value_dim, Eigen::VectorXd coefficients);

  static Field zeros(MeshPtr mesh, Space space, int value_dim);

  const MeshPtr& mesh() const { return mesh_; }
  Space space() const { return space_; }
  int value_dim() const { return value_dim_; }
  int num_nodes() const { return mesh_->num_nodes(space_); }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }

  double scalar(int node) const { return coefficients_[node * value_dim_]; }
  Vec2 vector(int node) const {
    return {coefficients_[node * value_dim_], coefficients_[node * value_dim_ + 1]};
  }

  Field with_coefficients(Eigen::VectorXd coefficients) const;

 private:
  MeshPtr mesh_;
  Space space_;
  int value_dim_;
  Eigen::VectorXd coefficients_;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);

// Nodal interpolation (DG0: centroid value).
Field interpolate_vector(const MeshPtr& mesh, Space space, const std::function<Vec2(const Vec2&)>& f);
Field interpolate_scalar(const MeshPtr& mesh, Space space, const std::function<double(const Vec2&)>& f);

// P1 view of a P1/P2 field: its vertex values.
Field vertex_values(const Field& field);

/// New mesh with vertices moved by the vertex values of `displacement`.
/// Throws DegenerateMeshError naming the first cell with non-positive area.
MeshPtr deform(const TriMesh& mesh, const Field& displacement);
MeshPtr deform(const MeshPtr& mesh, const Field& displacement);

/// Same field coefficients attached to another mesh with identical topology.
Field rebind(const Field& field, const MeshPtr& mesh);

// Structured mesh of [x0, x1] x [y0, y1] split along one diagonal family.
// All boundary edges get `tag`.
MeshPtr rectangle_mesh(double x0, double x1, double y0, double y1, int nx, int ny,
                       const std::string& tag = "fixed");
MeshPtr unit_square_mesh(int n);

// Red refinement: every cell split into four; tags inherited.
MeshPtr refine_uniform(const TriMesh& mesh);

}  // namespace meshmotion
