#include "doctest.h"

#include "meshmotion/mesh/benchmark.hpp"
#include "meshmotion/mesh/delaunay.hpp"
#include "meshmotion/rng.hpp"

#include <cmath>
#include <map>

using namespace meshmotion;

namespace {

// Brute-force in-circle predicate.
bool strictly_inside_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
  Eigen::Matrix3d m;
  m << a.x() - p.x(), a.y() - p.y(), (a - p).squaredNorm(), b.x() - p.x(), b.y() - p.y(),
      (b - p).squaredNorm(), c.x() - p.x(), c.y() - p.y(), (c - p).squaredNorm();
  return m.determinant() > 1e-12;
}

}  // namespace

TEST_CASE("delaunay triangulation of random points") {
  CounterRng rng(7);
  std::vector<Vec2> pts;
  for (int i = 0; i < 200; ++i) pts.emplace_back(rng.uniform(), rng.uniform());
  const auto cells = delaunay_triangulate(pts);
  double area = 0.0;
  for (const Cell& c : cells) {
    const Vec2 e1 = pts[c[1]] - pts[c[0]], e2 = pts[c[2]] - pts[c[0]];
    const double a = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
    CHECK(a > 0.0);
    area += a;
    for (std::size_t p = 0; p < pts.size(); ++p) {
      if (static_cast<int>(p) == c[0] || static_cast<int>(p) == c[1] || static_cast<int>(p) == c[2]) continue;
      CHECK_FALSE(strictly_inside_circumcircle(pts[c[0]], pts[c[1]], pts[c[2]], pts[p]));
    }
  }
  // Euler: a triangulation of n points with h hull points has 2n - h - 2 cells
  CHECK(cells.size() <= 2 * pts.size() - 5);
  CHECK(area > 0.9);
}

TEST_CASE("delaunay of a regular grid covers the square") {
  std::vector<Vec2> pts;
  for (int j = 0; j <= 4; ++j)
    for (int i = 0; i <= 4; ++i) pts.emplace_back(i * 0.25, j * 0.25);
  const auto cells = delaunay_triangulate(pts);
  CHECK(cells.size() == 32);
}

TEST_CASE("benchmark mesh") {
  const MeshPtr m0 = benchmark_mesh(0);
  CHECK(m0->num_vertices() >= 0.75 * 3935);
  CHECK(m0->num_vertices() <= 1.25 * 3935);
  CHECK(m0->has_tag("moving"));
  CHECK(m0->has_tag("fixed"));
  for (int c = 0; c < m0->num_cells(); ++c) CHECK(m0->signed_area(c) > 0.0);

  const double area = 2.5 * 0.41 - 0.35 * 0.02;  // channel minus flap, roughly
  CHECK(m0->total_area() < area);
  CHECK(m0->total_area() > area - M_PI * 0.05 * 0.05 - 1e-3);

  // moving boundary is the flap: top, tip and bottom
  for (int v : m0->tagged_vertices("moving")) {
    const Vec2 p = m0->vertex(v);
    CHECK(p.x() >= benchmark_geometry::flap_start() - 1e-12);
    CHECK(p.x() <= 0.6 + 1e-12);
    CHECK(p.y() >= 0.19 - 1e-12);
    CHECK(p.y() <= 0.21 + 1e-12);
  }
  // Gabriel boundary: the angle opposite every boundary edge is at most 90 degrees
  for (int c = 0; c < m0->num_cells(); ++c) {
    const auto& edges = m0->cell_edges(c);
    const Cell& t = m0->cell(c);
    for (int k = 0; k < 3; ++k) {
      if (!m0->is_boundary_edge(edges[k])) continue;
      const Vec2 a = m0->vertex(t[k]), b = m0->vertex(t[(k + 1) % 3]), o = m0->vertex(t[(k + 2) % 3]);
      CHECK((a - o).dot(b - o) >= -1e-12);
    }
  }

  BenchmarkMeshOptions o1;
  o1.refinement = 1;
  const MeshPtr m1 = benchmark_mesh(o1);
  CHECK(m1->num_vertices() > m0->num_vertices());

  SUBCASE("deterministic") {
    const MeshPtr again = benchmark_mesh(0);
    CHECK(again->vertices() == m0->vertices());
    CHECK(again->cells() == m0->cells());
  }
}

TEST_CASE("coarse benchmark mesh and matching solid") {
  BenchmarkMeshOptions o;
  o.coarsening = 2.0;
  const MeshPtr fluid = benchmark_mesh(o);
  CHECK(fluid->num_vertices() <= 1500);
  const MeshPtr solid = flap_solid_mesh(o);
  for (const char* tag : {"clamped", "tip", "top", "bottom"}) CHECK(solid->has_tag(tag));
  // every fluid P2 node on the moving boundary coincides with a solid boundary node
  std::map<std::pair<double, double>, int> solid_nodes;
  for (int n : solid->boundary_nodes(Space::P2)) {
    const Vec2 p = solid->node_position(n);
    solid_nodes[{p.x(), p.y()}] = n;
  }
  const auto moving = fluid->tagged_nodes(Space::P2, "moving");
  CHECK(!moving.empty());
  for (int n : moving) {
    const Vec2 p = fluid->node_position(n);
    CHECK(solid_nodes.count({p.x(), p.y()}) == 1);
  }
}
