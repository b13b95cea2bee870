#include "doctest.h"

#include "meshmotion/errors.hpp"
#include "meshmotion/mesh/mesh.hpp"

#include <cmath>

using namespace meshmotion;

namespace {

MeshPtr single_triangle() {
  return make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
                   {{{0, 1}, "fixed"}, {{1, 2}, "moving"}, {{2, 0}, "fixed"}});
}

}  // namespace

TEST_CASE("triangle mesh validation") {
  CHECK_NOTHROW(single_triangle());
  CHECK_THROWS_AS(make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}},
                            {{{0, 1}, "fixed"}, {{1, 2}, "fixed"}, {{2, 0}, "fixed"}}),
                  DegenerateMeshError);
  // untagged boundary edge
  CHECK_THROWS_AS(make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
                            {{{0, 1}, "fixed"}, {{1, 2}, "fixed"}}),
                  std::invalid_argument);
}

TEST_CASE("p2 numbering and field sizes") {
  auto mesh = unit_square_mesh(3);
  CHECK(mesh->num_vertices() == 16);
  CHECK(mesh->num_cells() == 18);
  CHECK(mesh->num_edges() == 16 + 18 - 1);
  CHECK(mesh->num_nodes(Space::P2) == mesh->num_vertices() + mesh->num_edges());
  for (int e = 1; e < mesh->num_edges(); ++e) {
    CHECK(mesh->edges()[e - 1] < mesh->edges()[e]);
  }
  const Field f = Field::zeros(mesh, Space::P2, 2);
  CHECK(f.coefficients().size() == 2 * mesh->num_nodes(Space::P2));
  CHECK_THROWS(Field(mesh, Space::P1, 2, Eigen::VectorXd::Zero(3)));
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(mesh->num_vertices());
  bad[0] = std::nan("");
  CHECK_THROWS(Field(mesh, Space::P1, 1, bad));
  CHECK(mesh->total_area() == doctest::Approx(1.0));
}

TEST_CASE("deform") {
  auto mesh = unit_square_mesh(4);
  SUBCASE("zero displacement") {
    auto moved = deform(mesh, Field::zeros(mesh, Space::P2, 2));
    for (int v = 0; v < mesh->num_vertices(); ++v) CHECK(moved->vertex(v) == mesh->vertex(v));
  }
  SUBCASE("translation") {
    auto u = interpolate_vector(mesh, Space::P1, [](const Vec2&) { return Vec2(0.1, 0.0); });
    auto moved = deform(mesh, u);
    for (int v = 0; v < mesh->num_vertices(); ++v) {
      CHECK(moved->vertex(v).x() == mesh->vertex(v).x() + 0.1);
      CHECK(moved->vertex(v).y() == mesh->vertex(v).y());
    }
    CHECK(moved->tags() == mesh->tags());
  }
  SUBCASE("round trip") {
    auto u = interpolate_vector(mesh, Space::P2, [](const Vec2& x) {
      return Vec2(0.01 * std::sin(3 * x.x()) * x.y(), 0.02 * x.x() * x.x());
    });
    auto moved = deform(mesh, u);
    auto back = deform(moved, rebind(-1.0 * u, moved));
    for (int v = 0; v < mesh->num_vertices(); ++v) {
      CHECK((back->vertex(v) - mesh->vertex(v)).norm() <= 1e-12);
    }
  }
  SUBCASE("fold reports cell") {
    // push the interior vertex of a fan across the boundary of its patch
    auto u = Field::zeros(mesh, Space::P1, 2);
    Eigen::VectorXd c = u.coefficients();
    const int v = 6;  // interior vertex (1,1) of the 5x5 grid
    REQUIRE_FALSE(mesh->is_boundary_vertex(v));
    c[2 * v] = 0.6;
    try {
      deform(mesh, u.with_coefficients(c));
      FAIL("expected DegenerateMeshError");
    } catch (const DegenerateMeshError& e) {
      const auto& cell = mesh->cell(e.cell());
      CHECK((cell[0] == v || cell[1] == v || cell[2] == v));
    }
  }
}

TEST_CASE("uniform refinement") {
  auto mesh = unit_square_mesh(2);
  auto fine = refine_uniform(*mesh);
  CHECK(fine->num_cells() == 4 * mesh->num_cells());
  CHECK(fine->num_vertices() == mesh->num_vertices() + mesh->num_edges());
  CHECK(fine->total_area() == doctest::Approx(1.0));
  CHECK(fine->tagged_edges("fixed").size() == 2 * mesh->tagged_edges("fixed").size());
}
