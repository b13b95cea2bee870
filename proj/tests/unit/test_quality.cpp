#include "doctest.h"

#include "meshmotion/mesh/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace meshmotion;

namespace {

// Signed area by the shoelace formula, independent of the library.
double shoelace(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

// P2 field equal to a piecewise-linear hat displacement: vertex 4 (the centre
// of a 3x3 grid) moves by `shift`, every other vertex stays, midpoints are
// edge averages so the gradient is constant per cell.
Field centre_push(const MeshPtr& mesh, const Vec2& shift) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * mesh->num_nodes(Space::P2));
  c.segment<2>(2 * 4) = shift;
  for (int e = 0; e < mesh->num_edges(); ++e) {
    const Edge& ed = mesh->edges()[e];
    const int node = mesh->num_vertices() + e;
    c.segment<2>(2 * node) = 0.5 * (c.segment<2>(2 * ed[0]) + c.segment<2>(2 * ed[1]));
  }
  return Field(mesh, Space::P2, 2, c);
}

}  // namespace

TEST_CASE("triangle quality values") {
  const Vec2 a(0, 0), b(1, 0), c(0.5, std::sqrt(3.0) / 2);
  CHECK(triangle_quality(a, b, c) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(triangle_quality(a, b, Vec2(0, 1)) == doctest::Approx(2.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(triangle_quality(a, b, Vec2(2, 0)) == 0.0);
  CHECK(triangle_quality(a, a, b) == 0.0);
}

TEST_CASE("scaled jacobian report") {
  auto mesh = make_mesh({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}, {{0, 1, 2}},
                        {{{0, 1}, "fixed"}, {{1, 2}, "fixed"}, {{2, 0}, "fixed"}});
  const QualityReport r = scaled_jacobian(*mesh, Field::zeros(mesh, Space::P2, 2));
  CHECK(r.cell_quality[0] == doctest::Approx(1.0));
  CHECK(r.min_det == 1.0);
  CHECK(std::accumulate(r.histogram.begin(), r.histogram.end(), 0) == 1);
  CHECK(r.histogram.back() == 1);

  // collinear deformed cell
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c[5] = -std::sqrt(3.0) / 2;
  CHECK(scaled_jacobian(*mesh, Field(mesh, Space::P1, 2, c)).cell_quality[0] == 0.0);
}

TEST_CASE("rigid motion invariance") {
  auto mesh = unit_square_mesh(4);
  const Field u = interpolate_vector(mesh, Space::P2, [](const Vec2& x) { return Vec2(0.05 * x.y() * x.y(), 0.1 * x.x()); });
  const QualityReport base = scaled_jacobian(*mesh, u);
  const double th = 0.7;
  Eigen::Matrix2d R;
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const Vec2 t(0.3, -2.0);
  // u' = R(x + u) + t - x
  Eigen::VectorXd c = u.coefficients();
  for (int n = 0; n < mesh->num_nodes(Space::P2); ++n) {
    const Vec2 x = mesh->node_position(n);
    c.segment<2>(2 * n) = R * (x + u.vector(n)) + t - x;
  }
  const QualityReport moved = scaled_jacobian(*mesh, u.with_coefficients(c));
  for (int k = 0; k < mesh->num_cells(); ++k) {
    CHECK(std::abs(moved.cell_quality[k] - base.cell_quality[k]) <= 1e-12);
  }
}

TEST_CASE("min det gradient") {
  auto mesh = unit_square_mesh(3);
  CHECK(min_det_gradient(*mesh, Field::zeros(mesh, Space::P2, 2)) == 1.0);
  CHECK(min_det_gradient(*mesh, interpolate_vector(mesh, Space::P2, [](const Vec2&) { return Vec2(0.3, -1); })) == doctest::Approx(1.0).epsilon(1e-14));
  Eigen::Matrix2d A;
  A << 0.2, 0.5, -0.3, 0.1;
  const Field affine = interpolate_vector(mesh, Space::P2, [&](const Vec2& x) { return Vec2((A - Eigen::Matrix2d::Identity()) * x + Vec2(1, 2)); });
  CHECK(min_det_gradient(*mesh, affine) == doctest::Approx(A.determinant()).epsilon(1e-13));
}

TEST_CASE("fold detection and sign flip") {
  auto mesh = unit_square_mesh(2);
  REQUIRE(mesh->vertex(4) == Vec2(0.5, 0.5));
  const Field u = centre_push(mesh, Vec2(0.7, 0.0));
  // oracle: cells whose moved vertices have negative shoelace area
  std::vector<int> expected;
  for (int t = 0; t < mesh->num_cells(); ++t) {
    const Cell& c = mesh->cell(t);
    auto p = [&](int v) { return Vec2(mesh->vertex(v) + u.vector(v)); };
    if (shoelace(p(c[0]), p(c[1]), p(c[2])) < 0) expected.push_back(t);
  }
  REQUIRE(!expected.empty());
  REQUIRE(static_cast<int>(expected.size()) < mesh->num_cells());

  CHECK(min_det_gradient(*mesh, u) < 0.0);
  const QualityReport plain = scaled_jacobian(*mesh, u);
  const QualityReport flagged = sign_degenerate(plain, *mesh, u);
  std::vector<int> negative;
  for (int t = 0; t < mesh->num_cells(); ++t) {
    if (flagged.cell_quality[t] < 0) negative.push_back(t);
    CHECK(std::abs(flagged.cell_quality[t]) == std::abs(plain.cell_quality[t]));
  }
  CHECK(negative == expected);
  CHECK(std::accumulate(flagged.histogram.begin(), flagged.histogram.end(), 0) == mesh->num_cells());
  CHECK(flagged.min_quality == *std::min_element(flagged.cell_quality.begin(), flagged.cell_quality.end()));
}

TEST_CASE("all-positive and reflected meshes") {
  auto mesh = unit_square_mesh(3);
  const Field small = interpolate_vector(mesh, Space::P2, [](const Vec2& x) { return Vec2(0.01 * x.y(), 0.0); });
  const QualityReport r = scaled_jacobian(*mesh, small);
  CHECK(sign_degenerate(r, *mesh, small).cell_quality == r.cell_quality);

  const Field reflect = interpolate_vector(mesh, Space::P2, [](const Vec2& x) { return Vec2(-2 * x.x(), 0.0); });
  const QualityReport f = quality_report(*mesh, reflect);
  for (double q : f.cell_quality) CHECK(q < 0.0);
}
