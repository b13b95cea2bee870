#include "doctest.h"

#include "meshmotion/errors.hpp"
#include "meshmotion/fem/element.hpp"
#include "meshmotion/fem/sparse.hpp"

#include <Eigen/Dense>

using namespace meshmotion;
using namespace meshmotion::fem;

namespace {

MeshPtr reference_triangle() {
  return make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
                   {{{0, 1}, "fixed"}, {{1, 2}, "fixed"}, {{2, 0}, "fixed"}});
}

}  // namespace

TEST_CASE("quadrature integrates monomials exactly") {
  // ∫_ref x^a y^b = a! b! / (a + b + 2)!
  auto fact = [](int n) { double r = 1; for (int i = 2; i <= n; ++i) r *= i; return r; };
  for (int degree : {1, 2, 4}) {
    for (int a = 0; a <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        double sum = 0;
        for (const auto& q : quadrature(degree)) sum += q.weight * 0.5 * std::pow(q.xi, a) * std::pow(q.eta, b);
        CHECK(sum == doctest::Approx(fact(a) * fact(b) / fact(a + b + 2)).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("reference element stiffness") {
  auto mesh = reference_triangle();
  const Field one = interpolate_scalar(mesh, Space::P1, [](const Vec2&) { return 1.0; });
  const SparseSystem s = assemble_weighted_laplacian(*mesh, Space::P1, one, 1);
  Eigen::Matrix3d expected;
  expected << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
  CHECK((Eigen::MatrixXd(s.matrix) - expected).norm() <= 1e-15);

  const Field three = interpolate_scalar(mesh, Space::DG0, [](const Vec2&) { return 3.0; });
  const SparseSystem s3 = assemble_weighted_laplacian(*mesh, Space::P1, three, 1);
  CHECK((Eigen::MatrixXd(s3.matrix) - 3.0 * expected).norm() <= 1e-14);
}

TEST_CASE("stiffness symmetry, kernel and weight checks") {
  auto mesh = unit_square_mesh(5);
  const Field w = interpolate_scalar(mesh, Space::P1, [](const Vec2& x) { return 1.0 + x.x() * x.y(); });
  for (Space trial : {Space::P1, Space::P2}) {
    const SparseSystem s = assemble_weighted_laplacian(*mesh, trial, w, 2);
    const Eigen::MatrixXd a = s.matrix;
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((a * Eigen::VectorXd::Ones(a.cols())).cwiseAbs().maxCoeff() <= 1e-12);
  }
  Eigen::VectorXd c = w.coefficients();
  c[7] = -1.0;
  CHECK_THROWS_AS(assemble_weighted_laplacian(*mesh, Space::P1, w.with_coefficients(c), 1),
                  InvalidWeightError);
}

TEST_CASE("mass matrix integrates constants") {
  auto mesh = unit_square_mesh(3);
  for (Space s : {Space::P1, Space::P2}) {
    const Eigen::MatrixXd m = assemble_mass(*mesh, s, 1);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(m.cols());
    CHECK(one.dot(m * one) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("linear solves") {
  SUBCASE("identity") {
    SparseMatrix id(3, 3);
    id.setIdentity();
    Eigen::VectorXd b(3);
    b << 1, 2, 3;
    CHECK((LinearSolver(id).solve(b) - b).norm() == 0.0);
  }
  SUBCASE("2x2") {
    SparseSystem s;
    s.matrix = to_matrix({{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}}, 2, 2);
    s.rhs = Eigen::Vector2d(3, 3);
    const Eigen::VectorXd x = solve_linear(s);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("singular") {
    const SparseMatrix m = to_matrix({{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}}, 2, 2);
    CHECK_THROWS_AS(LinearSolver(m).solve(Eigen::Vector2d(1, 0)), FactorizationError);
  }
  SUBCASE("affine dirichlet data") {
    auto mesh = unit_square_mesh(6);
    for (Space space : {Space::P1, Space::P2}) {
      SparseSystem s = assemble_laplacian(*mesh, space, 1);
      auto affine = [](const Vec2& x) { return 0.3 + 2.0 * x.x() - 0.7 * x.y(); };
      for (int n : mesh->boundary_nodes(space)) s.constraints.push_back({n, affine(mesh->node_position(n))});
      const Eigen::VectorXd x = solve_linear(s);
      for (int n = 0; n < mesh->num_nodes(space); ++n) {
        CHECK(std::abs(x[n] - affine(mesh->node_position(n))) <= 1e-12);
      }
      // same answer through the cached constrained solver and CG
      const auto dofs = mesh->boundary_nodes(space);
      Eigen::VectorXd values(dofs.size());
      for (std::size_t k = 0; k < dofs.size(); ++k) values[k] = affine(mesh->node_position(dofs[k]));
      ConstrainedSolver cs(assemble_laplacian(*mesh, space, 1).matrix, dofs);
      CHECK((cs.solve(Eigen::VectorXd::Zero(x.size()), values) - x).norm() <= 1e-12);
      LinearSolverOptions cg;
      cg.kind = LinearSolverKind::ConjugateGradient;
      CHECK((solve_linear(s, cg) - x).norm() <= 1e-9);
    }
  }
}
