#include "doctest.h"

#include "meshmotion/errors.hpp"
#include "meshmotion/fem/clement.hpp"
#include "meshmotion/fem/element.hpp"
#include "meshmotion/fem/newton.hpp"

#include <cmath>

using namespace meshmotion;
using namespace meshmotion::fem;

namespace {

ResidualFn scalar_residual(std::function<double(double)> f, std::function<double(double)> df) {
  return [f, df](const Eigen::VectorXd& x, Eigen::VectorXd& r, SparseMatrix* j) {
    r.resize(1);
    r[0] = f(x[0]);
    if (j) *j = to_matrix({{0, 0, df(x[0])}}, 1, 1);
  };
}

// L2 norm of (recovered - exact) gradient, exact gradient given per point.
double gradient_error(const MeshPtr& mesh, const Field& rec,
                      const std::function<Eigen::Vector4d(const Vec2&)>& exact) {
  double sum = 0.0;
  for (int c = 0; c < mesh->num_cells(); ++c) {
    const CellGeometry geo = CellGeometry::of(*mesh, c);
    const Cell& t = mesh->cell(c);
    for (const auto& q : quadrature(4)) {
      const double l[3] = {1 - q.xi - q.eta, q.xi, q.eta};
      Eigen::Vector4d v = Eigen::Vector4d::Zero();
      for (int a = 0; a < 3; ++a) v += l[a] * rec.coefficients().segment<4>(4 * t[a]);
      sum += q.weight * geo.area * (v - exact(geo.map(q.xi, q.eta))).squaredNorm();
    }
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("newton on scalar problems") {
  SUBCASE("cubic root") {
    auto r = scalar_residual([](double x) { return x * x * x - 8; }, [](double x) { return 3 * x * x; });
    NewtonConfig cfg;
    cfg.atol = 1e-13;
    cfg.rtol = 1e-20;
    const NewtonResult res = newton_solve(r, Eigen::VectorXd::Constant(1, 3.0), cfg);
    CHECK(std::abs(res.solution[0] - 2.0) <= 1e-10);
    // hand trace of x <- x - (x^3 - 8) / (3 x^2) from 3
    double x = 3.0;
    int steps = 0;
    while (std::abs(x * x * x - 8) > 1e-13) {
      x -= (x * x * x - 8) / (3 * x * x);
      ++steps;
    }
    CHECK(res.iterations == steps);
    CHECK(res.solution[0] == doctest::Approx(x).epsilon(1e-15));
  }
  SUBCASE("linear residual") {
    auto r = scalar_residual([](double x) { return 4 * x - 2; }, [](double) { return 4.0; });
    const NewtonResult res = newton_solve(r, Eigen::VectorXd::Constant(1, 10.0));
    CHECK(res.iterations == 1);
    CHECK(res.solution[0] == doctest::Approx(0.5));
  }
  SUBCASE("no root") {
    auto r = scalar_residual([](double x) { return x * x + 1; }, [](double x) { return 2 * x; });
    CHECK_THROWS_AS(newton_solve(r, Eigen::VectorXd::Constant(1, 1.5)), NonConvergenceError);
  }
  SUBCASE("config validation") {
    NewtonConfig cfg;
    cfg.max_iterations = 0;
    CHECK_THROWS(cfg.validate());
  }
}

TEST_CASE("clement gradient") {
  auto mesh = unit_square_mesh(5);
  SUBCASE("affine exact") {
    Eigen::Matrix2d A;
    A << 0.3, -1.2, 2.0, 0.7;
    const Vec2 b(0.1, -0.4);
    for (Space s : {Space::P1, Space::P2}) {
      const Field u = interpolate_vector(mesh, s, [&](const Vec2& x) { return Vec2(A * x + b); });
      const Field g = clement_gradient(u);
      CHECK(g.space() == Space::P1);
      CHECK(g.value_dim() == 4);
      for (int v = 0; v < mesh->num_vertices(); ++v) {
        const Eigen::Vector4d expected(A(0, 0), A(0, 1), A(1, 0), A(1, 1));
        CHECK((g.coefficients().segment<4>(4 * v) - expected).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
  SUBCASE("zero and linearity") {
    const ClementOperator op(mesh, Space::P2);
    CHECK(op.apply(Field::zeros(mesh, Space::P2, 2)).coefficients().isZero(0.0));
    const Field u = interpolate_vector(mesh, Space::P2, [](const Vec2& x) { return Vec2(std::sin(x.x()), x.y() * x.x()); });
    const Field v = interpolate_vector(mesh, Space::P2, [](const Vec2& x) { return Vec2(x.y() * x.y(), std::cos(x.y())); });
    const Eigen::VectorXd lhs = op.apply(2.5 * u + v).coefficients();
    const Eigen::VectorXd rhs = 2.5 * op.apply(u).coefficients() + op.apply(v).coefficients();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-13);
    // repeated application is the same matrix-vector product
    CHECK(op.apply(u).coefficients() == Eigen::VectorXd(op.matrix() * u.coefficients()));
    CHECK(op.apply(u).coefficients() == op.apply(u).coefficients());
  }
  SUBCASE("convergence order") {
    std::vector<double> err;
    MeshPtr m = unit_square_mesh(4);
    for (int level = 0; level < 4; ++level) {
      const Field u = interpolate_vector(m, Space::P2, [](const Vec2& x) { return Vec2(x.x() * x.x(), 0.0); });
      err.push_back(gradient_error(m, clement_gradient(u), [](const Vec2& x) {
        return Eigen::Vector4d(2 * x.x(), 0, 0, 0);
      }));
      m = refine_uniform(*m);
    }
    for (std::size_t k = 1; k < err.size(); ++k) {
      const double order = std::log2(err[k - 1] / err[k]);
      MESSAGE("observed order " << order);
      CHECK(order >= 0.9);
    }
  }
}
