#include "doctest.h"

#include "meshmotion/icnn/convex_pwl.hpp"
#include "meshmotion/icnn/counterexample.hpp"
#include "meshmotion/icnn/icnn.hpp"
#include "meshmotion/rng.hpp"

#include <cmath>

using namespace meshmotion;
using namespace meshmotion::icnn;

TEST_CASE("icnn zero and single-unit nets") {
  const IcnnParams z = IcnnParams::zeros();
  CHECK(z.num_parameters() == 45);
  for (double s : {0.0, 0.3, 5.0}) {
    CHECK(icnn_eval(z, s) == 0.0);
    CHECK(icnn_derivative(z, s) == 0.0);
    CHECK(alpha_eval(z, s) == 1.0);
  }
  IcnnParams one = IcnnParams::zeros({1, 1, 1});
  one.weights[0](0, 0) = 1.0;
  one.weights[1](0, 0) = 1.0;
  for (double s : {-3.0, 0.0, 0.7, 4.0}) {
    CHECK(icnn_eval(one, s) == doctest::Approx(std::log1p(std::exp(s))).epsilon(1e-14));
    CHECK(icnn_derivative(one, s) == doctest::Approx(1.0 / (1.0 + std::exp(-s))).epsilon(1e-14));
  }
  // raw weights are squared
  one.weights[0](0, 0) = -2.0;
  CHECK(icnn_eval(one, 0.5) == doctest::Approx(std::log1p(std::exp(2.0))).epsilon(1e-14));
}

TEST_CASE("icnn monotone and derivative matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const IcnnParams p = IcnnParams::random(seed);
    double prev = icnn_eval(p, -5.0);
    for (int i = 1; i <= 1000; ++i) {
      const double s = -5.0 + 15.0 * i / 1000.0;
      const double v = icnn_eval(p, s);
      CHECK(v >= prev);
      prev = v;
      CHECK(icnn_derivative(p, s) >= 0.0);
    }
    for (double s : {0.0, 0.01, 0.5, 2.0, 7.5, 10.0}) {
      const double h = 1e-6;
      const double fd = (icnn_eval(p, s + h) - icnn_eval(p, s - h)) / (2 * h);
      const double d = icnn_derivative(p, s);
      CHECK(std::abs(fd - d) <= 1e-6 * std::max(1.0, std::abs(d)));
      const double dd = (icnn_derivative(p, s + 1e-5) - icnn_derivative(p, s - 1e-5)) / 2e-5;
      CHECK(icnn_evaluate(p, s).d2 == doctest::Approx(dd).epsilon(1e-5));
    }
  }
}

TEST_CASE("alpha bounds and monotonicity") {
  IcnnParams p = IcnnParams::random(11);
  CHECK(std::abs(alpha_eval(p, 0.0) - 1.0) <= 1e-6);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    p = IcnnParams::random(seed, 1.5);
    for (bool second : {false, true}) {
      p.use_second_bump = second;
      double prev = alpha_eval(p, 0.0);
      for (int i = 0; i <= 1000; ++i) {
        const double s = 10.0 * i / 1000.0;
        const double a = alpha_eval(p, s);
        CHECK(a >= 1.0);
        CHECK(alpha_derivative(p, s) >= -1e-12);
        CHECK(a >= prev - 1e-12);
        prev = a;
      }
      for (double s : {0.005, 0.01, 0.2, 3.0}) {
        const double h = 1e-7;
        const double fd = (alpha_eval(p, s + h) - alpha_eval(p, s - h)) / (2 * h);
        CHECK(alpha_derivative(p, s) == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("derivative gradient with respect to parameters") {
  const IcnnParams p = IcnnParams::random(3);
  const Eigen::VectorXd theta = p.flatten();
  for (double s : {0.02, 0.6, 4.0}) {
    Eigen::VectorXd grad;
    const double d = icnn_derivative_gradient(p, s, grad);
    CHECK(d == doctest::Approx(icnn_derivative(p, s)).epsilon(1e-14));
    REQUIRE(grad.size() == theta.size());
    for (int i = 0; i < theta.size(); ++i) {
      IcnnParams a = p, b = p;
      Eigen::VectorXd ta = theta, tb = theta;
      ta[i] += 1e-6;
      tb[i] -= 1e-6;
      a.unflatten(ta);
      b.unflatten(tb);
      const double fd = (icnn_derivative(a, s) - icnn_derivative(b, s)) / 2e-6;
      CHECK(std::abs(grad[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("icnn json roundtrip and validation") {
  IcnnParams p = IcnnParams::random(9);
  p.eta1 = 0.02;
  p.use_second_bump = true;
  const IcnnParams q = icnn_from_json(icnn_to_json(p));
  CHECK(q.flatten() == p.flatten());
  CHECK(q.eta1 == 0.02);
  CHECK(q.use_second_bump);
  Json bad = icnn_to_json(p);
  bad["biases"].back()[0] = 1.0;
  CHECK_THROWS(icnn_from_json(bad));
  IcnnParams e = p;
  e.eta2 = 0.001;
  CHECK_THROWS(e.validate());
}

TEST_CASE("convex piecewise affine representation") {
  const ShallowReluNet abs = represent_convex_pwl({0.0}, {-1.0, 1.0}, 0.0);
  CHECK(abs.w.size() == 2);
  CHECK(abs.c == 0.0);
  const ShallowReluNet relu = represent_convex_pwl({0.0}, {0.0, 1.0}, 0.0);
  CHECK(relu.w.size() == 1);
  for (int i = 0; i <= 100; ++i) {
    const double x = -3.0 + 6.0 * i / 100.0;
    CHECK(abs(x) == doctest::Approx(std::abs(x)).epsilon(1e-15));
    CHECK(relu(x) == doctest::Approx(std::max(x, 0.0)).epsilon(1e-15));
  }
  // slopes (-1, 0.5, 2), breakpoints (0, 1), f(0) = 0.3
  auto f = [](double x) { return x < 0 ? 0.3 - x : x < 1 ? 0.3 + 0.5 * x : 0.8 + 2.0 * (x - 1); };
  const ShallowReluNet net = represent_convex_pwl({0.0, 1.0}, {-1.0, 0.5, 2.0}, 0.3);
  for (int i = 0; i < 1000; ++i) {
    const double x = -4.0 + 8.0 * i / 999.0;
    CHECK(std::abs(net(x) - f(x)) <= 1e-12);
  }
  CHECK(net(0.0) == f(0.0));
  CHECK(net(1.0) == f(1.0));
  // all-negative slopes left of a positive pivot
  const ShallowReluNet g = represent_convex_pwl({-1.0, 0.5, 2.0}, {-3.0, -1.0, 0.25, 1.0}, 2.0);
  auto gf = [](double x) {
    if (x < -1) return 2.0 - 3.0 * (x + 1);
    if (x < 0.5) return 2.0 - (x + 1);
    if (x < 2) return 0.5 + 0.25 * (x - 0.5);
    return 0.875 + (x - 2);
  };
  for (int i = 0; i < 1000; ++i) {
    const double x = -5.0 + 10.0 * i / 999.0;
    CHECK(std::abs(g(x) - gf(x)) <= 1e-12);
  }
  CHECK_THROWS(represent_convex_pwl({0.0}, {1.0, 1.0}, 0.0));
  CHECK_THROWS(represent_convex_pwl({0.0}, {1.0, 2.0}, 0.0));
  CHECK_THROWS(represent_convex_pwl({0.0}, {-2.0, -1.0}, 0.0));
}

TEST_CASE("counterexample target and exact depth-2 form") {
  for (double a : {0.1, 0.5, 1.0}) {
    CHECK(counterexample_target(a, 0.0) == a);
    CHECK(counterexample_target(-a, 0.0) == 0.0);
    CHECK(counterexample_target(a, a) == 2 * a);
  }
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) {
      const double x = -1.0 + 2.0 * i / 99.0, y = -1.0 + 2.0 * j / 99.0;
      CHECK(std::abs(counterexample_depth2_exact(x, y) - std::max(x + std::abs(y), 0.0)) <= 1e-15);
    }
}

TEST_CASE("counterexample fit separates shallow and deep nets") {
  CounterexampleConfig cfg;
  cfg.grid = 40;
  cfg.restarts = 2;
  const CounterexampleReport r = counterexample_fit(cfg);
  CHECK(r.shallow_sup.size() == 2);
  CHECK(r.exact_depth2_sup == 0.0);
  CHECK(r.shallow_best_sup >= 0.05);
  CHECK(r.deep_best_sup < r.shallow_best_sup);
  CHECK(r.profile_alpha.size() == 50);
  CHECK(r.profile_alpha.back() == 1.0);
}
