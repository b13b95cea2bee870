#include "doctest.h"
#include "helpers.hpp"

#include "meshmotion/fem/clement.hpp"
#include "meshmotion/errors.hpp"
#include "meshmotion/nncorr/mask.hpp"
#include "meshmotion/nncorr/nncorr.hpp"
#include "meshmotion/nncorr/training.hpp"

#include <numeric>

using namespace meshmotion;

namespace {

BoundaryDisplacement wave(const MeshPtr& mesh, double amp, double phase = 0.0) {
  return BoundaryDisplacement::from_moving(mesh, Space::P2, [=](const Vec2& x) {
    return Vec2(0.2 * amp * std::cos(M_PI * x.x() + phase), amp * std::sin(M_PI * x.x()));
  });
}

MlpParams small_net(std::uint64_t seed, std::vector<int> widths = {8, 6, 5, 2}) {
  MlpParams p = MlpParams::random(seed, widths);
  CounterRng rng(seed, 99);
  for (Eigen::Index j = 0; j < 8; ++j) {
    p.mu[j] = rng.uniform(-0.1, 0.1);
    p.sigma[j] = rng.uniform(0.5, 2.0);
  }
  return p;
}

}  // namespace

TEST_CASE("mask function") {
  CHECK(hand_tuned_rhs(0.0, 0.3) == doctest::Approx(2.1).epsilon(1e-15));
  const MeshPtr mesh = unit_square_mesh(12);
  for (MaskRhs rhs : {MaskRhs::ConstantOne, MaskRhs::HandTuned}) {
    MaskConfig cfg;
    cfg.rhs = rhs;
    const Field l = compute_mask(mesh, cfg);
    double mx = 0.0;
    for (int v = 0; v < mesh->num_vertices(); ++v) {
      if (mesh->is_boundary_vertex(v)) {
        CHECK(l.scalar(v) == 0.0);
      } else {
        CHECK(l.scalar(v) > 0.0);
        CHECK(l.scalar(v) <= 1.0);
      }
      mx = std::max(mx, l.scalar(v));
    }
    CHECK(mx == 1.0);
  }
  // unnormalised f ≡ 1 on the unit square: max ≈ 0.0737 (series solution)
  MaskConfig raw;
  raw.rhs = MaskRhs::ConstantOne;
  raw.normalize = false;
  const MeshPtr fine = unit_square_mesh(32);
  const Field l = compute_mask(fine, raw);
  CHECK(l.coefficients().maxCoeff() == doctest::Approx(0.07367).epsilon(5e-3));

  MaskConfig neg;
  neg.rhs = MaskRhs::Custom;
  neg.custom = [](const Vec2& p) { return p.x() < 0.2 ? 1.0 : -0.2; };
  CHECK_THROWS_AS(compute_mask(mesh, neg), MaskPositivityError);
}

TEST_CASE("mlp forward") {
  const MlpParams zero = MlpParams::zeros();
  CHECK(zero.num_parameters() == 83970);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
  CHECK(mlp_forward(zero, x).isZero(0.0));

  // hand trace: 8 -> 2 -> 2
  MlpParams p = MlpParams::zeros({8, 2, 2});
  p.mu.setConstant(1.0);
  p.sigma.setConstant(2.0);
  p.weights[0].setZero();
  p.weights[0](0, 0) = 1.0;   // h0 = relu(z0 + 0.5)
  p.weights[0](1, 1) = -1.0;  // h1 = relu(-z1 - 0.25)
  p.biases[0] << 0.5, -0.25;
  p.weights[1] << 1.0, 2.0, -1.0, 0.5;
  p.biases[1] << 0.1, 0.0;
  Eigen::VectorXd in = Eigen::VectorXd::Zero(8);
  in[0] = 3.0;   // z0 = 1
  in[1] = -2.0;  // z1 = -1.5
  // h = (1.5, 1.25); out = (1.5 + 2.5 + 0.1, -1.5 + 0.625)
  const Eigen::Vector2d out = mlp_forward(p, in);
  CHECK(out[0] == doctest::Approx(4.1).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(-0.875).epsilon(1e-15));

  // positive homogeneity without biases
  MlpParams h = MlpParams::random(3, {8, 16, 16, 2});
  for (auto& b : h.biases) b.setZero();
  Eigen::MatrixXd z = Eigen::MatrixXd::Random(8, 5);
  CHECK((mlp_forward(h, Eigen::MatrixXd(2.5 * z)) - 2.5 * mlp_forward(h, z)).norm() <= 1e-12);

  // json round trip
  const MlpParams q = mlp_from_json(mlp_to_json(small_net(4)));
  CHECK(q.flatten() == small_net(4).flatten());
  CHECK(q.sigma == small_net(4).sigma);

  CHECK(depth_sweep_widths(2) == std::vector<int>{8, 284, 284, 2});
  for (int d = 2; d <= 6; ++d) {
    const int n = MlpParams::zeros(depth_sweep_widths(d)).num_parameters();
    CHECK(std::abs(n - 83970) <= 0.005 * 83970);
  }
}

TEST_CASE("mlp backward matches finite differences") {
  const MlpParams p = small_net(8);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 7);
  const Eigen::MatrixXd w = Eigen::MatrixXd::Random(2, 7);
  MlpWorkspace ws;
  mlp_forward(p, x, ws);
  MlpParams g;
  mlp_backward(p, ws, w, g);
  const Eigen::VectorXd theta = p.flatten();
  MlpParams gp = p;
  gp.weights = g.weights;
  gp.biases = g.biases;
  const Eigen::VectorXd grad = gp.flatten();
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    MlpParams a = p, b = p;
    Eigen::VectorXd ta = theta, tb = theta;
    ta[k] += 1e-6;
    tb[k] -= 1e-6;
    a.unflatten(ta);
    b.unflatten(tb);
    const double fd = ((mlp_forward(a, x) - mlp_forward(b, x)).cwiseProduct(w).sum()) / 2e-6;
    CHECK(std::abs(fd - grad[k]) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("nncorr extension") {
  const MeshPtr mesh = testing::tagged_square(5);
  const Field mask = compute_mask(mesh);
  const BoundaryDisplacement g = wave(mesh, 0.2);
  const Field harmonic = harmonic_extend(mesh, g);

  CHECK(nncorr_extend(mesh, g, MlpParams::zeros({8, 4, 2}), mask).coefficients() == harmonic.coefficients());

  const MlpParams p = small_net(5);
  const Field u = nncorr_extend(mesh, g, p, mask);
  CHECK(trace_error(u, g) <= 1e-12);
  CHECK((u.coefficients() - harmonic.coefficients()).lpNorm<Eigen::Infinity>() > 1e-6);

  // step-by-step pipeline: per-vertex patch average of cell gradients
  const int nv = mesh->num_vertices();
  Eigen::MatrixXd corr(2, nv);
  for (int v = 0; v < nv; ++v) {
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    double area = 0.0;
    for (int c : mesh->vertex_cells(v)) {
      // cell-mean gradient of the P2 field: average over the degree-2 points
      const auto nodes = mesh->cell_p2_nodes(c);
      const Cell& t = mesh->cell(c);
      Eigen::Matrix2d jac;
      jac.col(0) = mesh->vertex(t[1]) - mesh->vertex(t[0]);
      jac.col(1) = mesh->vertex(t[2]) - mesh->vertex(t[0]);
      const Eigen::Matrix2d it = jac.inverse().transpose();
      Eigen::Matrix2d mean = Eigen::Matrix2d::Zero();
      const double pts[3][2] = {{1.0 / 6, 1.0 / 6}, {2.0 / 3, 1.0 / 6}, {1.0 / 6, 2.0 / 3}};
      for (const auto& q : pts) {
        const double l0 = 1 - q[0] - q[1], l1 = q[0], l2 = q[1];
        const Vec2 g0(-1, -1), g1(1, 0), g2(0, 1);
        const Vec2 ref[6] = {(4 * l0 - 1) * g0, (4 * l1 - 1) * g1, (4 * l2 - 1) * g2,
                             4 * (l0 * g1 + l1 * g0), 4 * (l1 * g2 + l2 * g1), 4 * (l2 * g0 + l0 * g2)};
        for (int a = 0; a < 6; ++a) mean += harmonic.vector(nodes[a]) * (it * ref[a]).transpose() / 3.0;
      }
      const double ar = 0.5 * jac.determinant();
      acc += ar * mean;
      area += ar;
    }
    acc /= area;
    Eigen::VectorXd x(8);
    x << mesh->vertex(v).x(), mesh->vertex(v).y(), harmonic.vector(v).x(), harmonic.vector(v).y(), acc(0, 0),
        acc(0, 1), acc(1, 0), acc(1, 1);
    // hand-written network evaluation
    Eigen::VectorXd h = (x - p.mu).cwiseQuotient(p.sigma);
    for (std::size_t l = 0; l + 1 < p.weights.size(); ++l) h = (p.weights[l] * h + p.biases[l]).cwiseMax(0.0);
    corr.col(v) = mask.scalar(v) * (p.weights.back() * h + p.biases.back());
  }
  for (int v = 0; v < nv; ++v) CHECK((u.vector(v) - harmonic.vector(v) - corr.col(v)).norm() <= 1e-12);
  for (int e = 0; e < mesh->num_edges(); ++e) {
    const Edge& ed = mesh->edges()[e];
    const Vec2 mid = 0.5 * (corr.col(ed[0]) + corr.col(ed[1]));
    CHECK((u.vector(nv + e) - harmonic.vector(nv + e) - mid).norm() <= 1e-12);
  }
}

TEST_CASE("nncorr loss gradient and training") {
  const MeshPtr mesh = testing::tagged_square(4);
  const Field mask = compute_mask(mesh);
  const fem::ClementOperator clement(mesh, Space::P2);
  std::vector<NNCorrSample> samples;
  for (int i = 0; i < 3; ++i) {
    const BoundaryDisplacement g = wave(mesh, 0.1 + 0.05 * i, 0.3 * i);
    const Field h = harmonic_extend(mesh, g);
    const Field b = biharmonic_extend(mesh, g);
    samples.push_back(make_nncorr_sample(h, clement.apply(h), b));
  }
  const std::vector<int> all{0, 1, 2};
  MlpParams p = small_net(6, {8, 10, 10, 2});
  fit_normalisation(p, samples, all);
  MlpParams g;
  nncorr_loss(p, samples, all, mask.coefficients(), &g);
  MlpParams gp = p;
  gp.weights = g.weights;
  gp.biases = g.biases;
  const Eigen::VectorXd grad = gp.flatten(), theta = p.flatten();
  CounterRng rng(17);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index i = static_cast<Eigen::Index>(rng.below(theta.size()));
    MlpParams a = p, b = p;
    Eigen::VectorXd ta = theta, tb = theta;
    ta[i] += 1e-4;
    tb[i] -= 1e-4;
    a.unflatten(ta);
    b.unflatten(tb);
    const double fd = (nncorr_loss(a, samples, all, mask.coefficients()) -
                       nncorr_loss(b, samples, all, mask.coefficients())) / 2e-4;
    CHECK(std::abs(fd - grad[i]) <= 1e-3 * std::max(std::abs(fd), 1e-3 * grad.lpNorm<Eigen::Infinity>()));
  }

  // targets equal to the inputs: the zero network is optimal
  std::vector<NNCorrSample> trivial = samples;
  for (auto& s : trivial) s.target = s.harmonic;
  CHECK(nncorr_loss(MlpParams::zeros({8, 10, 10, 2}), trivial, all, mask.coefficients()) == 0.0);
  NNCorrTrainConfig cfg;
  cfg.epochs = 5;
  const NNCorrTrainResult t0 = train_nncorr(trivial, mask.coefficients(), {0, 1}, {2}, MlpParams::zeros({8, 10, 10, 2}), cfg);
  CHECK(t0.train_loss.back() <= 1e-12);

  cfg.epochs = 60;
  cfg.batch_size = 2;
  const NNCorrTrainResult r = train_nncorr(samples, mask.coefficients(), {0, 1}, {2}, small_net(2, {8, 10, 10, 2}), cfg);
  CHECK(r.train_loss.size() == 60);
  CHECK(r.val_loss.size() == 60);
  CHECK(r.train_loss.back() < r.train_loss.front());
  CHECK(r.train_loss.back() <= 1.05 * *std::min_element(r.train_loss.begin(), r.train_loss.end()));
  // statistics are those of the training split
  MlpParams ref = small_net(2, {8, 10, 10, 2});
  fit_normalisation(ref, samples, {0, 1});
  CHECK(r.params.mu == ref.mu);
  CHECK(r.params.sigma == ref.sigma);
  CHECK_THROWS(train_nncorr(samples, mask.coefficients(), {}, {2}, ref, cfg));
}

TEST_CASE("plateau scheduler") {
  PlateauScheduler s(1e-3, 0.5, 2, 1e-4);
  CHECK(s.step(1.0) == 1e-3);
  CHECK(s.step(1.0) == 1e-3);
  CHECK(s.step(1.0) == 1e-3);
  CHECK(s.step(1.0) == 5e-4);
  CHECK(s.step(0.5) == 5e-4);
}
