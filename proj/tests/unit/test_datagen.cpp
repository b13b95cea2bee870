#include "doctest.h"
#include "helpers.hpp"

#include "meshmotion/classic/extension.hpp"
#include "meshmotion/datagen/dataset.hpp"
#include "meshmotion/datagen/replay.hpp"
#include "meshmotion/errors.hpp"
#include "meshmotion/mesh/benchmark.hpp"

#include <filesystem>

using namespace meshmotion;

namespace {

const Material kMaterial{0.5e6, 2.0e6};

MeshPtr strip(double length, double height, int nx, int ny) {
  const MeshPtr base = rectangle_mesh(0.0, length, 0.0, height, nx, ny);
  std::vector<BoundaryEdge> boundary = base->boundary_edges();
  for (BoundaryEdge& e : boundary) {
    const Vec2 m = 0.5 * (base->vertex(e.vertices[0]) + base->vertex(e.vertices[1]));
    if (m.x() == 0.0) e.tag = "clamped";
    else if (m.x() == length) e.tag = "tip";
    else if (m.y() == height) e.tag = "top";
    else e.tag = "bottom";
  }
  return make_mesh(base->vertices(), base->cells(), std::move(boundary));
}

MeshPtr coarse_fluid() {
  static const MeshPtr mesh = [] {
    BenchmarkMeshOptions o;
    o.coarsening = 2.0;
    return benchmark_mesh(o);
  }();
  return mesh;
}

MeshPtr coarse_solid() {
  static const MeshPtr mesh = [] {
    BenchmarkMeshOptions o;
    o.coarsening = 2.0;
    return flap_solid_mesh(o);
  }();
  return mesh;
}

SnapshotSet zero_set(int n) {
  SnapshotSet set;
  set.mesh = testing::tagged_square(2);
  for (int k = 0; k < n; ++k) set.snapshots.emplace_back(BoundaryDisplacement::zero(set.mesh));
  return set;
}

}  // namespace

TEST_CASE("neo-Hookean energy and residual") {
  const MeshPtr two = strip(1.0, 0.5, 1, 1);
  REQUIRE(two->num_cells() == 2);
  const NeoHookeanProblem problem(two, kMaterial);
  const int n = problem.num_dofs();
  CounterRng rng(7);
  Eigen::VectorXd u(n), f(n);
  for (int i = 0; i < n; ++i) {
    u[i] = rng.uniform(-0.02, 0.02);
    f[i] = rng.uniform(-1e3, 1e3);
  }
  Eigen::VectorXd r;
  fem::SparseMatrix k;
  problem.residual(u, f, r, &k);
  const double h = 1e-7;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd up = u, um = u;
    up[i] += h;
    um[i] -= h;
    const double fd = (problem.energy(up, f) - problem.energy(um, f)) / (2 * h);
    CHECK(std::abs(fd - r[i]) <= 1e-5 * std::max(1.0, std::abs(r[i])));
  }
  // tangent against residual differences
  Eigen::VectorXd du(n), rp, rm;
  for (int i = 0; i < n; ++i) du[i] = rng.uniform(-1, 1);
  problem.residual(u + 1e-6 * du, f, rp, nullptr);
  problem.residual(u - 1e-6 * du, f, rm, nullptr);
  const Eigen::VectorXd fd = (rp - rm) / 2e-6;
  CHECK((fd - k * du).norm() <= 1e-6 * fd.norm());
  CHECK((Eigen::MatrixXd(k) - Eigen::MatrixXd(k).transpose()).norm() <= 1e-9 * Eigen::MatrixXd(k).norm());

  // zero displacement carries no stress
  problem.residual(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), r, nullptr);
  CHECK(r.norm() <= 1e-9);
  CHECK(problem.energy(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)) == 0.0);

  // inverted states are rejected
  Eigen::VectorXd flip = Eigen::VectorXd::Zero(n);
  for (int v = 0; v < two->num_nodes(Space::P2); ++v) flip[2 * v] = -2.0 * two->node_position(v).x();
  CHECK(std::isinf(problem.energy(flip, f)));
}

TEST_CASE("traction load vector") {
  const MeshPtr s = strip(0.35, 0.02, 13, 2);
  const NeoHookeanProblem problem(s, kMaterial);
  const LoadConfig load{1.5e3, -0.8e3, 0.3, 0.17, 0.031};
  for (double theta : {0.0, 0.7, 2.0}) {
    const Eigen::VectorXd f = problem.external_load(load, theta);
    double fx = 0.0, fy = 0.0;
    for (Eigen::Index i = 0; i < f.size(); i += 2) {
      fx += f[i];
      fy += f[i + 1];
    }
    const double expected = 0.02 * load.F_tip * std::cos(theta) + 2 * (2 * load.d) * load.F_side * std::cos(theta - load.phi);
    CHECK(fx == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fy == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK_THROWS_AS(problem.external_load({1.0, 1.0, 0.0, 0.9, 0.01}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(LoadConfig({1.0, 1.0, 0.0, 0.2, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(NeoHookeanProblem(s, Material{0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("neo-Hookean solve on the flap") {
  const MeshPtr solid = coarse_solid();
  const NeoHookeanProblem problem(solid, kMaterial);
  const LoadConfig config1{1.925e3, -1.7e3, 0.0, 0.4, 0.02};

  const NeoHookeanResult rest = neo_hookean_solve(problem, config1, M_PI / 2);
  CHECK(rest.displacement.coefficients().lpNorm<Eigen::Infinity>() <= 1e-12);

  const NeoHookeanResult r = neo_hookean_solve(problem, config1, 0.0);
  CHECK(r.residual_norm <= 1e-8);
  Eigen::VectorXd res;
  problem.residual(r.displacement.coefficients(), problem.external_load(config1, 0.0), res, nullptr);
  for (int d : problem.clamped_dofs()) {
    CHECK(r.displacement.coefficients()[d] == 0.0);
    res[d] = 0.0;
  }
  CHECK(res.norm() <= 1e-8);
  const double tip = r.displacement.coefficients().lpNorm<Eigen::Infinity>();
  CHECK(tip > 0.01);
  CHECK(tip < 0.2);

  // reversed load mirrors the response to first order only; check sign
  const NeoHookeanResult back = neo_hookean_solve(problem, config1, M_PI);
  double sum_fwd = 0.0, sum_back = 0.0;
  for (int v = 0; v < solid->num_nodes(Space::P2); ++v) {
    sum_fwd += r.displacement.vector(v).y();
    sum_back += back.displacement.vector(v).y();
  }
  CHECK(sum_fwd * sum_back < 0.0);

  NeoHookeanOptions strict;
  strict.newton.max_iterations = 1;
  strict.ramps = {1, 2};
  try {
    neo_hookean_solve(problem, config1, 0.0, strict);
    FAIL("expected non-convergence");
  } catch (const NonConvergenceError& e) {
    CHECK(std::string(e.what()).find("F_tip=1925") != std::string::npos);
  }
}

TEST_CASE("solid trace on the fluid boundary") {
  const MeshPtr fluid = coarse_fluid(), solid = coarse_solid();
  auto f = [](const Vec2& p) { return Vec2(0.1 * p.y() * p.x(), std::sin(p.x())); };
  const Field us = interpolate_vector(solid, Space::P2, f);
  for (Space space : {Space::P1, Space::P2}) {
    const BoundaryDisplacement g = solid_trace_to_fluid(us, fluid, space);
    std::vector<int> moving = fluid->tagged_nodes(space, "moving");
    std::sort(moving.begin(), moving.end());
    for (std::size_t k = 0; k < g.nodes().size(); ++k) {
      const int node = g.nodes()[k];
      const bool on = std::binary_search(moving.begin(), moving.end(), node);
      const Vec2 expected = on ? f(fluid->node_position(node)) : Vec2::Zero();
      CHECK((g.at_index(k) - expected).norm() <= 1e-14);
    }
  }
  CHECK_THROWS_AS(solid_trace_to_fluid(interpolate_vector(testing::tagged_square(3), Space::P2, f), fluid),
                  std::invalid_argument);
}

TEST_CASE("dataset splits") {
  const SnapshotSet seq = split_dataset(zero_set(2400), SplitMode::Sequential, default_fractions(SplitMode::Sequential));
  CHECK(seq.split.train.size() == 1800);
  CHECK(seq.split.validation.size() == 200);
  CHECK(seq.split.test.size() == 400);
  CHECK(seq.split.train.front() == 0);
  CHECK(seq.split.train.back() == 1799);
  CHECK(seq.split.validation.front() == 1800);
  CHECK(seq.split.test.back() == 2399);

  const SnapshotSet a = split_dataset(zero_set(606), SplitMode::Random, {0.85, 0.15}, 11);
  const SnapshotSet b = split_dataset(zero_set(606), SplitMode::Random, {0.85, 0.15}, 11);
  const SnapshotSet c = split_dataset(zero_set(606), SplitMode::Random, {0.85, 0.15}, 12);
  CHECK(a.split.train.size() == 515);
  CHECK(a.split.validation.size() == 91);
  CHECK(a.split.test.empty());
  CHECK(a.split.train == b.split.train);
  CHECK(a.split.train != c.split.train);
  CHECK(a.split_mode == SplitMode::Random);

  CHECK_THROWS_AS(split_dataset(zero_set(3), SplitMode::Random, {0.1, 0.9}), std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(zero_set(10), SplitMode::Random, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(zero_set(10), SplitMode::Sequential, {1.0}), std::invalid_argument);

  SnapshotSet bad = zero_set(4);
  bad.split = {{0, 1}, {1, 3}, {}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK(parse_split_mode(split_mode_name(SplitMode::Sequential)) == SplitMode::Sequential);
}

TEST_CASE("artificial dataset") {
  const MeshPtr fluid = coarse_fluid(), solid = coarse_solid();
  ArtificialDatasetOptions opt;
  opt.amplitudes = 5;
  DatasetBuildReport report;
  const std::vector<LoadConfig> configs{{1.925e3, -1.7e3, 0.0, 0.4, 0.02}};
  const SnapshotSet set = build_artificial_dataset(fluid, solid, configs, kMaterial, opt, &report);
  CHECK(report.requested == 5);
  CHECK(report.skipped == 0);
  REQUIRE(set.size() == 5);
  CHECK(set.split.train.size() + set.split.validation.size() == 5);
  CHECK(set.metadata.at("material").at("mu").get<double>() == 0.5e6);
  for (const Snapshot& s : set.snapshots) {
    REQUIRE(s.u_harm);
    REQUIRE(s.u_biharm);
    REQUIRE(s.clement);
    CHECK(trace_error(*s.u_harm, s.g) <= 1e-12);
    CHECK(trace_error(*s.u_biharm, s.g) <= 1e-12);
  }
  // θ = π/2: all loads vanish
  const Snapshot& rest = set.snapshots[1];
  CHECK(rest.info.at("theta").get<double>() == doctest::Approx(M_PI / 2));
  CHECK(rest.g.max_norm() == 0.0);
  CHECK(rest.u_harm->coefficients().lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(rest.u_biharm->coefficients().lpNorm<Eigen::Infinity>() == 0.0);
  // θ = 0 and θ = 2π coincide
  CHECK((set.snapshots[0].g.values() - set.snapshots[4].g.values()).norm() <= 1e-12);
  CHECK(set.snapshots[0].g.max_norm() > 0.01);

  opt.threads = 3;
  const SnapshotSet threaded = build_artificial_dataset(fluid, solid, configs, kMaterial, opt);
  for (int k = 0; k < 5; ++k) CHECK(threaded.snapshots[k].g.values() == set.snapshots[k].g.values());
  CHECK(threaded.split.train == set.split.train);

  // a failing solve is skipped, not fatal
  ArtificialDatasetOptions hard = opt;
  hard.solver.newton.max_iterations = 2;
  hard.solver.ramps = {1};
  DatasetBuildReport skipped;
  const SnapshotSet partial = build_artificial_dataset(fluid, solid, configs, kMaterial, hard, &skipped);
  CHECK(skipped.skipped > 0);
  CHECK(partial.size() == 5 - skipped.skipped);
  CHECK(skipped.messages.size() == static_cast<std::size_t>(skipped.skipped));

  CHECK_THROWS_AS(build_artificial_dataset(fluid, solid, {}, kMaterial, opt), std::invalid_argument);
}

TEST_CASE("snapshot set round trip") {
  const MeshPtr mesh = testing::tagged_square(4);
  SnapshotSet set = synthetic_flap_family(mesh, {0.0, 0.013, 0.1 / 3.0});
  extend_snapshots(set);
  set = split_dataset(std::move(set), SplitMode::Sequential, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "meshmotion_roundtrip";
  std::filesystem::remove_all(dir);
  save_snapshot_set(dir, set);
  const SnapshotSet back = load_snapshot_set(dir);
  REQUIRE(back.size() == set.size());
  CHECK(back.split_mode == SplitMode::Sequential);
  CHECK(back.split.train == set.split.train);
  CHECK(back.split.test == set.split.test);
  CHECK(back.metadata == set.metadata);
  CHECK(back.mesh->vertices() == set.mesh->vertices());
  for (int k = 0; k < set.size(); ++k) {
    const Snapshot &s = set.snapshots[k], &t = back.snapshots[k];
    CHECK(t.g.values() == s.g.values());
    CHECK(t.u_harm->coefficients() == s.u_harm->coefficients());
    CHECK(t.clement->coefficients() == s.clement->coefficients());
    CHECK(t.u_biharm->coefficients() == s.u_biharm->coefficients());
    CHECK(t.info == s.info);
  }
  const SnapshotSet via_manifest = load_snapshot_set(dir / "manifest.json");
  CHECK(via_manifest.size() == set.size());
  std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic flap family") {
  const MeshPtr mesh = coarse_fluid();
  const BoundaryDisplacement g = synthetic_flap_displacement(mesh, 0.1);
  double top = 0.0;
  for (std::size_t k = 0; k < g.nodes().size(); ++k) {
    CHECK(g.at_index(k).x() == 0.0);
    top = std::max(top, g.at_index(k).y());
  }
  CHECK(top == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(synthetic_flap_displacement(mesh, 0.0).max_norm() == 0.0);
}

TEST_CASE("sequence replay") {
  const MeshPtr mesh = coarse_fluid();
  const HarmonicExtender harmonic(mesh);
  const BiharmonicExtender biharmonic(mesh);
  const ExtensionOperator h = [&](const BoundaryDisplacement& g) { return harmonic.extend(g); };
  const ExtensionOperator b = [&](const BoundaryDisplacement& g) { return biharmonic.extend(g); };

  const ReplayResult zero = replay_sequence(synthetic_flap_family(mesh, {0.0, 0.0, 0.0}), h);
  REQUIRE(zero.steps.size() == 3);
  CHECK_FALSE(zero.degenerate_at);
  for (const ReplayStep& s : zero.steps) {
    CHECK(s.min_det == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.min_quality == zero.steps.front().min_quality);
  }

  std::vector<double> amps;
  for (int k = 0; k <= 40; ++k) amps.push_back(0.005 * k);
  const SnapshotSet family = synthetic_flap_family(mesh, amps);
  const ReplayResult rh = replay_sequence(family, h);
  const ReplayResult rb = replay_sequence(family, b);
  REQUIRE(rh.degenerate_at);
  for (std::size_t k = 1; k < rh.steps.size(); ++k) CHECK(rh.steps[k].min_det < rh.steps[k - 1].min_det);
  CHECK(rh.steps.size() == static_cast<std::size_t>(*rh.degenerate_at) + 1);
  CHECK(rh.steps.back().min_det <= 0.0);
  // harmonic folds no later than biharmonic
  CHECK(*rh.degenerate_at <= rb.degenerate_at.value_or(rb.total));
  const int last_ok = *rh.degenerate_at - 1;
  REQUIRE(last_ok >= 0);
  CHECK(rb.steps[last_ok].min_quality >= rh.steps[last_ok].min_quality);

  const std::string csv = replay_csv(rh);
  CHECK(csv.rfind("step,min_quality,min_det\n", 0) == 0);
  CHECK(csv.find("# degenerate_at," + std::to_string(*rh.degenerate_at) + "\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rh.steps.size()) + 2);

  const ReplayResult failing = replay_sequence(family, [](const BoundaryDisplacement&) -> Field {
    throw NonConvergenceError("no", 1.0);
  });
  CHECK(failing.steps.empty());
  CHECK(failing.degenerate_at == 0);
}
