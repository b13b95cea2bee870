#include "meshmotion/datagen/neo_hookean.hpp"

#include "meshmotion/errors.hpp"
#include "meshmotion/fem/element.hpp"
#include "meshmotion/fem/nonlinear.hpp"
#include "meshmotion/timing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace meshmotion {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// 3-point Gauss-Legendre on [0, 1].
constexpr double kGaussS[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

void edge_basis(double s, double out[3]) {
  out[0] = (1.0 - s) * (1.0 - 2.0 * s);
  out[1] = s * (2.0 * s - 1.0);
  out[2] = 4.0 * s * (1.0 - s);
}

// Adds ∫_{s0}^{s1} t φ ds of one boundary edge into f.
void add_edge_traction(const TriMesh& mesh, const BoundaryEdge& be, const Vec2& t, double s0, double s1,
                       Eigen::VectorXd& f) {
  if (!(s1 > s0)) return;
  const int a = be.vertices[0], b = be.vertices[1];
  const int nodes[3] = {a, b, mesh.num_vertices() + mesh.edge_index(a, b)};
  const double len = (mesh.vertex(b) - mesh.vertex(a)).norm() * (s1 - s0);
  for (int q = 0; q < 3; ++q) {
    double phi[3];
    edge_basis(s0 + (s1 - s0) * kGaussS[q], phi);
    for (int k = 0; k < 3; ++k) f.segment<2>(2 * nodes[k]) += kGaussW[q] * len * phi[k] * t;
  }
}

struct Step {
  int iterations = 0;
  double residual_norm = 0.0;
};

void constrain(const std::vector<char>& fixed, Eigen::VectorXd& r, fem::SparseMatrix* k) {
  for (std::size_t d = 0; d < fixed.size(); ++d)
    if (fixed[d]) r[static_cast<Eigen::Index>(d)] = 0.0;
  if (!k) return;
  for (int row = 0; row < k->outerSize(); ++row)
    for (fem::SparseMatrix::InnerIterator it(*k, row); it; ++it)
      if (fixed[row] || fixed[it.col()]) it.valueRef() = row == it.col() ? 1.0 : 0.0;
  k->prune(0.0);
}

// Newton on the total energy with Armijo backtracking; x is updated in place.
Step minimise(const NeoHookeanProblem& problem, const Eigen::VectorXd& f, const std::vector<char>& fixed,
              Eigen::VectorXd& x, const fem::NewtonConfig& cfg) {
  Eigen::VectorXd r;
  fem::SparseMatrix k;
  problem.residual(x, f, r, &k);
  constrain(fixed, r, &k);
  double norm = r.norm();
  if (!std::isfinite(norm)) throw NonConvergenceError("non-finite initial residual", norm);
  const double target = std::max(cfg.atol, cfg.rtol * norm);
  double e = problem.energy(x, f);
  Step step;
  while (norm > target) {
    if (step.iterations == cfg.max_iterations)
      throw NonConvergenceError("Newton did not converge in " + std::to_string(step.iterations) + " iterations", norm);
    ++step.iterations;
    const Eigen::VectorXd dx = fem::LinearSolver(k, {fem::LinearSolverKind::Direct, cfg.symmetric}).solve(-r);
    const double slope = r.dot(dx);
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd xt, rt;
    for (int b = 0; b <= cfg.max_backtracks; ++b, t *= cfg.backtrack_factor) {
      xt = x + t * dx;
      const double et = problem.energy(xt, f);
      if (!std::isfinite(et)) continue;
      // energy decrease, with round-off slack near the minimiser
      const bool armijo = slope < 0.0 && et <= e + 1e-4 * t * slope + 1e-12 * std::abs(e);
      problem.residual(xt, f, rt, nullptr);
      constrain(fixed, rt, nullptr);
      if (armijo || rt.norm() < norm) {
        e = et;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NonConvergenceError("Newton linesearch stagnated", norm);
    x = std::move(xt);
    problem.residual(x, f, r, &k);
    constrain(fixed, r, &k);
    norm = r.norm();
  }
  step.residual_norm = norm;
  return step;
}

}  // namespace

void Material::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("material: mu must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("material: lambda must be positive");
}

void LoadConfig::validate() const {
  if (!std::isfinite(F_tip) || !std::isfinite(F_side) || !std::isfinite(phi) || !std::isfinite(c))
    throw std::invalid_argument("load config: non-finite entry");
  if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("load config: half-width d must be positive");
}

std::string LoadConfig::describe() const {
  std::ostringstream s;
  s << "F_tip=" << F_tip << " F_side=" << F_side << " phi=" << phi << " c=" << c << " d=" << d;
  return s.str();
}

Json load_config_to_json(const LoadConfig& load) {
  return Json{{"F_tip", load.F_tip}, {"F_side", load.F_side}, {"phi", load.phi}, {"c", load.c}, {"d", load.d}};
}

LoadConfig load_config_from_json(const Json& j) {
  LoadConfig l;
  l.F_tip = j.at("F_tip").get<double>();
  l.F_side = j.at("F_side").get<double>();
  l.phi = j.value("phi", 0.0);
  l.c = j.at("c").get<double>();
  l.d = j.at("d").get<double>();
  l.validate();
  return l;
}

Json material_to_json(const Material& material) { return Json{{"mu", material.mu}, {"lambda", material.lambda}}; }

Material material_from_json(const Json& j) {
  Material m{j.at("mu").get<double>(), j.at("lambda").get<double>()};
  m.validate();
  return m;
}

std::vector<LoadConfig> load_configs_from_json(const Json& j) {
  const Json& list = j.is_array() ? j : j.at("configs");
  std::vector<LoadConfig> out;
  for (const Json& c : list) out.push_back(load_config_from_json(c));
  return out;
}

NeoHookeanProblem::NeoHookeanProblem(MeshPtr solid, Material material)
    : mesh_(std::move(solid)), material_(material) {
  material_.validate();
  if (!mesh_->has_tag("clamped")) throw std::invalid_argument("solid mesh needs a \"clamped\" boundary");
  clamped_ = fem::vector_dofs(mesh_->tagged_nodes(Space::P2, "clamped"), 2);
  std::sort(clamped_.begin(), clamped_.end());
  clamped_.erase(std::unique(clamped_.begin(), clamped_.end()), clamped_.end());
}

Eigen::VectorXd NeoHookeanProblem::external_load(const LoadConfig& load, double theta) const {
  load.validate();
  const TriMesh& m = *mesh_;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  for (const Vec2& p : m.vertices()) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
  }
  if (load.c < xmin || load.c > xmax)
    throw std::invalid_argument("load config: c lies outside the solid (" + load.describe() + ")");
  const Vec2 tip(0.0, load.F_tip * std::cos(theta));
  const Vec2 side(0.0, load.F_side * std::cos(theta - load.phi));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(num_dofs());
  for (const BoundaryEdge& be : m.boundary_edges()) {
    if (be.tag == "tip") {
      add_edge_traction(m, be, tip, 0.0, 1.0, f);
    } else if (be.tag == "top" || be.tag == "bottom") {
      const double xa = m.vertex(be.vertices[0]).x(), xb = m.vertex(be.vertices[1]).x();
      if (xa == xb) continue;
      // parameter interval where |x - c| < d
      double s0 = (load.c - load.d - xa) / (xb - xa), s1 = (load.c + load.d - xa) / (xb - xa);
      if (s0 > s1) std::swap(s0, s1);
      add_edge_traction(m, be, side, std::max(0.0, s0), std::min(1.0, s1), f);
    }
  }
  return f;
}

double NeoHookeanProblem::energy(const Eigen::VectorXd& u, const Eigen::VectorXd& load) const {
  const TriMesh& m = *mesh_;
  const double mu = material_.mu, lambda = material_.lambda;
  double e = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) {
    const fem::CellGeometry geo = fem::CellGeometry::of(m, c);
    const auto nodes = m.cell_p2_nodes(c);
    for (const fem::QuadraturePoint& q : fem::quadrature(4)) {
      const fem::BasisAt basis(Space::P2, geo, q.xi, q.eta);
      const Eigen::Matrix2d F = Eigen::Matrix2d::Identity() + fem::vector_gradient(basis, u, nodes);
      const double J = F.determinant();
      if (!(J > 0.0)) return std::numeric_limits<double>::infinity();
      const double lj = std::log(J);
      e += q.weight * geo.area * (0.5 * mu * (F.squaredNorm() - 2.0) - mu * lj + 0.5 * lambda * lj * lj);
    }
  }
  return e - load.dot(u);
}

void NeoHookeanProblem::residual(const Eigen::VectorXd& u, const Eigen::VectorXd& load, Eigen::VectorXd& r,
                                 fem::SparseMatrix* tangent) const {
  PhaseScope phase(Phase::Assembly);
  const TriMesh& m = *mesh_;
  const double mu = material_.mu, lambda = material_.lambda;
  r = -load;
  fem::Triplets trip;
  if (tangent) trip.reserve(static_cast<std::size_t>(m.num_cells()) * 144);
  Eigen::Matrix<double, 12, 1> rl;
  Eigen::Matrix<double, 12, 12> kl;
  for (int c = 0; c < m.num_cells(); ++c) {
    const fem::CellGeometry geo = fem::CellGeometry::of(m, c);
    const auto nodes = m.cell_p2_nodes(c);
    rl.setZero();
    kl.setZero();
    for (const fem::QuadraturePoint& q : fem::quadrature(4)) {
      const fem::BasisAt basis(Space::P2, geo, q.xi, q.eta);
      const Eigen::Matrix2d F = Eigen::Matrix2d::Identity() + fem::vector_gradient(basis, u, nodes);
      const double J = F.determinant();
      if (!(J > 0.0)) {
        r.setConstant(kNaN);
        return;
      }
      const double lj = std::log(J);
      const Eigen::Matrix2d Finv = F.inverse();
      const Eigen::Matrix2d FinvT = Finv.transpose();
      const Eigen::Matrix2d P = mu * (F - FinvT) + lambda * lj * FinvT;
      const double w = q.weight * geo.area;
      for (int a = 0; a < 6; ++a) rl.segment<2>(2 * a) += w * P * basis.grad[a];
      if (!tangent) continue;
      for (int b = 0; b < 6; ++b) {
        for (int j = 0; j < 2; ++j) {
          Eigen::Matrix2d dF = Eigen::Matrix2d::Zero();
          dF.row(j) = basis.grad[b].transpose();
          const Eigen::Matrix2d dP = mu * dF + (mu - lambda * lj) * FinvT * dF.transpose() * FinvT +
                                     lambda * (Finv * dF).trace() * FinvT;
          for (int a = 0; a < 6; ++a) kl.block<2, 1>(2 * a, 2 * b + j) += w * dP * basis.grad[a];
        }
      }
    }
    for (int a = 0; a < 6; ++a) {
      r.segment<2>(2 * nodes[a]) += rl.segment<2>(2 * a);
      if (!tangent) continue;
      for (int b = 0; b < 6; ++b)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) trip.emplace_back(2 * nodes[a] + i, 2 * nodes[b] + j, kl(2 * a + i, 2 * b + j));
    }
  }
  if (tangent) *tangent = fem::to_matrix(trip, num_dofs(), num_dofs());
}

NeoHookeanResult neo_hookean_solve(const NeoHookeanProblem& problem, const LoadConfig& load, double theta,
                                   const NeoHookeanOptions& options) {
  if (options.ramps.empty()) throw std::invalid_argument("neo-Hookean: no continuation ramps");
  const Eigen::VectorXd full = problem.external_load(load, theta);
  const std::vector<char> fixed = fem::constraint_mask(problem.num_dofs(), problem.clamped_dofs());
  const int n = problem.num_dofs();
  double last = std::numeric_limits<double>::infinity();
  std::string last_error;
  for (int steps : options.ramps) {
    if (steps < 1 || steps > 8) throw std::invalid_argument("neo-Hookean: ramps must use 1 to 8 steps");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    NeoHookeanResult result{Field::zeros(problem.mesh(), Space::P2, 2), 0.0, steps, 0};
    try {
      for (int k = 1; k <= steps; ++k) {
        const Eigen::VectorXd f = (static_cast<double>(k) / steps) * full;
        const Step nr = minimise(problem, f, fixed, x, options.newton);
        result.residual_norm = nr.residual_norm;
        result.newton_iterations += nr.iterations;
      }
      result.displacement = Field(problem.mesh(), Space::P2, 2, std::move(x));
      return result;
    } catch (const NonConvergenceError& e) {
      last = e.last_residual();
      last_error = e.what();
      last_error = last_error.substr(0, last_error.rfind(" (last residual"));
    } catch (const FactorizationError& e) {
      last_error = e.what();
    }
  }
  std::ostringstream s;
  s << "neo-Hookean solve failed for " << load.describe() << " theta=" << theta << ": " << last_error;
  throw NonConvergenceError(s.str(), last);
}

NeoHookeanResult neo_hookean_solve(const MeshPtr& solid, const LoadConfig& load, double theta,
                                   const Material& material, const NeoHookeanOptions& options) {
  return neo_hookean_solve(NeoHookeanProblem(solid, material), load, theta, options);
}

BoundaryDisplacement solid_trace_to_fluid(const Field& solid_displacement, const MeshPtr& fluid, Space space,
                                          const std::string& moving_tag) {
  if (solid_displacement.value_dim() != 2 || solid_displacement.space() == Space::DG0)
    throw std::invalid_argument("solid trace: expected a continuous vector field");
  const TriMesh& solid = *solid_displacement.mesh();
  const std::vector<int> candidates = solid.boundary_nodes(solid_displacement.space());
  const std::vector<int> nodes = fluid->boundary_nodes(space);
  std::vector<int> moving = fluid->tagged_nodes(space, moving_tag);
  std::sort(moving.begin(), moving.end());
  if (moving.empty()) throw std::invalid_argument("solid trace: fluid mesh has no \"" + moving_tag + "\" nodes");
  const double tol = 1e-9;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (!std::binary_search(moving.begin(), moving.end(), nodes[k])) continue;
    const Vec2 p = fluid->node_position(nodes[k]);
    int match = -1;
    for (int s : candidates) {
      if ((solid.node_position(s) - p).norm() < tol) {
        match = s;
        break;
      }
    }
    if (match < 0) throw std::invalid_argument("solid trace: no solid node at a moving fluid node");
    v.segment<2>(2 * static_cast<Eigen::Index>(k)) = solid_displacement.vector(match);
  }
  return BoundaryDisplacement(fluid, space, std::move(v));
}

}  // namespace meshmotion
