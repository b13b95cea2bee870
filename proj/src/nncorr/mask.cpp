#include "meshmotion/nncorr/mask.hpp"

#include "meshmotion/errors.hpp"
#include "meshmotion/fem/sparse.hpp"

#include <cmath>

namespace meshmotion {

MaskRhs parse_mask_rhs(const std::string& name) {
  if (name == "one" || name == "constant-one") return MaskRhs::ConstantOne;
  if (name == "hand-tuned") return MaskRhs::HandTuned;
  throw std::invalid_argument("unknown mask rhs: " + name);
}

std::string mask_rhs_name(MaskRhs rhs) {
  switch (rhs) {
    case MaskRhs::ConstantOne: return "constant-one";
    case MaskRhs::HandTuned: return "hand-tuned";
    case MaskRhs::Custom: return "custom";
  }
  return "?";
}

double hand_tuned_rhs(double x, double) { return 2.0 * (x + 1.0) * (1.0 - x) * std::exp(-3.5 * std::pow(x, 7)) + 0.1; }

Field compute_mask(const MeshPtr& mesh, const MaskConfig& cfg) {
  std::function<double(const Vec2&)> f;
  switch (cfg.rhs) {
    case MaskRhs::ConstantOne: f = [](const Vec2&) { return 1.0; }; break;
    case MaskRhs::HandTuned: f = [](const Vec2& p) { return hand_tuned_rhs(p.x(), p.y()); }; break;
    case MaskRhs::Custom:
      if (!cfg.custom) throw std::invalid_argument("custom mask rhs not set");
      f = cfg.custom;
      break;
  }
  Eigen::VectorXd load = fem::assemble_load(*mesh, Space::P1, f, 4);
  const double integral = load.sum();
  if (!(integral > 0.0)) throw std::invalid_argument("mask rhs must have positive integral");
  load *= mesh->total_area() / integral;

  const std::vector<int> boundary = mesh->boundary_nodes(Space::P1);
  const fem::SparseMatrix k = fem::assemble_laplacian(*mesh, Space::P1, 1).matrix;
  const fem::ConstrainedSolver solver(k, boundary);
  Eigen::VectorXd l = solver.solve(load, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(boundary.size())));
  for (int b : boundary) l[b] = 0.0;
  for (int v = 0; v < mesh->num_vertices(); ++v) {
    if (!mesh->is_boundary_vertex(v) && !(l[v] > 0.0)) throw MaskPositivityError(v, l[v]);
  }
  if (cfg.normalize && l.size() > 0 && l.maxCoeff() > 0.0) l /= l.maxCoeff();
  return Field(mesh, Space::P1, 1, std::move(l));
}

}  // namespace meshmotion
