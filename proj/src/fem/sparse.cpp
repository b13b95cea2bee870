#include "meshmotion/fem/sparse.hpp"

#include "meshmotion/errors.hpp"
#include "meshmotion/fem/element.hpp"
#include "meshmotion/timing.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <ostream>

namespace meshmotion::fem {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

int quadrature_degree(Space trial, Space weight) {
  const int w = weight == Space::DG0 ? 0 : 1;
  return trial == Space::P2 ? 4 : std::max(1, 1 + w);
}

template <class WeightAt>
SparseMatrix assemble_stiffness(const TriMesh& mesh, Space trial, int value_dim, int degree,
                                WeightAt&& weight_at) {
  PhaseScope phase(Phase::Assembly);
  const int n = local_size(trial);
  const auto rule = quadrature(degree);
  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_cells()) * n * n * value_dim);
  Eigen::Matrix<double, 6, 6> local;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = CellGeometry::of(mesh, c);
    const auto nodes = local_nodes(mesh, trial, c);
    local.setZero();
    for (const QuadraturePoint& q : rule) {
      const BasisAt basis(trial, geo, q.xi, q.eta);
      const double w = weight_at(c, q) * q.weight * geo.area;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) local(a, b) += w * basis.grad[a].dot(basis.grad[b]);
      }
    }
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int k = 0; k < value_dim; ++k) {
          triplets.emplace_back(nodes[a] * value_dim + k, nodes[b] * value_dim + k, local(a, b));
        }
      }
    }
  }
  const int size = mesh.num_nodes(trial) * value_dim;
  return to_matrix(triplets, size, size);
}

}  // namespace

SparseMatrix to_matrix(const Triplets& triplets, int rows, int cols) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

SparseSystem assemble_weighted_laplacian(const TriMesh& mesh, Space trial, const Field& weight,
                                         int value_dim) {
  if (trial == Space::DG0) throw std::invalid_argument("trial space must be P1 or P2");
  if (weight.value_dim() != 1 || weight.space() == Space::P2) {
    throw std::invalid_argument("weight must be a scalar DG0 or P1 field");
  }
  if (weight.mesh()->num_cells() != mesh.num_cells()) {
    throw std::invalid_argument("weight lives on a different mesh");
  }
  const Eigen::VectorXd& wc = weight.coefficients();
  const Space wspace = weight.space();
  const int degree = quadrature_degree(trial, wspace);
  auto weight_at = [&](int c, const QuadraturePoint& q) {
    double w;
    if (wspace == Space::DG0) {
      w = wc[c];
    } else {
      const Cell& t = mesh.cell(c);
      w = (1.0 - q.xi - q.eta) * wc[t[0]] + q.xi * wc[t[1]] + q.eta * wc[t[2]];
    }
    if (!(w > 0.0)) throw InvalidWeightError(c, w);
    return w;
  };
  SparseSystem system;
  system.matrix = assemble_stiffness(mesh, trial, value_dim, degree, weight_at);
  system.rhs = Eigen::VectorXd::Zero(system.matrix.rows());
  return system;
}

SparseSystem assemble_laplacian(const TriMesh& mesh, Space trial, int value_dim) {
  SparseSystem system;
  system.matrix = assemble_stiffness(mesh, trial, value_dim, trial == Space::P2 ? 2 : 1,
                                     [](int, const QuadraturePoint&) { return 1.0; });
  system.rhs = Eigen::VectorXd::Zero(system.matrix.rows());
  return system;
}

SparseMatrix assemble_cellwise_laplacian(const TriMesh& mesh, Space trial,
                                         const Eigen::VectorXd& cell_weight, int value_dim) {
  if (cell_weight.size() != mesh.num_cells()) throw std::invalid_argument("one weight per cell");
  return assemble_stiffness(mesh, trial, value_dim, trial == Space::P2 ? 2 : 1,
                            [&](int c, const QuadraturePoint&) {
                              const double w = cell_weight[c];
                              if (!(w > 0.0)) throw InvalidWeightError(c, w);
                              return w;
                            });
}

SparseMatrix assemble_mass(const TriMesh& mesh, Space trial, int value_dim) {
  PhaseScope phase(Phase::Assembly);
  const int n = local_size(trial);
  const auto rule = quadrature(trial == Space::P2 ? 4 : 2);
  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_cells()) * n * n * value_dim);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = CellGeometry::of(mesh, c);
    const auto nodes = local_nodes(mesh, trial, c);
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    for (const QuadraturePoint& q : rule) {
      const BasisAt basis(trial, geo, q.xi, q.eta);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) local(a, b) += q.weight * geo.area * basis.value[a] * basis.value[b];
      }
    }
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int k = 0; k < value_dim; ++k) {
          triplets.emplace_back(nodes[a] * value_dim + k, nodes[b] * value_dim + k, local(a, b));
        }
      }
    }
  }
  const int size = mesh.num_nodes(trial) * value_dim;
  return to_matrix(triplets, size, size);
}

Eigen::VectorXd assemble_load(const TriMesh& mesh, Space trial,
                              const std::function<double(const Vec2&)>& f, int degree) {
  PhaseScope phase(Phase::Assembly);
  const int n = local_size(trial);
  const auto rule = quadrature(degree);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.num_nodes(trial));
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geo = CellGeometry::of(mesh, c);
    const auto nodes = local_nodes(mesh, trial, c);
    for (const QuadraturePoint& q : rule) {
      const BasisAt basis(trial, geo, q.xi, q.eta);
      const double fx = f(geo.map(q.xi, q.eta)) * q.weight * geo.area;
      for (int a = 0; a < n; ++a) load[nodes[a]] += fx * basis.value[a];
    }
  }
  return load;
}

namespace {

// Splits `matrix` into the identity-augmented constrained matrix and the
// coupling block (all rows, constrained columns; constrained rows empty).
std::pair<SparseMatrix, SparseMatrix> split_constrained(const SparseMatrix& matrix,
                                                        const std::vector<int>& dofs) {
  const int n = static_cast<int>(matrix.rows());
  std::vector<int> slot(n, -1);
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    if (dofs[k] < 0 || dofs[k] >= n) throw std::invalid_argument("constraint dof out of range");
    slot[dofs[k]] = static_cast<int>(k);
  }
  Triplets kept, coupling;
  kept.reserve(matrix.nonZeros());
  for (int i = 0; i < n; ++i) {
    const bool row_fixed = slot[i] >= 0;
    for (SparseMatrix::InnerIterator it(matrix, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (row_fixed) continue;
      if (slot[j] >= 0) {
        coupling.emplace_back(i, slot[j], it.value());
      } else {
        kept.emplace_back(i, j, it.value());
      }
    }
  }
  for (int d : dofs) kept.emplace_back(d, d, 1.0);
  return {to_matrix(kept, n, n), to_matrix(coupling, n, static_cast<int>(dofs.size()))};
}

}  // namespace

void apply_constraints(SparseSystem& system) {
  if (system.constraints_applied) return;
  std::vector<int> dofs;
  Eigen::VectorXd values(system.constraints.size());
  for (std::size_t k = 0; k < system.constraints.size(); ++k) {
    dofs.push_back(system.constraints[k].dof);
    values[static_cast<Eigen::Index>(k)] = system.constraints[k].value;
  }
  auto [constrained, coupling] = split_constrained(system.matrix, dofs);
  system.rhs -= coupling * values;
  for (std::size_t k = 0; k < dofs.size(); ++k) system.rhs[dofs[k]] = values[static_cast<Eigen::Index>(k)];
  system.matrix = std::move(constrained);
  system.constraints_applied = true;
}

struct LinearSolver::Impl {
  LinearSolverOptions options;
  SparseMatrix matrix;
  double matrix_inf_norm = 0.0;
  std::unique_ptr<Eigen::SimplicialLDLT<ColMatrix>> ldlt;
  std::unique_ptr<Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>> lu;
  std::unique_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>> cg;

  void factor_lu() {
    ldlt.reset();
    lu = std::make_unique<Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>>();
    const ColMatrix col = matrix;
    lu->analyzePattern(col);
    lu->factorize(col);
    if (lu->info() != Eigen::Success) {
      throw FactorizationError("sparse LU factorisation failed: " + lu->lastErrorMessage());
    }
  }

  bool acceptable(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const {
    if (!x.allFinite()) return false;
    const Eigen::VectorXd r = matrix * x - b;
    if (r.norm() <= 1e-10 * (1.0 + b.norm())) return true;
    // small normwise backward error
    return r.lpNorm<Eigen::Infinity>() <= 1e-11 * (matrix_inf_norm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
  }
};

LinearSolver::LinearSolver(const SparseMatrix& matrix, const LinearSolverOptions& options)
    : impl_(std::make_unique<Impl>()) {
  PhaseScope phase(Phase::LinearSolve);
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("linear system must be square");
  impl_->options = options;
  impl_->matrix = matrix;
  for (int row = 0; row < matrix.outerSize(); ++row) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(matrix, row); it; ++it) sum += std::abs(it.value());
    impl_->matrix_inf_norm = std::max(impl_->matrix_inf_norm, sum);
  }
  if (options.kind == LinearSolverKind::ConjugateGradient) {
    impl_->cg = std::make_unique<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>>();
    impl_->cg->setTolerance(options.cg_tolerance);
    impl_->cg->setMaxIterations(options.cg_max_iterations);
    impl_->cg->compute(impl_->matrix);
    return;
  }
  if (options.symmetric) {
    impl_->ldlt = std::make_unique<Eigen::SimplicialLDLT<ColMatrix>>();
    impl_->ldlt->compute(ColMatrix(matrix));
    if (impl_->ldlt->info() == Eigen::Success) return;
  }
  impl_->factor_lu();
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

int LinearSolver::size() const { return static_cast<int>(impl_->matrix.rows()); }

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& rhs) const {
  PhaseScope phase(Phase::LinearSolve);
  Impl& s = *impl_;
  if (rhs.size() != s.matrix.rows()) throw std::invalid_argument("rhs size mismatch");
  if (s.cg) {
    Eigen::VectorXd x = s.cg->solve(rhs);
    if (s.cg->info() != Eigen::Success || !x.allFinite()) {
      throw FactorizationError("conjugate gradient did not converge");
    }
    return x;
  }
  if (s.ldlt) {
    Eigen::VectorXd x = s.ldlt->solve(rhs);
    if (s.acceptable(x, rhs)) return x;
    s.factor_lu();
  }
  Eigen::VectorXd x = s.lu->solve(rhs);
  if (!s.acceptable(x, rhs)) {
    throw FactorizationError("direct solve residual check failed (singular or ill-conditioned matrix)");
  }
  return x;
}

Eigen::VectorXd solve_linear(const SparseSystem& system, const LinearSolverOptions& options) {
  if (!system.constraints_applied && !system.constraints.empty()) {
    SparseSystem copy = system;
    apply_constraints(copy);
    return LinearSolver(copy.matrix, options).solve(copy.rhs);
  }
  return LinearSolver(system.matrix, options).solve(system.rhs);
}

ConstrainedSolver::ConstrainedSolver(const SparseMatrix& matrix, std::vector<int> constrained_dofs,
                                     const LinearSolverOptions& options)
    : dofs_(std::move(constrained_dofs)),
      constrained_(),
      coupling_(),
      solver_([&] {
        auto parts = split_constrained(matrix, dofs_);
        constrained_ = std::move(parts.first);
        coupling_ = std::move(parts.second);
        return LinearSolver(constrained_, options);
      }()) {}

Eigen::VectorXd ConstrainedSolver::solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& values) const {
  if (values.size() != static_cast<Eigen::Index>(dofs_.size())) {
    throw std::invalid_argument("one value per constrained dof");
  }
  Eigen::VectorXd b = rhs - coupling_ * values;
  for (std::size_t k = 0; k < dofs_.size(); ++k) b[dofs_[k]] = values[static_cast<Eigen::Index>(k)];
  return solver_.solve(b);
}

std::vector<int> vector_dofs(const std::vector<int>& nodes, int value_dim) {
  std::vector<int> dofs;
  dofs.reserve(nodes.size() * value_dim);
  for (int n : nodes) {
    for (int k = 0; k < value_dim; ++k) dofs.push_back(n * value_dim + k);
  }
  return dofs;
}

void write_matrix_market(const SparseMatrix& matrix, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  out.precision(17);
  for (int i = 0; i < matrix.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(matrix, i); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace meshmotion::fem
