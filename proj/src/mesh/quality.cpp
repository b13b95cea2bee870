#include "meshmotion/mesh/quality.hpp"

#include "meshmotion/fem/element.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace meshmotion {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

void check_displacement(const TriMesh& mesh, const Field& u) {
  if (u.value_dim() != 2 || u.space() == Space::DG0) {
    throw std::invalid_argument("displacement must be a P1 or P2 vector field");
  }
  if (u.mesh()->num_cells() != mesh.num_cells() || u.mesh()->num_vertices() != mesh.num_vertices()) {
    throw std::invalid_argument("displacement lives on a different mesh");
  }
}

}  // namespace

double triangle_quality(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  const Vec2 e[3] = {p1 - p0, p2 - p1, p0 - p2};
  const double len[3] = {e[0].norm(), e[1].norm(), e[2].norm()};
  if (len[0] == 0.0 || len[1] == 0.0 || len[2] == 0.0) return 0.0;
  double q = 1.0;
  for (int k = 0; k < 3; ++k) {
    const int n = (k + 1) % 3;
    q = std::min(q, cross(e[k], e[n]) / (len[k] * len[n]));
  }
  return std::clamp(2.0 / std::sqrt(3.0) * q, -1.0, 1.0);
}

std::vector<int> quality_histogram(const std::vector<double>& values, int bins) {
  std::vector<int> counts(bins, 0);
  for (double v : values) {
    int b = static_cast<int>(std::floor((v + 1.0) * 0.5 * bins));
    counts[std::clamp(b, 0, bins - 1)]++;
  }
  return counts;
}

QualityReport scaled_jacobian(const TriMesh& mesh, const Field& displacement) {
  check_displacement(mesh, displacement);
  const Eigen::VectorXd& c = displacement.coefficients();
  auto moved = [&](int v) { return Vec2(mesh.vertex(v) + Vec2(c[2 * v], c[2 * v + 1])); };
  QualityReport report;
  report.cell_quality.resize(mesh.num_cells());
  for (int t = 0; t < mesh.num_cells(); ++t) {
    const Cell& cell = mesh.cell(t);
    report.cell_quality[t] = triangle_quality(moved(cell[0]), moved(cell[1]), moved(cell[2]));
  }
  report.min_quality = *std::min_element(report.cell_quality.begin(), report.cell_quality.end());
  report.histogram = quality_histogram(report.cell_quality);
  report.min_det = min_det_gradient(mesh, displacement);
  return report;
}

std::vector<double> cell_min_det(const TriMesh& mesh, const Field& displacement) {
  check_displacement(mesh, displacement);
  constexpr int order = 6;
  std::vector<double> result(mesh.num_cells());
  for (int t = 0; t < mesh.num_cells(); ++t) {
    const fem::CellGeometry geo = fem::CellGeometry::of(mesh, t);
    const auto nodes = fem::local_nodes(mesh, displacement.space(), t);
    double m = INFINITY;
    for (int i = 0; i <= order; ++i) {
      for (int j = 0; i + j <= order; ++j) {
        const fem::BasisAt basis(displacement.space(), geo, double(i) / order, double(j) / order);
        const Eigen::Matrix2d grad = fem::vector_gradient(basis, displacement.coefficients(), nodes);
        m = std::min(m, (Eigen::Matrix2d::Identity() + grad).determinant());
      }
    }
    result[t] = m;
  }
  return result;
}

double min_det_gradient(const TriMesh& mesh, const Field& displacement) {
  const auto dets = cell_min_det(mesh, displacement);
  return *std::min_element(dets.begin(), dets.end());
}

QualityReport sign_degenerate(const QualityReport& report, const TriMesh& mesh, const Field& displacement) {
  const auto dets = cell_min_det(mesh, displacement);
  if (dets.size() != report.cell_quality.size()) throw std::invalid_argument("report/mesh mismatch");
  QualityReport out = report;
  for (std::size_t t = 0; t < dets.size(); ++t) {
    if (dets[t] < 0.0) out.cell_quality[t] = -std::abs(out.cell_quality[t]);
  }
  out.min_quality = *std::min_element(out.cell_quality.begin(), out.cell_quality.end());
  out.histogram = quality_histogram(out.cell_quality);
  out.min_det = *std::min_element(dets.begin(), dets.end());
  return out;
}

QualityReport quality_report(const TriMesh& mesh, const Field& displacement) {
  return sign_degenerate(scaled_jacobian(mesh, displacement), mesh, displacement);
}

}  // namespace meshmotion
