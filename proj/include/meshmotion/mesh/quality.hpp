#pragma once

#include "meshmotion/mesh/mesh.hpp"

#include <vector>

namespace meshmotion {

inline constexpr int kQualityBins = 40;

/// Per-cell scaled Jacobian of a deformed mesh. Entries are negative for
/// cells flagged by sign_degenerate (or inverted outright).
struct QualityReport {
  std::vector<double> cell_quality;
  double min_quality = 1.0;
  // 40 uniform bins over [-1, 1]; the last bin is closed.
  std::vector<int> histogram;
  double min_det = 1.0;
};

// Scaled Jacobian of one triangle; 0 for a zero-length edge.
double triangle_quality(const Vec2& p0, const Vec2& p1, const Vec2& p2);

std::vector<int> quality_histogram(const std::vector<double>& values, int bins = kQualityBins);

/// Scaled Jacobian of every cell of (id + u)(mesh), using the vertex values
/// of a P1 or P2 displacement; min_det is filled from min_det_gradient.
QualityReport scaled_jacobian(const TriMesh& mesh, const Field& displacement);

// Minimum of det(I + grad u) at the 28 degree-6 lattice points of each cell.
std::vector<double> cell_min_det(const TriMesh& mesh, const Field& displacement);
double min_det_gradient(const TriMesh& mesh, const Field& displacement);

// Flips the sign of every cell whose sampled det(I + grad u) is negative.
QualityReport sign_degenerate(const QualityReport& report, const TriMesh& mesh, const Field& displacement);

// scaled_jacobian followed by sign_degenerate.
QualityReport quality_report(const TriMesh& mesh, const Field& displacement);

}  // namespace meshmotion
