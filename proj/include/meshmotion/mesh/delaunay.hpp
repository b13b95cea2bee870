#pragma once

#include "meshmotion/mesh/mesh.hpp"

#include <vector>

namespace meshmotion {

/// Delaunay triangulation of distinct points (counter-clockwise cells),
/// computed as the dual of the Voronoi diagram. Points are snapped to a grid
/// of spacing 1/scale for the exact predicates; cocircular groups are fanned.
std::vector<Cell> delaunay_triangulate(const std::vector<Vec2>& points, double scale = 1e7);

}  // namespace meshmotion
