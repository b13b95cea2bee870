#include "meshmotion/mesh/delaunay.hpp"

#include <boost/polygon/voronoi.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace meshmotion {

namespace bp = boost::polygon;

std::vector<Cell> delaunay_triangulate(const std::vector<Vec2>& points, double scale) {
  if (points.size() < 3) return {};
  std::vector<bp::point_data<int>> sites;
  sites.reserve(points.size());
  for (const Vec2& p : points) {
    const double x = std::round(p.x() * scale), y = std::round(p.y() * scale);
    if (std::abs(x) > std::numeric_limits<int>::max() / 2 || std::abs(y) > std::numeric_limits<int>::max() / 2) {
      throw std::invalid_argument("point out of range for the Voronoi grid");
    }
    sites.emplace_back(static_cast<int>(x), static_cast<int>(y));
  }
  bp::voronoi_diagram<double> vd;
  bp::construct_voronoi(sites.begin(), sites.end(), &vd);

  auto orient = [&](int a, int b, int c) {
    const double ax = sites[a].x(), ay = sites[a].y();
    return (sites[b].x() - ax) * double(sites[c].y() - ay) - (sites[c].x() - ax) * double(sites[b].y() - ay);
  };

  std::vector<Cell> cells;
  cells.reserve(2 * points.size());
  std::vector<int> ring;
  for (const auto& vertex : vd.vertices()) {
    ring.clear();
    const auto* edge = vertex.incident_edge();
    do {
      ring.push_back(static_cast<int>(edge->cell()->source_index()));
      edge = edge->rot_next();
    } while (edge != vertex.incident_edge());
    if (ring.size() < 3) continue;
    // make the ring counter-clockwise
    double area2 = 0.0;
    for (std::size_t k = 1; k + 1 < ring.size(); ++k) area2 += orient(ring[0], ring[k], ring[k + 1]);
    if (area2 < 0) std::reverse(ring.begin(), ring.end());
    for (std::size_t k = 1; k + 1 < ring.size(); ++k) {
      cells.push_back({ring[0], ring[k], ring[k + 1]});
    }
  }
  return cells;
}

}  // namespace meshmotion
