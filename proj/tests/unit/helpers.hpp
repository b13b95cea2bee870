#pragma once

#include "meshmotion/mesh/mesh.hpp"
#include "meshmotion/rng.hpp"

#include <cmath>

namespace testing {

using namespace meshmotion;

// Unit square with the top side tagged "moving" and the rest "fixed".
inline MeshPtr tagged_square(int n) {
  const MeshPtr base = unit_square_mesh(n);
  std::vector<BoundaryEdge> boundary = base->boundary_edges();
  for (BoundaryEdge& e : boundary) {
    if (base->vertex(e.vertices[0]).y() == 1.0 && base->vertex(e.vertices[1]).y() == 1.0) e.tag = "moving";
  }
  return make_mesh(base->vertices(), base->cells(), std::move(boundary));
}

// Smooth random vector function built from a few seeded Fourier modes.
struct SmoothRandom {
  double a[2][3], f[2][3], ph[2][3];
  explicit SmoothRandom(std::uint64_t seed, double amplitude = 1.0) {
    CounterRng rng(seed);
    for (int k = 0; k < 2; ++k)
      for (int m = 0; m < 3; ++m) {
        a[k][m] = amplitude * rng.uniform(-1, 1);
        f[k][m] = rng.uniform(0.5, 3.0);
        ph[k][m] = rng.uniform(0, 6.283);
      }
  }
  Vec2 operator()(const Vec2& x) const {
    Vec2 r = Vec2::Zero();
    for (int k = 0; k < 2; ++k)
      for (int m = 0; m < 3; ++m) r[k] += a[k][m] * std::sin(f[k][m] * (x.x() + (m + 1) * x.y()) + ph[k][m]);
    return r;
  }
};

}  // namespace testing
