#pragma once

#include "meshmotion/mesh/mesh.hpp"

#include <cstdint>

namespace meshmotion {

// Channel with cylinder and elastic flap (FSI benchmark geometry).
namespace benchmark_geometry {
inline constexpr double length = 2.5;
inline constexpr double height = 0.41;
inline constexpr double cx = 0.2;
inline constexpr double cy = 0.2;
inline constexpr double radius = 0.05;
inline constexpr double flap_end = 0.6;
inline constexpr double flap_bottom = 0.19;
inline constexpr double flap_top = 0.21;
// x where the flap meets the cylinder
double flap_start();
}  // namespace benchmark_geometry

struct BenchmarkMeshOptions {
  int refinement = 0;
  // Multiplies every target edge length; > 1 gives coarser meshes.
  double coarsening = 1.0;
  std::uint64_t seed = 20240501;
  double h_min = 0.004;
  double h_max = 0.0155;
  double grading = 0.12;
};

/// Fluid mesh around the obstacle. Flap boundary edges are tagged "moving",
/// channel walls and the cylinder arc "fixed". Point placement is seeded
/// Poisson-disk sampling graded towards the obstacle; the triangulation is
/// Delaunay and contains every boundary segment.
MeshPtr benchmark_mesh(int refinement);
MeshPtr benchmark_mesh(const BenchmarkMeshOptions& options);

/// Structured flap mesh whose boundary nodes coincide with the "moving"
/// boundary of the fluid mesh built from the same options. Tags: "clamped"
/// (left), "tip" (right), "top", "bottom".
MeshPtr flap_solid_mesh(const BenchmarkMeshOptions& options);

}  // namespace meshmotion
