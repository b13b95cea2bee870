#pragma once

#include "meshmotion/datagen/neo_hookean.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace meshmotion {

enum class SplitMode { Sequential, Random };

std::string split_mode_name(SplitMode mode);
SplitMode parse_split_mode(const std::string& name);

struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
};

// One stored deformation. Gradients are the 4-component Clément P1 field of
// u_harm.
struct Snapshot {
  explicit Snapshot(BoundaryDisplacement boundary) : g(std::move(boundary)) {}

  BoundaryDisplacement g;
  std::optional<Field> u_harm;
  std::optional<Field> clement;
  std::optional<Field> u_biharm;
  Json info = Json::object();
};

struct SnapshotSet {
  MeshPtr mesh;
  std::vector<Snapshot> snapshots;
  SplitMode split_mode = SplitMode::Random;
  DatasetSplit split;
  // material, configs, generation counts
  Json metadata = Json::object();

  int size() const { return static_cast<int>(snapshots.size()); }
  // Shared mesh, matching spaces, split indices partitioning the range
  // (an empty split is allowed before split_dataset ran).
  void validate() const;
};

/// Sequential mode: consecutive blocks; random mode: blocks of a seeded
/// shuffle. Block k has floor(f_k n) entries, the last takes the remainder.
/// Two fractions give train/validation, three give train/validation/test.
SnapshotSet split_dataset(SnapshotSet set, SplitMode mode, const std::vector<double>& fractions,
                          std::uint64_t seed = 0);
std::vector<double> default_fractions(SplitMode mode);

struct ArtificialDatasetOptions {
  int amplitudes = 101;  // θ equally spaced over [0, 2π]
  Space space = Space::P2;
  bool store_harmonic = true;
  bool store_clement = true;
  bool store_biharmonic = true;
  int threads = 1;
  std::uint64_t seed = 0;
  NeoHookeanOptions solver;
};

struct DatasetBuildReport {
  int requested = 0;
  int skipped = 0;
  std::vector<std::string> messages;
};

/// Solid solves for every (config, θ), traced onto the fluid boundary and
/// extended harmonically (input) and biharmonically (target). Failed solves
/// are skipped and logged in the report; the set gets a seeded random split.
SnapshotSet build_artificial_dataset(const MeshPtr& fluid, const MeshPtr& solid, const std::vector<LoadConfig>& configs,
                                     const Material& material, const ArtificialDatasetOptions& options = {},
                                     DatasetBuildReport* report = nullptr);

/// Flap bending w(x) = A ξ²(3 - ξ)/2 with ξ the relative position along the
/// moving boundary, applied vertically on "moving" nodes.
BoundaryDisplacement synthetic_flap_displacement(const MeshPtr& mesh, double amplitude, Space space = Space::P2,
                                                 const std::string& moving_tag = "moving");
// A sequential set of synthetic deformations (boundary data only).
SnapshotSet synthetic_flap_family(const MeshPtr& mesh, const std::vector<double>& amplitudes,
                                  Space space = Space::P2);

/// Fills u_harm, clement and u_biharm of every snapshot.
void extend_snapshots(SnapshotSet& set, bool harmonic = true, bool clement = true, bool biharmonic = true);

Json snapshot_to_json(const Snapshot& s);
Snapshot snapshot_from_json(const Json& j, const MeshPtr& mesh);

/// Directory layout: manifest.json, mesh.json and snapshots/NNNNN.json.
void save_snapshot_set(const std::filesystem::path& dir, const SnapshotSet& set);
// Accepts the directory or its manifest.json.
SnapshotSet load_snapshot_set(const std::filesystem::path& path);

}  // namespace meshmotion
