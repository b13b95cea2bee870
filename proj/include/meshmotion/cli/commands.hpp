#pragma once

#include "meshmotion/cli/operators.hpp"
#include "meshmotion/timing.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace meshmotion::cli {

namespace fs = std::filesystem;

/// What a command did: config echo, paths, seed and per-phase wall time.
struct RunManifest {
  std::string command;
  Json config = Json::object();
  Json inputs = Json::object();
  Json outputs = Json::object();
  std::uint64_t seed = 0;
  Timings timings;
  Json summary = Json::object();
};

Json run_manifest_to_json(const RunManifest& m);

// Thread budget: hardware concurrency capped by MESHMOTION_THREADS.
int thread_budget();

struct MeshCommand {
  int refinement = 0;
  double coarsening = 1.0;
  fs::path out;        // fluid mesh
  fs::path solid_out;  // optional solid flap mesh
};

struct ExtendCommand {
  fs::path mesh;
  fs::path g;
  std::string op;
  std::optional<fs::path> params;
  std::optional<fs::path> config;
  fs::path out;  // directory: field.json, quality.csv, manifest.json
  std::uint64_t seed = 0;
};

struct GenCommand {
  fs::path config;  // material, configs and optionally amplitudes
  std::optional<fs::path> mesh;
  std::optional<fs::path> solid;
  int refinement = 0;
  double coarsening = 1.0;
  std::optional<int> amplitudes;
  fs::path out;
  std::uint64_t seed = 0;
};

struct SyntheticCommand {
  std::optional<fs::path> mesh;
  int refinement = 0;
  double coarsening = 1.0;
  double max_amplitude = 0.2;
  int count = 41;
  bool targets = false;
  fs::path out;
};

struct TrainCommand {
  std::string kind;  // hybrid | nncorr
  fs::path dataset;
  std::optional<fs::path> config;
  fs::path out;  // directory: params.json, loss.csv, manifest.json
  std::optional<std::uint64_t> seed;
};

struct ReplayCommand {
  fs::path dataset;
  std::string op;
  std::optional<fs::path> params;
  std::optional<fs::path> config;
  fs::path out;  // CSV; the manifest goes next to it
};

struct CounterexampleCommand {
  int restarts = 10;
  std::uint64_t seed = 1;
  fs::path out;
};

// Each command returns its manifest after writing all outputs and throws
// UsageError for bad input.
RunManifest cmd_mesh(const MeshCommand& c);
RunManifest cmd_extend(const ExtendCommand& c);
RunManifest cmd_gen(const GenCommand& c);
RunManifest cmd_synthetic(const SyntheticCommand& c);
RunManifest cmd_train(const TrainCommand& c);
RunManifest cmd_replay(const ReplayCommand& c);
RunManifest cmd_counterexample(const CounterexampleCommand& c);

// "cell,quality" rows of a quality report.
std::string quality_csv(const QualityReport& q);

}  // namespace meshmotion::cli
