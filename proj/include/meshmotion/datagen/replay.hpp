#pragma once

#include "meshmotion/datagen/dataset.hpp"
#include "meshmotion/mesh/quality.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace meshmotion {

// Extension closure; stateful strategies keep their state inside it.
using ExtensionOperator = std::function<Field(const BoundaryDisplacement& g)>;

struct ReplayStep {
  int step = 0;
  double min_quality = 0.0;
  double min_det = 0.0;
};

struct ReplayResult {
  std::vector<ReplayStep> steps;
  int total = 0;
  // First step whose mesh folded (min det <= 0) or whose extension failed.
  std::optional<int> degenerate_at;
  std::string failure;
};

/// Applies the operator to each g in order and records quality per step.
/// The series stops at the first degenerate step, which is still recorded
/// when its quality could be measured.
ReplayResult replay_sequence(const std::vector<BoundaryDisplacement>& sequence, const ExtensionOperator& op);
ReplayResult replay_sequence(const SnapshotSet& set, const ExtensionOperator& op);

// CSV "step,min_quality,min_det" with a "# degenerate_at,<k>" footer line.
std::string replay_csv(const ReplayResult& result);

}  // namespace meshmotion
