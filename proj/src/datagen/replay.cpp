#include "meshmotion/datagen/replay.hpp"

#include <cstdio>
#include <exception>

namespace meshmotion {

ReplayResult replay_sequence(const std::vector<BoundaryDisplacement>& sequence, const ExtensionOperator& op) {
  ReplayResult result;
  result.total = static_cast<int>(sequence.size());
  for (int k = 0; k < result.total; ++k) {
    Field u = Field::zeros(sequence[k].mesh(), sequence[k].space(), 2);
    try {
      u = op(sequence[k]);
    } catch (const std::exception& e) {
      result.degenerate_at = k;
      result.failure = e.what();
      break;
    }
    const QualityReport q = quality_report(*u.mesh(), u);
    result.steps.push_back({k, q.min_quality, q.min_det});
    if (!(q.min_det > 0.0)) {
      result.degenerate_at = k;
      break;
    }
  }
  return result;
}

ReplayResult replay_sequence(const SnapshotSet& set, const ExtensionOperator& op) {
  std::vector<BoundaryDisplacement> gs;
  gs.reserve(set.snapshots.size());
  for (const Snapshot& s : set.snapshots) gs.push_back(s.g);
  return replay_sequence(gs, op);
}

std::string replay_csv(const ReplayResult& result) {
  std::string out = "step,min_quality,min_det\n";
  char buf[96];
  for (const ReplayStep& s : result.steps) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", s.step, s.min_quality, s.min_det);
    out += buf;
  }
  if (result.degenerate_at) out += "# degenerate_at," + std::to_string(*result.degenerate_at) + "\n";
  return out;
}

}  // namespace meshmotion
