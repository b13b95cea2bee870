#pragma once

#include "meshmotion/datagen/replay.hpp"
#include "meshmotion/hybrid/hybrid.hpp"
#include "meshmotion/nncorr/mask.hpp"
#include "meshmotion/nncorr/mlp.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace meshmotion::cli {

// Bad command line, missing inputs or malformed specs.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class OperatorKind { Harmonic, Biharmonic, PLaplace, Elastic, Hybrid, NNCorr };

/// harmonic | biharmonic | plaplace:<p> | elastic | hybrid[:nonlinear|incremental|auto] | nncorr
struct OperatorSpec {
  OperatorKind kind = OperatorKind::Harmonic;
  double p = 4.0;
  HybridStrategy strategy = HybridStrategy::Auto;

  bool needs_params() const { return kind == OperatorKind::Hybrid || kind == OperatorKind::NNCorr; }
  std::string str() const;
};

OperatorSpec parse_operator_spec(const std::string& text);

/// Extension closure for one mesh. `params` is a trained parameter file
/// (required for hybrid and nncorr); `config` may carry "elastic",
/// "plaplace" and "strategy" sections. Hybrid closures carry u_old/g_old
/// between calls.
ExtensionOperator make_operator(const OperatorSpec& spec, const MeshPtr& mesh, const std::optional<Json>& params = {},
                                const Json& config = Json::object(), Space space = Space::P2);

// Parameter files written by the train command.
Json hybrid_params_file(const icnn::IcnnParams& params);
Json nncorr_params_file(const MlpParams& params, MaskRhs mask);

}  // namespace meshmotion::cli
