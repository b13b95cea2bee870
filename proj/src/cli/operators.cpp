#include "meshmotion/cli/operators.hpp"

#include "meshmotion/classic/extension.hpp"
#include "meshmotion/nncorr/nncorr.hpp"

#include <charconv>
#include <memory>

namespace meshmotion::cli {

namespace {

const Json& section(const Json& config, const char* key) {
  static const Json empty = Json::object();
  return config.is_object() && config.contains(key) ? config.at(key) : empty;
}

std::string kind_of(const Json& params) {
  if (params.contains("kind")) return params.at("kind").get<std::string>();
  if (params.contains("icnn")) return "hybrid";
  if (params.contains("network")) return "nncorr";
  return "";
}

}  // namespace

std::string OperatorSpec::str() const {
  switch (kind) {
    case OperatorKind::Harmonic: return "harmonic";
    case OperatorKind::Biharmonic: return "biharmonic";
    case OperatorKind::PLaplace: {
      Json j = p;
      return "plaplace:" + j.dump();
    }
    case OperatorKind::Elastic: return "elastic";
    case OperatorKind::Hybrid: return "hybrid:" + strategy_name(strategy);
    case OperatorKind::NNCorr: return "nncorr";
  }
  return "";
}

OperatorSpec parse_operator_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  OperatorSpec spec;
  auto no_arg = [&](OperatorKind k) {
    if (colon != std::string::npos) throw UsageError("operator \"" + head + "\" takes no argument");
    spec.kind = k;
    return spec;
  };
  if (head == "harmonic") return no_arg(OperatorKind::Harmonic);
  if (head == "biharmonic") return no_arg(OperatorKind::Biharmonic);
  if (head == "elastic") return no_arg(OperatorKind::Elastic);
  if (head == "nncorr") return no_arg(OperatorKind::NNCorr);
  if (head == "plaplace") {
    spec.kind = OperatorKind::PLaplace;
    const char* end = arg.data() + arg.size();
    const auto [ptr, ec] = std::from_chars(arg.data(), end, spec.p);
    if (arg.empty() || ec != std::errc() || ptr != end || !(spec.p >= 2.0))
      throw UsageError("plaplace needs an exponent p >= 2, e.g. plaplace:4");
    return spec;
  }
  if (head == "hybrid") {
    spec.kind = OperatorKind::Hybrid;
    if (!arg.empty()) {
      try {
        spec.strategy = parse_strategy(arg);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    return spec;
  }
  throw UsageError("unknown operator \"" + text +
                   "\" (expected harmonic, biharmonic, plaplace:p, elastic, hybrid:strategy or nncorr)");
}

Json hybrid_params_file(const icnn::IcnnParams& params) {
  return Json{{"kind", "hybrid"}, {"icnn", icnn::icnn_to_json(params)}};
}

Json nncorr_params_file(const MlpParams& params, MaskRhs mask) {
  return Json{{"kind", "nncorr"}, {"network", mlp_to_json(params)}, {"mask", {{"rhs", mask_rhs_name(mask)}}}};
}

ExtensionOperator make_operator(const OperatorSpec& spec, const MeshPtr& mesh, const std::optional<Json>& params,
                                const Json& config, Space space) {
  if (spec.needs_params()) {
    if (!params) throw UsageError("operator " + spec.str() + " needs --params");
    const std::string kind = kind_of(*params);
    const std::string want = spec.kind == OperatorKind::Hybrid ? "hybrid" : "nncorr";
    if (kind != want) throw UsageError("parameter file holds \"" + kind + "\" parameters, expected " + want);
  }
  switch (spec.kind) {
    case OperatorKind::Harmonic: {
      auto ext = std::make_shared<HarmonicExtender>(mesh, space);
      return [ext](const BoundaryDisplacement& g) { return ext->extend(g); };
    }
    case OperatorKind::Biharmonic: {
      auto ext = std::make_shared<BiharmonicExtender>(mesh, space);
      return [ext](const BoundaryDisplacement& g) { return ext->extend(g); };
    }
    case OperatorKind::PLaplace: {
      PLaplaceConfig cfg;
      cfg.p = spec.p;
      cfg.delta = section(config, "plaplace").value("delta", cfg.delta);
      return [mesh, cfg](const BoundaryDisplacement& g) { return p_laplace_extend(mesh, g, cfg); };
    }
    case OperatorKind::Elastic: {
      ElasticStiffnessConfig cfg;
      const Json& e = section(config, "elastic");
      cfg.mu_max = e.value("mu_max", cfg.mu_max);
      cfg.mu_min = e.value("mu_min", cfg.mu_min);
      cfg.validate();
      return [mesh, cfg](const BoundaryDisplacement& g) { return elastic_extend(mesh, g, cfg); };
    }
    case OperatorKind::Hybrid: {
      const icnn::IcnnParams p = icnn::icnn_from_json(params->at("icnn"));
      StrategyConfig cfg;
      cfg.strategy = spec.strategy;
      const Json& s = section(config, "strategy");
      cfg.threshold = s.value("threshold", cfg.threshold);
      if (s.contains("probe_point")) cfg.probe_point = Vec2(s.at("probe_point").at(0), s.at("probe_point").at(1));
      cfg.validate();
      auto state = std::make_shared<HybridState>();
      return [mesh, p, cfg, state](const BoundaryDisplacement& g) {
        HybridStep step = hybrid_extend_auto(mesh, *state, g, p, cfg);
        *state = std::move(step.state);
        return std::move(step.u);
      };
    }
    case OperatorKind::NNCorr: {
      MaskConfig mask;
      mask.rhs = parse_mask_rhs(section(*params, "mask").value("rhs", std::string("hand-tuned")));
      auto ext = std::make_shared<NNCorrExtender>(mesh, mlp_from_json(params->at("network")), compute_mask(mesh, mask));
      return [ext](const BoundaryDisplacement& g) { return ext->extend(g); };
    }
  }
  throw UsageError("unsupported operator");
}

}  // namespace meshmotion::cli
