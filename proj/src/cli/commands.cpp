#include "meshmotion/cli/commands.hpp"

#include "meshmotion/classic/extension.hpp"
#include "meshmotion/errors.hpp"
#include "meshmotion/hybrid/training.hpp"
#include "meshmotion/icnn/counterexample.hpp"
#include "meshmotion/mesh/benchmark.hpp"
#include "meshmotion/nncorr/training.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace meshmotion::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw UsageError("missing " + what);
  if (!fs::exists(path)) throw UsageError(what + " " + path.string() + " does not exist");
}

void require_out(const fs::path& path) {
  if (path.empty()) throw UsageError("missing --out");
}

Json read_config(const std::optional<fs::path>& path) {
  if (!path) return Json::object();
  require_file(*path, "config file");
  return read_json(*path);
}

std::optional<Json> read_params(const std::optional<fs::path>& path) {
  if (!path) return std::nullopt;
  require_file(*path, "parameter file");
  return read_json(*path);
}

OperatorSpec spec_or_usage(const std::string& op) {
  if (op.empty()) throw UsageError("missing --op");
  return parse_operator_spec(op);
}

std::pair<MeshPtr, MeshPtr> meshes_for(const std::optional<fs::path>& mesh, const std::optional<fs::path>& solid,
                                       int refinement, double coarsening, bool need_solid) {
  if (mesh.has_value() != (solid.has_value() || !need_solid))
    throw UsageError("give both --mesh and --solid or neither");
  if (mesh) {
    require_file(*mesh, "mesh file");
    MeshPtr s;
    if (need_solid) {
      require_file(*solid, "solid mesh file");
      s = load_mesh(*solid);
    }
    return {load_mesh(*mesh), s};
  }
  BenchmarkMeshOptions o;
  o.refinement = refinement;
  o.coarsening = coarsening;
  return {benchmark_mesh(o), need_solid ? flap_solid_mesh(o) : nullptr};
}

fs::path manifest_next_to(const fs::path& file) {
  return file.parent_path() / (file.stem().string() + ".manifest.json");
}

}  // namespace

Json run_manifest_to_json(const RunManifest& m) {
  const Timings& t = m.timings;
  return Json{{"command", m.command},
              {"config", m.config},
              {"inputs", m.inputs},
              {"outputs", m.outputs},
              {"seed", m.seed},
              {"timings_ms",
               {{"assembly", t.assembly_ms()},
                {"linear solves", t.linear_solve_ms()},
                {"neural network correction", t.nn_ms()},
                {"rest", t.rest_ms()},
                {"total", t.total_ms}}},
              {"phase_calls",
               {{"assembly", t.phase_calls[0]},
                {"linear solves", t.phase_calls[1]},
                {"neural network correction", t.phase_calls[2]}}},
              {"summary", m.summary}};
}

int thread_budget() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("MESHMOTION_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) throw UsageError("MESHMOTION_THREADS must be a positive integer");
    n = std::min<long>(n, cap);
  }
  return n;
}

std::string quality_csv(const QualityReport& q) {
  std::string out = "cell,quality\n";
  for (std::size_t c = 0; c < q.cell_quality.size(); ++c) out += std::to_string(c) + "," + num(q.cell_quality[c]) + "\n";
  return out;
}

RunManifest cmd_mesh(const MeshCommand& c) {
  require_out(c.out);
  if (c.refinement < 0 || c.refinement > 2) throw UsageError("refinement must be 0, 1 or 2");
  if (!(c.coarsening > 0.0)) throw UsageError("coarsening must be positive");
  RunManifest m;
  m.command = "mesh";
  m.config = {{"refinement", c.refinement}, {"coarsening", c.coarsening}};
  BenchmarkMeshOptions o;
  o.refinement = c.refinement;
  o.coarsening = c.coarsening;
  MeshPtr fluid, solid;
  {
    TimingRecorder rec(m.timings);
    fluid = benchmark_mesh(o);
    if (!c.solid_out.empty()) solid = flap_solid_mesh(o);
  }
  save_mesh(c.out, *fluid);
  m.outputs["mesh"] = c.out.string();
  if (solid) {
    save_mesh(c.solid_out, *solid);
    m.outputs["solid"] = c.solid_out.string();
  }
  m.summary = {{"vertices", fluid->num_vertices()}, {"cells", fluid->num_cells()}};
  return m;
}

RunManifest cmd_extend(const ExtendCommand& c) {
  require_file(c.mesh, "mesh file (--mesh)");
  require_file(c.g, "boundary displacement file (--g)");
  require_out(c.out);
  const OperatorSpec spec = spec_or_usage(c.op);
  const std::optional<Json> params = read_params(c.params);
  const Json config = read_config(c.config);
  if (spec.needs_params() && !params) throw UsageError("operator " + spec.str() + " needs --params");

  RunManifest m;
  m.command = "extend";
  m.seed = c.seed;
  m.config = {{"op", spec.str()}, {"config", config}};
  m.inputs = {{"mesh", c.mesh.string()}, {"g", c.g.string()}};
  if (c.params) m.inputs["params"] = c.params->string();
  if (c.config) m.inputs["config"] = c.config->string();

  const MeshPtr mesh = load_mesh(c.mesh);
  const BoundaryDisplacement g = boundary_from_json(read_json(c.g), mesh);
  std::optional<Field> u;
  {
    TimingRecorder rec(m.timings);
    const ExtensionOperator op = make_operator(spec, mesh, params, config, g.space());
    u = op(g);
  }
  const QualityReport q = quality_report(*mesh, *u);
  fs::create_directories(c.out);
  save_field(c.out / "field.json", *u);
  write_text(c.out / "quality.csv", quality_csv(q));
  m.outputs = {{"field", (c.out / "field.json").string()},
               {"quality", (c.out / "quality.csv").string()},
               {"manifest", (c.out / "manifest.json").string()}};
  m.summary = {{"min_quality", q.min_quality},
               {"min_det", q.min_det},
               {"histogram", q.histogram},
               {"trace_error", trace_error(*u, g)}};
  write_json(c.out / "manifest.json", run_manifest_to_json(m));
  return m;
}

RunManifest cmd_gen(const GenCommand& c) {
  require_file(c.config, "load configuration file (--config)");
  require_out(c.out);
  const Json j = read_json(c.config);
  std::vector<LoadConfig> configs;
  Material material;
  try {
    configs = load_configs_from_json(j);
    if (!j.is_object() || !j.contains("material")) throw UsageError("config file lacks a \"material\" section");
    material = material_from_json(j.at("material"));
  } catch (const Json::exception& e) {
    throw UsageError(std::string("bad config file: ") + e.what());
  } catch (const UsageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("bad config file: ") + e.what());
  }
  if (configs.empty()) throw UsageError("config file lists no load configurations");

  ArtificialDatasetOptions opt;
  opt.amplitudes = c.amplitudes.value_or(j.value("amplitudes", opt.amplitudes));
  if (opt.amplitudes < 1) throw UsageError("amplitudes must be >= 1");
  opt.seed = c.seed;
  opt.threads = thread_budget();

  RunManifest m;
  m.command = "gen";
  m.seed = c.seed;
  m.config = {{"material", material_to_json(material)}, {"amplitudes", opt.amplitudes}, {"configs", j.at("configs")}};
  m.inputs = {{"config", c.config.string()}};
  if (c.mesh) m.inputs["mesh"] = c.mesh->string();
  if (c.solid) m.inputs["solid"] = c.solid->string();
  else m.config["mesh"] = {{"refinement", c.refinement}, {"coarsening", c.coarsening}};

  DatasetBuildReport report;
  SnapshotSet set;
  {
    TimingRecorder rec(m.timings);
    const auto [fluid, solid] = meshes_for(c.mesh, c.solid, c.refinement, c.coarsening, true);
    set = build_artificial_dataset(fluid, solid, configs, material, opt, &report);
  }
  save_snapshot_set(c.out, set);
  m.outputs = {{"dataset", (c.out / "manifest.json").string()}, {"run", (c.out / "run.json").string()}};
  m.summary = {{"snapshots", set.size()},
               {"requested", report.requested},
               {"skipped", report.skipped},
               {"skipped_messages", report.messages},
               {"train", set.split.train.size()},
               {"validation", set.split.validation.size()}};
  write_json(c.out / "run.json", run_manifest_to_json(m));
  return m;
}

RunManifest cmd_synthetic(const SyntheticCommand& c) {
  require_out(c.out);
  if (c.count < 1) throw UsageError("count must be >= 1");
  RunManifest m;
  m.command = "synthetic";
  m.config = {{"max_amplitude", c.max_amplitude}, {"count", c.count}, {"targets", c.targets}};
  if (c.mesh) m.inputs["mesh"] = c.mesh->string();
  else m.config["mesh"] = {{"refinement", c.refinement}, {"coarsening", c.coarsening}};
  SnapshotSet set;
  {
    TimingRecorder rec(m.timings);
    const MeshPtr mesh = meshes_for(c.mesh, std::nullopt, c.refinement, c.coarsening, false).first;
    std::vector<double> amps;
    for (int k = 0; k < c.count; ++k) amps.push_back(c.count == 1 ? c.max_amplitude : c.max_amplitude * k / (c.count - 1));
    set = synthetic_flap_family(mesh, amps);
    if (c.targets) extend_snapshots(set);
  }
  save_snapshot_set(c.out, set);
  m.outputs = {{"dataset", (c.out / "manifest.json").string()}, {"run", (c.out / "run.json").string()}};
  m.summary = {{"snapshots", set.size()}};
  write_json(c.out / "run.json", run_manifest_to_json(m));
  return m;
}

namespace {

RunManifest train_hybrid_cmd(const TrainCommand& c, SnapshotSet& set, const Json& cj) {
  HybridTrainConfig cfg = hybrid_train_config_from_json(cj);
  const std::uint64_t seed = c.seed.value_or(cj.value("seed", std::uint64_t{0}));
  const std::vector<int> widths = cj.value("widths", std::vector<int>{1, 5, 5, 1});
  const double scale = cj.value("init_scale", 0.5);
  std::vector<int> train = set.split.train;
  if (train.empty()) {
    train.resize(set.snapshots.size());
    for (std::size_t k = 0; k < train.size(); ++k) train[k] = static_cast<int>(k);
  }
  std::vector<HybridSample> samples;
  for (int i : train) {
    const Snapshot& s = set.snapshots[i];
    if (!s.u_biharm) throw UsageError("dataset lacks biharmonic targets");
    samples.push_back({s.g, *s.u_biharm});
  }

  RunManifest m;
  m.command = "train";
  m.seed = seed;
  m.config = hybrid_train_config_to_json(cfg);
  m.config["kind"] = "hybrid";
  m.config["N"] = cfg.subsample;
  m.config["widths"] = widths;
  m.config["init_scale"] = scale;
  HybridTrainResult r;
  {
    TimingRecorder rec(m.timings);
    r = train_hybrid(set.mesh, samples, icnn::IcnnParams::random(seed, scale, widths), cfg);
  }
  fs::create_directories(c.out);
  write_json(c.out / "params.json", hybrid_params_file(r.params));
  std::string csv = "iteration,loss\n";
  for (std::size_t k = 0; k < r.loss_history.size(); ++k) csv += std::to_string(k) + "," + num(r.loss_history[k]) + "\n";
  write_text(c.out / "loss.csv", csv);
  std::vector<int> used;
  for (int k : r.subsample) used.push_back(train[static_cast<std::size_t>(k)]);
  m.summary = {{"final_loss", r.loss_history.empty() ? 0.0 : r.loss_history.back()},
               {"iterations", r.iterations},
               {"evaluations", r.evaluations},
               {"stop_reason", r.stop_reason},
               {"subsample", used}};
  return m;
}

RunManifest train_nncorr_cmd(const TrainCommand& c, SnapshotSet& set, const Json& cj) {
  NNCorrTrainConfig cfg = nncorr_train_config_from_json(cj);
  if (c.seed) cfg.seed = *c.seed;
  const std::vector<int> widths = cj.value("widths", mlp_default_widths());
  MaskConfig mask;
  mask.rhs = parse_mask_rhs(cj.value("mask", std::string("hand-tuned")));
  bool missing = false;
  for (const Snapshot& s : set.snapshots) {
    if (!s.u_biharm) throw UsageError("dataset lacks biharmonic targets");
    missing = missing || !s.u_harm || !s.clement;
  }

  RunManifest m;
  m.command = "train";
  m.seed = cfg.seed;
  m.config = nncorr_train_config_to_json(cfg);
  m.config["kind"] = "nncorr";
  m.config["widths"] = widths;
  m.config["mask"] = mask_rhs_name(mask.rhs);
  NNCorrTrainResult r;
  {
    TimingRecorder rec(m.timings);
    if (missing) extend_snapshots(set, true, true, false);
    std::vector<NNCorrSample> samples;
    for (const Snapshot& s : set.snapshots) samples.push_back(make_nncorr_sample(*s.u_harm, *s.clement, *s.u_biharm));
    std::vector<int> train = set.split.train;
    if (train.empty())
      for (int k = 0; k < set.size(); ++k) train.push_back(k);
    const Field l = compute_mask(set.mesh, mask);
    r = train_nncorr(samples, l.coefficients(), train, set.split.validation, MlpParams::random(cfg.seed, widths), cfg);
  }
  fs::create_directories(c.out);
  write_json(c.out / "params.json", nncorr_params_file(r.params, mask.rhs));
  std::string csv = "epoch,train_loss,val_loss,learning_rate\n";
  for (std::size_t k = 0; k < r.train_loss.size(); ++k) {
    csv += std::to_string(k) + "," + num(r.train_loss[k]) + "," + (k < r.val_loss.size() ? num(r.val_loss[k]) : "") +
           "," + num(r.learning_rate[k]) + "\n";
  }
  write_text(c.out / "loss.csv", csv);
  m.summary = {{"final_train_loss", r.train_loss.back()},
               {"final_val_loss", r.val_loss.empty() ? Json(nullptr) : Json(r.val_loss.back())},
               {"epochs", r.train_loss.size()}};
  return m;
}

}  // namespace

RunManifest cmd_train(const TrainCommand& c) {
  if (c.kind != "hybrid" && c.kind != "nncorr") throw UsageError("train kind must be hybrid or nncorr");
  require_file(c.dataset, "dataset (--dataset)");
  require_out(c.out);
  const Json cj = read_config(c.config);
  SnapshotSet set = load_snapshot_set(c.dataset);
  if (set.snapshots.empty()) throw UsageError("dataset is empty");
  RunManifest m = c.kind == "hybrid" ? train_hybrid_cmd(c, set, cj) : train_nncorr_cmd(c, set, cj);
  m.inputs = {{"dataset", c.dataset.string()}};
  if (c.config) m.inputs["config"] = c.config->string();
  m.outputs = {{"params", (c.out / "params.json").string()},
               {"loss", (c.out / "loss.csv").string()},
               {"manifest", (c.out / "manifest.json").string()}};
  write_json(c.out / "manifest.json", run_manifest_to_json(m));
  return m;
}

RunManifest cmd_replay(const ReplayCommand& c) {
  require_file(c.dataset, "dataset (--dataset)");
  require_out(c.out);
  const OperatorSpec spec = spec_or_usage(c.op);
  const std::optional<Json> params = read_params(c.params);
  const Json config = read_config(c.config);
  if (spec.needs_params() && !params) throw UsageError("operator " + spec.str() + " needs --params");
  const SnapshotSet set = load_snapshot_set(c.dataset);

  RunManifest m;
  m.command = "replay";
  m.config = {{"op", spec.str()}, {"config", config}};
  m.inputs = {{"dataset", c.dataset.string()}};
  if (c.params) m.inputs["params"] = c.params->string();
  ReplayResult r;
  {
    TimingRecorder rec(m.timings);
    const Space space = set.snapshots.empty() ? Space::P2 : set.snapshots.front().g.space();
    r = replay_sequence(set, make_operator(spec, set.mesh, params, config, space));
  }
  write_text(c.out, replay_csv(r));
  const fs::path manifest = manifest_next_to(c.out);
  m.outputs = {{"csv", c.out.string()}, {"manifest", manifest.string()}};
  m.summary = {{"steps", r.steps.size()}, {"total", r.total}};
  if (r.degenerate_at) m.summary["degenerate_at"] = *r.degenerate_at;
  if (!r.failure.empty()) m.summary["failure"] = r.failure;
  write_json(manifest, run_manifest_to_json(m));
  return m;
}

RunManifest cmd_counterexample(const CounterexampleCommand& c) {
  require_out(c.out);
  if (c.restarts < 1) throw UsageError("restarts must be >= 1");
  icnn::CounterexampleConfig cfg;
  cfg.restarts = c.restarts;
  cfg.seed = c.seed;
  RunManifest m;
  m.command = "counterexample";
  m.seed = c.seed;
  m.config = {{"k", cfg.k}, {"grid", cfg.grid}, {"units", cfg.units}, {"restarts", cfg.restarts}};
  icnn::CounterexampleReport r;
  {
    TimingRecorder rec(m.timings);
    r = icnn::counterexample_fit(cfg);
  }
  m.summary = {{"shallow_sup", r.shallow_sup},
               {"deep_sup", r.deep_sup},
               {"shallow_best_sup", r.shallow_best_sup},
               {"deep_best_sup", r.deep_best_sup},
               {"exact_depth2_sup", r.exact_depth2_sup},
               {"profile_alpha", r.profile_alpha},
               {"profile_shallow", r.profile_shallow},
               {"profile_deep", r.profile_deep}};
  m.outputs = {{"report", c.out.string()}};
  write_json(c.out, run_manifest_to_json(m));
  return m;
}

}  // namespace meshmotion::cli
