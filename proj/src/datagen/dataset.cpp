#include "meshmotion/datagen/dataset.hpp"

#include "meshmotion/classic/extension.hpp"
#include "meshmotion/errors.hpp"
#include "meshmotion/fem/clement.hpp"
#include "meshmotion/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

namespace meshmotion {

namespace {

void check_field(const std::optional<Field>& f, const MeshPtr& mesh, Space space, int dim, const char* name) {
  if (!f) return;
  if (f->mesh() != mesh) throw std::invalid_argument(std::string("snapshot set: ") + name + " on another mesh");
  if (f->space() != space || f->value_dim() != dim)
    throw std::invalid_argument(std::string("snapshot set: ") + name + " has the wrong space");
}

std::string snapshot_file(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshots/%05d.json", k);
  return buf;
}

}  // namespace

std::string split_mode_name(SplitMode mode) { return mode == SplitMode::Sequential ? "sequential" : "random"; }

SplitMode parse_split_mode(const std::string& name) {
  if (name == "sequential") return SplitMode::Sequential;
  if (name == "random") return SplitMode::Random;
  throw std::invalid_argument("unknown split mode \"" + name + "\"");
}

void SnapshotSet::validate() const {
  if (!mesh) throw std::invalid_argument("snapshot set without mesh");
  for (const Snapshot& s : snapshots) {
    if (s.g.mesh() != mesh) throw std::invalid_argument("snapshot set: boundary data on another mesh");
    check_field(s.u_harm, mesh, s.g.space(), 2, "u_harm");
    check_field(s.u_biharm, mesh, s.g.space(), 2, "u_biharm");
    check_field(s.clement, mesh, Space::P1, 4, "clement");
  }
  const std::size_t listed = split.train.size() + split.validation.size() + split.test.size();
  if (listed == 0) return;
  std::vector<int> all;
  for (const auto* part : {&split.train, &split.validation, &split.test}) all.insert(all.end(), part->begin(), part->end());
  std::sort(all.begin(), all.end());
  if (all.size() != snapshots.size()) throw std::invalid_argument("snapshot set: split does not cover every snapshot");
  for (std::size_t k = 0; k < all.size(); ++k)
    if (all[k] != static_cast<int>(k)) throw std::invalid_argument("snapshot set: split indices are not a partition");
}

std::vector<double> default_fractions(SplitMode mode) {
  if (mode == SplitMode::Sequential) return {0.75, 1.0 / 12.0, 1.0 / 6.0};
  return {0.85, 0.15};
}

SnapshotSet split_dataset(SnapshotSet set, SplitMode mode, const std::vector<double>& fractions, std::uint64_t seed) {
  if (fractions.size() != 2 && fractions.size() != 3)
    throw std::invalid_argument("split: expected two or three fractions");
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw std::invalid_argument("split: fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split: fractions must sum to 1");
  const int n = set.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (mode == SplitMode::Random) {
    CounterRng rng(seed, 0x5b11);
    shuffle(order, rng);
  }
  std::vector<std::vector<int>> parts(fractions.size());
  int start = 0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    const int count = k + 1 == fractions.size() ? n - start
                                                : static_cast<int>(std::floor(fractions[k] * n + 1e-9));
    if (count <= 0) throw std::invalid_argument("split: fraction " + std::to_string(fractions[k]) + " of " +
                                                std::to_string(n) + " snapshots gives an empty split");
    parts[k].assign(order.begin() + start, order.begin() + start + count);
    std::sort(parts[k].begin(), parts[k].end());
    start += count;
  }
  set.split_mode = mode;
  set.split = {parts[0], parts[1], parts.size() > 2 ? parts[2] : std::vector<int>{}};
  set.validate();
  return set;
}

void extend_snapshots(SnapshotSet& set, bool harmonic, bool clement, bool biharmonic) {
  if (set.snapshots.empty()) return;
  const Space space = set.snapshots.front().g.space();
  std::unique_ptr<HarmonicExtender> h;
  std::unique_ptr<fem::ClementOperator> c;
  std::unique_ptr<BiharmonicExtender> b;
  if (harmonic || clement) h = std::make_unique<HarmonicExtender>(set.mesh, space);
  if (clement) c = std::make_unique<fem::ClementOperator>(set.mesh, space);
  if (biharmonic) b = std::make_unique<BiharmonicExtender>(set.mesh, space);
  for (Snapshot& s : set.snapshots) {
    if (s.g.space() != space) throw std::invalid_argument("snapshot set: mixed boundary spaces");
    if (h) {
      Field u = h->extend(s.g);
      if (c) s.clement = c->apply(u);
      if (harmonic) s.u_harm = std::move(u);
    }
    if (b) s.u_biharm = b->extend(s.g);
  }
}

SnapshotSet build_artificial_dataset(const MeshPtr& fluid, const MeshPtr& solid, const std::vector<LoadConfig>& configs,
                                     const Material& material, const ArtificialDatasetOptions& options,
                                     DatasetBuildReport* report) {
  if (configs.empty()) throw std::invalid_argument("artificial dataset: no load configurations");
  if (options.amplitudes < 1) throw std::invalid_argument("artificial dataset: amplitudes must be >= 1");
  for (const LoadConfig& c : configs) c.validate();
  const NeoHookeanProblem problem(solid, material);
  const int amps = options.amplitudes;
  const int n = static_cast<int>(configs.size()) * amps;
  auto theta_of = [amps](int a) { return amps == 1 ? 0.0 : 2.0 * M_PI * a / (amps - 1); };

  std::vector<std::optional<Field>> displacement(static_cast<std::size_t>(n));
  std::vector<std::string> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < n; k = next++) {
      const LoadConfig& load = configs[static_cast<std::size_t>(k / amps)];
      try {
        displacement[k] = neo_hookean_solve(problem, load, theta_of(k % amps), options.solver).displacement;
      } catch (const Error& e) {
        errors[k] = e.what();
      }
    }
  };
  const int threads = std::clamp(options.threads, 1, n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  SnapshotSet set;
  set.mesh = fluid;
  DatasetBuildReport rep;
  rep.requested = n;
  for (int k = 0; k < n; ++k) {
    if (!displacement[k]) {
      ++rep.skipped;
      rep.messages.push_back("snapshot " + std::to_string(k) + " skipped: " + errors[k]);
      continue;
    }
    Snapshot s(solid_trace_to_fluid(*displacement[k], fluid, options.space));
    s.info = {{"config", k / amps}, {"amplitude_index", k % amps}, {"theta", theta_of(k % amps)}};
    set.snapshots.push_back(std::move(s));
  }
  extend_snapshots(set, options.store_harmonic, options.store_clement, options.store_biharmonic);

  Json cfg = Json::array();
  for (const LoadConfig& c : configs) cfg.push_back(load_config_to_json(c));
  set.metadata = {{"generator", "artificial"},
                  {"material", material_to_json(material)},
                  {"configs", cfg},
                  {"amplitudes", amps},
                  {"requested", rep.requested},
                  {"skipped", rep.skipped},
                  {"seed", options.seed}};
  if (set.size() >= 2) set = split_dataset(std::move(set), SplitMode::Random, default_fractions(SplitMode::Random), options.seed);
  if (report) *report = std::move(rep);
  return set;
}

BoundaryDisplacement synthetic_flap_displacement(const MeshPtr& mesh, double amplitude, Space space,
                                                 const std::string& moving_tag) {
  const std::vector<int> nodes = mesh->tagged_nodes(space, moving_tag);
  if (nodes.empty()) throw std::invalid_argument("synthetic flap: mesh has no \"" + moving_tag + "\" nodes");
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  for (int v : nodes) {
    x0 = std::min(x0, mesh->node_position(v).x());
    x1 = std::max(x1, mesh->node_position(v).x());
  }
  return BoundaryDisplacement::from_moving(
      mesh, space,
      [=](const Vec2& p) {
        const double xi = (p.x() - x0) / (x1 - x0);
        return Vec2(0.0, amplitude * xi * xi * (3.0 - xi) / 2.0);
      },
      moving_tag);
}

SnapshotSet synthetic_flap_family(const MeshPtr& mesh, const std::vector<double>& amplitudes, Space space) {
  SnapshotSet set;
  set.mesh = mesh;
  set.split_mode = SplitMode::Sequential;
  for (double a : amplitudes) {
    Snapshot s(synthetic_flap_displacement(mesh, a, space));
    s.info = {{"amplitude", a}};
    set.snapshots.push_back(std::move(s));
  }
  set.metadata = {{"generator", "synthetic-flap"}, {"amplitudes", amplitudes}};
  return set;
}

Json snapshot_to_json(const Snapshot& s) {
  Json j{{"g", boundary_to_json(s.g)}, {"info", s.info}};
  if (s.u_harm) j["u_harm"] = field_to_json(*s.u_harm);
  if (s.clement) j["clement"] = field_to_json(*s.clement);
  if (s.u_biharm) j["u_biharm"] = field_to_json(*s.u_biharm);
  return j;
}

Snapshot snapshot_from_json(const Json& j, const MeshPtr& mesh) {
  Snapshot s(boundary_from_json(j.at("g"), mesh));
  if (j.contains("u_harm")) s.u_harm = field_from_json(j.at("u_harm"), mesh);
  if (j.contains("clement")) s.clement = field_from_json(j.at("clement"), mesh);
  if (j.contains("u_biharm")) s.u_biharm = field_from_json(j.at("u_biharm"), mesh);
  s.info = j.value("info", Json::object());
  return s;
}

void save_snapshot_set(const std::filesystem::path& dir, const SnapshotSet& set) {
  set.validate();
  std::filesystem::create_directories(dir / "snapshots");
  save_mesh(dir / "mesh.json", *set.mesh);
  Json files = Json::array();
  for (int k = 0; k < set.size(); ++k) {
    const std::string name = snapshot_file(k);
    write_json(dir / name, snapshot_to_json(set.snapshots[k]));
    files.push_back(name);
  }
  Json manifest = set.metadata.is_object() ? set.metadata : Json::object();
  manifest["mesh"] = "mesh.json";
  manifest["snapshots"] = files;
  manifest["split"] = {{"mode", split_mode_name(set.split_mode)},
                       {"train", set.split.train},
                       {"validation", set.split.validation},
                       {"test", set.split.test}};
  write_json(dir / "manifest.json", manifest);
}

SnapshotSet load_snapshot_set(const std::filesystem::path& path) {
  const std::filesystem::path manifest_path = std::filesystem::is_directory(path) ? path / "manifest.json" : path;
  const std::filesystem::path dir = manifest_path.parent_path();
  Json manifest = read_json(manifest_path);
  SnapshotSet set;
  set.mesh = load_mesh(dir / manifest.at("mesh").get<std::string>());
  for (const Json& f : manifest.at("snapshots")) set.snapshots.push_back(snapshot_from_json(read_json(dir / f.get<std::string>()), set.mesh));
  const Json& split = manifest.at("split");
  set.split_mode = parse_split_mode(split.at("mode").get<std::string>());
  set.split = {split.at("train").get<std::vector<int>>(), split.at("validation").get<std::vector<int>>(),
               split.at("test").get<std::vector<int>>()};
  for (const char* key : {"mesh", "snapshots", "split"}) manifest.erase(key);
  set.metadata = std::move(manifest);
  set.validate();
  return set;
}

}  // namespace meshmotion
