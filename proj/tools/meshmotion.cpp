#include "meshmotion/cli/commands.hpp"
#include "meshmotion/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace meshmotion::cli;

namespace {

void print_summary(const RunManifest& m) {
  std::cout << m.command << ": " << m.summary.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mesh motion by harmonic, biharmonic, nonlinear and learned extension operators"};
  app.require_subcommand(1);

  MeshCommand mesh_cmd;
  auto* mesh = app.add_subcommand("mesh", "Write the benchmark fluid mesh (and optionally the flap solid)");
  mesh->add_option("--refinement", mesh_cmd.refinement, "Refinement level 0, 1 or 2");
  mesh->add_option("--coarsening", mesh_cmd.coarsening, "Scale factor on the element size");
  mesh->add_option("--out", mesh_cmd.out, "Fluid mesh file")->required();
  mesh->add_option("--solid-out", mesh_cmd.solid_out, "Solid mesh file");

  ExtendCommand ext_cmd;
  auto* extend = app.add_subcommand("extend", "Extend one boundary displacement into the domain");
  extend->add_option("--mesh", ext_cmd.mesh, "Mesh file")->required();
  extend->add_option("--g", ext_cmd.g, "Boundary displacement file")->required();
  extend->add_option("--op", ext_cmd.op, "harmonic | biharmonic | plaplace:p | elastic | hybrid:strategy | nncorr")
      ->required();
  extend->add_option("--params", ext_cmd.params, "Trained parameter file");
  extend->add_option("--config", ext_cmd.config, "Operator settings");
  extend->add_option("--seed", ext_cmd.seed);
  extend->add_option("--out", ext_cmd.out, "Output directory")->required();

  GenCommand gen_cmd;
  auto* gen = app.add_subcommand("gen", "Generate an artificial dataset from neo-Hookean flap solves");
  gen->add_option("--config", gen_cmd.config, "Material and load configurations")->required();
  gen->add_option("--mesh", gen_cmd.mesh, "Fluid mesh file");
  gen->add_option("--solid", gen_cmd.solid, "Solid mesh file");
  gen->add_option("--refinement", gen_cmd.refinement);
  gen->add_option("--coarsening", gen_cmd.coarsening);
  gen->add_option("--amplitudes", gen_cmd.amplitudes, "Amplitude steps per configuration");
  gen->add_option("--seed", gen_cmd.seed, "Split seed");
  gen->add_option("--out", gen_cmd.out, "Dataset directory")->required();

  SyntheticCommand syn_cmd;
  auto* syn = app.add_subcommand("synthetic", "Write a family of flap bendings of growing amplitude");
  syn->add_option("--mesh", syn_cmd.mesh, "Fluid mesh file");
  syn->add_option("--refinement", syn_cmd.refinement);
  syn->add_option("--coarsening", syn_cmd.coarsening);
  syn->add_option("--max-amplitude", syn_cmd.max_amplitude);
  syn->add_option("--count", syn_cmd.count);
  syn->add_flag("--targets", syn_cmd.targets, "Also store harmonic, Clement and biharmonic fields");
  syn->add_option("--out", syn_cmd.out, "Dataset directory")->required();

  TrainCommand train_cmd;
  auto* train = app.add_subcommand("train", "Train a learned extension operator");
  train->add_option("kind", train_cmd.kind, "hybrid | nncorr")->required();
  train->add_option("--dataset", train_cmd.dataset, "Dataset directory or manifest")->required();
  train->add_option("--config", train_cmd.config, "Training settings");
  train->add_option("--seed", train_cmd.seed);
  train->add_option("--out", train_cmd.out, "Output directory")->required();

  ReplayCommand rep_cmd;
  auto* replay = app.add_subcommand("replay", "Extend a snapshot sequence and record quality per step");
  replay->add_option("--dataset", rep_cmd.dataset, "Dataset directory or manifest")->required();
  replay->add_option("--op", rep_cmd.op)->required();
  replay->add_option("--params", rep_cmd.params);
  replay->add_option("--config", rep_cmd.config);
  replay->add_option("--out", rep_cmd.out, "CSV file")->required();

  CounterexampleCommand ce_cmd;
  auto* ce = app.add_subcommand("counterexample", "Fit shallow and deep ReLU nets to the depth-2 example");
  ce->add_option("--restarts", ce_cmd.restarts);
  ce->add_option("--seed", ce_cmd.seed);
  ce->add_option("--out", ce_cmd.out, "Report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunManifest m;
    if (*mesh) m = cmd_mesh(mesh_cmd);
    else if (*extend) m = cmd_extend(ext_cmd);
    else if (*gen) m = cmd_gen(gen_cmd);
    else if (*syn) m = cmd_synthetic(syn_cmd);
    else if (*train) m = cmd_train(train_cmd);
    else if (*replay) m = cmd_replay(rep_cmd);
    else m = cmd_counterexample(ce_cmd);
    print_summary(m);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
