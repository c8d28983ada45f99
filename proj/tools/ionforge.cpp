// ionforge: synthesize and evaluate Rabi-frequency controls that realize target
// spin-spin interaction graphs on a linear ion chain.
//
// Exit codes: 0 success, 1 usage, 2 numeric failure, 3 I/O or schema failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ionforge/ionforge.hpp"

namespace {

using namespace ionforge;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::optional<double> f_low, f_high, f_x, f_z;
  std::optional<std::string> out, dataset, checkpoint;
  std::optional<int> epochs, hidden, train_size, val_size, batch;
  std::optional<double> lr, dropout;
  std::vector<std::string> targets;
  std::vector<double> epsilons;
  std::optional<double> budget_hz;
  std::vector<int> scaling_n;
  std::vector<std::string> scaling_kinds;
  std::optional<int> scaling_epochs;
  std::optional<std::string> graph;
  bool list = false;
  bool csv = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Run configuration JSON");
  cmd->add_option("--seed", o.seed, "Global seed");
  cmd->add_option("--n", o.n, "Number of ions");
  cmd->add_option("--f-low", o.f_low, "Lowest transverse mode frequency, Hz");
  cmd->add_option("--f-high", o.f_high, "Transverse trap (COM) frequency, Hz");
  cmd->add_option("--fx", o.f_x, "Explicit transverse trap frequency, Hz (with --fz)");
  cmd->add_option("--fz", o.f_z, "Explicit axial trap frequency, Hz (with --fx)");
  cmd->add_option("--out", o.out, "Report directory");
}

void add_train(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--dataset", o.dataset, "Dataset file");
  cmd->add_option("--epochs", o.epochs);
  cmd->add_option("--hidden", o.hidden, "Hidden layer width");
  cmd->add_option("--train-size", o.train_size);
  cmd->add_option("--val-size", o.val_size);
  cmd->add_option("--batch", o.batch);
  cmd->add_option("--lr", o.lr, "Initial learning rate");
  cmd->add_option("--dropout", o.dropout);
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : run_config_from_json(read_json(o.config));
  if (o.config.empty()) c.train.seed = c.seed;
  if (o.seed) c.seed = c.train.seed = *o.seed;
  if (o.n) c.n_ions = *o.n;
  if (o.f_low) c.f_low_hz = *o.f_low;
  if (o.f_high) c.f_high_hz = *o.f_high;
  if (o.f_x) c.f_x_hz = *o.f_x;
  if (o.f_z) c.f_z_hz = *o.f_z;
  if (o.out) c.report_dir = *o.out;
  if (o.dataset) c.dataset = *o.dataset;
  if (o.checkpoint) c.checkpoint = *o.checkpoint;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.hidden) c.train.hidden_dim = *o.hidden;
  if (o.train_size) c.train.train_size = *o.train_size;
  if (o.val_size) c.train.val_size = *o.val_size;
  if (o.batch) c.train.batch_size = *o.batch;
  if (o.lr) c.train.lr0 = *o.lr;
  if (o.dropout) c.train.dropout_rate = *o.dropout;
  if (!o.targets.empty()) {
    c.targets.clear();
    for (const auto& t : o.targets) c.targets.push_back(parse_lattice(t));
  }
  if (!o.epsilons.empty()) c.epsilons = o.epsilons;
  if (o.budget_hz) c.budget_hz = *o.budget_hz;
  if (!o.scaling_n.empty()) c.scaling_n = o.scaling_n;
  if (!o.scaling_kinds.empty()) {
    c.scaling_kinds.clear();
    for (const auto& k : o.scaling_kinds) c.scaling_kinds.push_back(lattice_kind_from_string(k));
  }
  if (o.scaling_epochs) c.scaling_epochs = *o.scaling_epochs;
  c.train.validate();
  return c;
}

int run_lattice(const Overrides& o) {
  if (o.list || o.targets.empty()) {
    const int n = o.n.value_or(10);
    for (const auto& s : list_supported(n))
      std::cout << s.label() << "  (" << lattice_edges(s).size() << " edges)\n";
    return 0;
  }
  for (const auto& t : o.targets) {
    const InteractionGraph g = build_target(parse_lattice(t));
    if (o.csv)
      std::cout << graph_to_csv(g);
    else
      std::cout << graph_to_json(g).dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ionforge: neural-network design of trapped-ion spin-spin interaction graphs"};
  app.require_subcommand(1);
  Overrides o;

  auto* chain = app.add_subcommand("chain", "Compute equilibrium, normal modes and beat-notes");
  add_common(chain, o);

  auto* gen = app.add_subcommand("gen-data", "Generate a training dataset from random controls");
  add_common(gen, o);
  add_train(gen, o);

  auto* tr = app.add_subcommand("train", "Train the inverse network");
  add_common(tr, o);
  add_train(tr, o);
  tr->add_option("--checkpoint", o.checkpoint, "Checkpoint output path");

  auto* inf = app.add_subcommand("infer", "Rabi frequencies for one target graph");
  add_common(inf, o);
  inf->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  inf->add_option("--target", o.targets, "Lattice shorthand, e.g. kagome:10 or square:2x5");
  inf->add_option("--graph", o.graph, "graph/1 JSON file with the target couplings");

  auto* ev = app.add_subcommand("eval", "Similarity, crosstalk and validity report");
  add_common(ev, o);
  ev->add_option("--checkpoint", o.checkpoint, "Trained checkpoint");
  ev->add_option("--target", o.targets, "Lattice shorthand (repeatable; default: all kinds at N)");
  ev->add_option("--epsilon", o.epsilons, "Crosstalk magnitudes (repeatable)");
  ev->add_option("--budget-hz", o.budget_hz, "Total Rabi-frequency budget sum|Omega|/2pi, Hz");

  auto* sc = app.add_subcommand("scaling", "Train and evaluate across chain sizes");
  add_common(sc, o);
  add_train(sc, o);
  sc->add_option("--n-values", o.scaling_n, "Chain sizes")->delimiter(',');
  sc->add_option("--kinds", o.scaling_kinds, "Lattice kinds")->delimiter(',');
  sc->add_option("--scaling-epochs", o.scaling_epochs, "Epochs per size");
  sc->add_option("--budget-hz", o.budget_hz, "Total Rabi-frequency budget, Hz");

  auto* lat = app.add_subcommand("lattice", "List lattice layouts or print a target graph");
  lat->add_option("--n", o.n, "Number of ions (for --list)");
  lat->add_option("--target", o.targets, "Lattice shorthand");
  lat->add_flag("--list", o.list, "List layouts available at N");
  lat->add_flag("--csv", o.csv, "Print i,j,J triples instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (lat->parsed()) return run_lattice(o);
    const RunConfig cfg = resolve(o);
    if (chain->parsed()) cmd_chain(cfg, std::cout);
    if (gen->parsed()) cmd_gen_data(cfg, std::cout);
    if (tr->parsed()) cmd_train(cfg, std::cout);
    if (inf->parsed()) {
      if (o.targets.size() > 1) throw ShapeError("infer takes one --target");
      std::optional<LatticeSpec> spec;
      if (!o.targets.empty()) spec = cfg.targets.front();
      std::optional<std::filesystem::path> graph;
      if (o.graph) graph = *o.graph;
      cmd_infer(cfg, spec, graph, std::cout);
    }
    if (ev->parsed()) cmd_eval(cfg, std::cout);
    if (sc->parsed()) cmd_scaling(cfg, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
