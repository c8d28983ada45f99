#pragma once

// Run configuration and the pipeline commands behind the ionforge CLI. Each
// command reads its inputs, writes its artifacts and reports progress to `log`.
// Every artifact carries schema, seed, config hash and chain fingerprint.

#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "chain.hpp"
#include "evaluation.hpp"
#include "forward_model.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "scaling.hpp"
#include "train.hpp"

namespace ionforge {

struct RunConfig {
  std::uint64_t seed = 1;

  int n_ions = 10;
  double f_low_hz = 1e6;
  double f_high_hz = 5e6;
  std::optional<double> f_x_hz;  // explicit trap overrides band tuning when both are set
  std::optional<double> f_z_hz;

  TrainConfig train;
  std::vector<LatticeSpec> targets;
  std::vector<double> epsilons = epsilon_grid();
  double budget_hz = 1e6;

  std::vector<int> scaling_n{8, 10, 12, 16, 20, 24};
  std::vector<LatticeKind> scaling_kinds{LatticeKind::linear, LatticeKind::square, LatticeKind::triangular,
                                         LatticeKind::kagome};
  std::optional<int> scaling_epochs;

  std::filesystem::path dataset;
  std::filesystem::path checkpoint;
  std::filesystem::path report_dir = "out";

  TrapConfig trap() const {
    if (f_x_hz && f_z_hz) {
      TrapConfig t{n_ions, *f_x_hz * kTwoPi, *f_z_hz * kTwoPi};
      t.validate();
      return t;
    }
    return tune_trap(n_ions, f_low_hz, f_high_hz);
  }

  std::filesystem::path dataset_path() const { return dataset.empty() ? report_dir / "dataset.bin" : dataset; }
  std::filesystem::path checkpoint_path() const {
    return checkpoint.empty() ? report_dir / "model.ionnet" : checkpoint;
  }
};

inline json run_config_to_json(const RunConfig& c) {
  json targets = json::array();
  for (const auto& t : c.targets) targets.push_back(lattice_to_json(t));
  json kinds = json::array();
  for (auto k : c.scaling_kinds) kinds.push_back(to_string(k));
  json chain = {{"n", c.n_ions}, {"f_low_hz", c.f_low_hz}, {"f_high_hz", c.f_high_hz}};
  if (c.f_x_hz) chain["f_x_hz"] = *c.f_x_hz;
  if (c.f_z_hz) chain["f_z_hz"] = *c.f_z_hz;
  json scaling = {{"n_values", c.scaling_n}, {"kinds", kinds}};
  if (c.scaling_epochs) scaling["epochs"] = *c.scaling_epochs;
  return {{"seed", c.seed},
          {"chain", chain},
          {"train", train_config_to_json(c.train)},
          {"targets", targets},
          {"eval", {{"epsilons", c.epsilons}, {"power_budget_hz", c.budget_hz}}},
          {"scaling", scaling},
          {"paths",
           {{"dataset", c.dataset.string()}, {"checkpoint", c.checkpoint.string()},
            {"report_dir", c.report_dir.string()}}}};
}

/// Missing sections keep defaults. The train seed follows the global seed
/// unless the train section sets its own.
inline RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.train.seed = c.seed;
    if (j.contains("chain")) {
      const auto& ch = j["chain"];
      c.n_ions = ch.value("n", c.n_ions);
      c.f_low_hz = ch.value("f_low_hz", c.f_low_hz);
      c.f_high_hz = ch.value("f_high_hz", c.f_high_hz);
      if (ch.contains("f_x_hz")) c.f_x_hz = ch["f_x_hz"].get<double>();
      if (ch.contains("f_z_hz")) c.f_z_hz = ch["f_z_hz"].get<double>();
    }
    if (j.contains("train")) c.train = train_config_from_json(j["train"], c.train);
    if (j.contains("targets"))
      for (const auto& t : j["targets"]) c.targets.push_back(lattice_from_json(t));
    if (j.contains("eval")) {
      c.epsilons = j["eval"].value("epsilons", c.epsilons);
      c.budget_hz = j["eval"].value("power_budget_hz", c.budget_hz);
    }
    if (j.contains("scaling")) {
      const auto& s = j["scaling"];
      c.scaling_n = s.value("n_values", c.scaling_n);
      if (s.contains("kinds")) {
        c.scaling_kinds.clear();
        for (const auto& k : s["kinds"]) c.scaling_kinds.push_back(lattice_kind_from_string(k.get<std::string>()));
      }
      if (s.contains("epochs")) c.scaling_epochs = s["epochs"].get<int>();
    }
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      c.dataset = p.value("dataset", std::string{});
      c.checkpoint = p.value("checkpoint", std::string{});
      c.report_dir = p.value("report_dir", c.report_dir.string());
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("run config: ") + e.what());
  }
  return c;
}

/// Hash of the effective configuration with paths removed, so moving output
/// directories does not change provenance.
inline std::string run_config_hash(const RunConfig& c) {
  json j = run_config_to_json(c);
  j.erase("paths");
  return hex64(config_hash(j));
}

inline json provenance(const RunConfig& c, const ChainModel& chain, std::string_view schema) {
  return {{"schema", schema},
          {"seed", c.seed},
          {"config_hash", run_config_hash(c)},
          {"chain_fingerprint", hex64(chain_fingerprint(chain))}};
}

// ---------------------------------------------------------------- commands

struct ChainArtifacts {
  ChainModel chain;
  Eigen::VectorXd beat_notes;  // empty for N = 1
  json document;
};

inline ChainArtifacts cmd_chain(const RunConfig& c, std::ostream& log,
                                const std::optional<std::filesystem::path>& out = std::nullopt) {
  ChainArtifacts a{build_chain(c.trap()), {}, {}};
  if (a.chain.size() >= 2) a.beat_notes = compute_beat_notes(a.chain.mode_freqs);
  a.document = chain_to_json(a.chain, a.beat_notes.size() ? &a.beat_notes : nullptr);
  a.document["seed"] = c.seed;
  a.document["config_hash"] = run_config_hash(c);
  write_json(out.value_or(c.report_dir / "chain.json"), a.document);

  log << "N=" << a.chain.size() << "  f_x=" << a.chain.trap.omega_x / kTwoPi / 1e6
      << " MHz  f_z=" << a.chain.trap.omega_z / kTwoPi / 1e6 << " MHz\n";
  log << " mode   f_mode/MHz   f_beat/MHz\n";
  for (int m = 0; m < a.chain.size(); ++m) {
    log << std::setw(5) << m + 1 << std::fixed << std::setprecision(6) << std::setw(13)
        << a.chain.mode_freqs[m] / kTwoPi / 1e6;
    if (a.beat_notes.size()) log << std::setw(13) << a.beat_notes[m] / kTwoPi / 1e6;
    log << "\n";
  }
  log.unsetf(std::ios::fixed);
  return a;
}

inline Dataset cmd_gen_data(const RunConfig& c, std::ostream& log) {
  const ChainModel chain = build_chain(c.trap());
  const RamanSetup setup(chain);
  const int count = c.train.train_size + c.train.val_size;
  Dataset d = generate_dataset(setup, count, c.seed, chain_fingerprint(chain));
  json meta = provenance(c, chain, "dataset/1");
  meta["trap"] = trap_to_json(chain.trap);
  meta["train_size"] = c.train.train_size;
  meta["val_size"] = c.train.val_size;
  write_dataset(c.dataset_path(), d, meta);
  log << "wrote " << count << " samples (N=" << chain.size() << ") to " << c.dataset_path().string() << "\n";
  return d;
}

/// Rebuilds the chain recorded in an artifact trailer and checks its fingerprint.
inline ChainModel chain_from_meta(const json& meta, const std::string& what) {
  if (!meta.contains("trap")) throw SchemaError(what + ": trailer has no trap section");
  const ChainModel chain = build_chain(trap_from_json(meta["trap"]));
  if (meta.contains("chain_fingerprint") &&
      parse_hex64(meta["chain_fingerprint"].get<std::string>()) != chain_fingerprint(chain))
    throw SchemaError(what + ": chain fingerprint mismatch (different platform or corrupted trailer)");
  return chain;
}

struct TrainArtifacts {
  TrainResult result;
  ChainModel chain;
};

inline TrainArtifacts cmd_train(const RunConfig& c, std::ostream& log) {
  const ChainModel chain = build_chain(c.trap());
  const RamanSetup setup(chain);
  Dataset data;
  if (std::filesystem::exists(c.dataset_path())) {
    DatasetFile f = read_dataset(c.dataset_path());
    if (f.data.n_ions != chain.size()) throw SchemaError("dataset N does not match the configured chain");
    if (f.data.chain_fingerprint != chain_fingerprint(chain))
      throw SchemaError("dataset was generated for a different chain (fingerprint mismatch)");
    data = std::move(f.data);
    log << "loaded dataset " << c.dataset_path().string() << "\n";
  } else {
    data = generate_dataset(setup, c.train.train_size + c.train.val_size, c.seed, chain_fingerprint(chain));
    log << "generated " << data.count() << " samples in memory\n";
  }

  TrainResult r = train(setup, data, c.train, [&log](const EpochRecord& e) {
    log << "epoch " << std::setw(4) << e.epoch << "  lr " << std::setprecision(4) << e.lr << "  cost "
        << std::setprecision(6) << e.train_cost << "  val F " << std::setprecision(8) << e.val_similarity << "  "
        << std::setprecision(3) << e.seconds << " s\n"
        << std::flush;
  });

  json meta = provenance(c, chain, "ionnet/1");
  meta["trap"] = trap_to_json(chain.trap);
  meta["train_config"] = train_config_to_json(c.train);
  meta["init"] = kInitDescriptor;
  const double final_val = r.history.empty() ? r.best_val_similarity : r.history.back().val_similarity;
  meta["metrics"] = {{"best_epoch", r.best_epoch},
                     {"best_val_similarity", r.best_val_similarity},
                     {"final_val_similarity", final_val},
                     {"final_train_cost", r.history.empty() ? 0.0 : r.history.back().train_cost}};
  json best = meta;
  best["params"] = "best_validation";
  json last = meta;
  last["params"] = "final_epoch";
  write_checkpoint(c.checkpoint_path(), {r.best_params, best});
  write_checkpoint(c.checkpoint_path().string() + ".final", {r.final_params, last});
  write_text(c.report_dir / "history.csv", history_to_csv(r.history, provenance(c, chain, "history/1")));
  log << "best val F " << std::setprecision(8) << r.best_val_similarity << " at epoch " << r.best_epoch
      << "; checkpoint " << c.checkpoint_path().string() << "\n";
  return {std::move(r), chain};
}

struct LoadedModel {
  Checkpoint checkpoint;
  ChainModel chain;
};

inline LoadedModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint '" + path.string() + "' not found");
  Checkpoint ck = read_checkpoint(path);
  ChainModel chain = chain_from_meta(ck.meta, "checkpoint");
  if (chain.size() != ck.params.n_ions()) throw SchemaError("checkpoint: network N does not match its chain");
  return {std::move(ck), std::move(chain)};
}

struct InferResult {
  ControlMatrix control;
  InteractionGraph target;
  double similarity = 0.0;
  bool renormalized = false;
};

/// Target from a lattice spec, or from a graph/1 JSON file when `graph_file` is set.
inline InferResult cmd_infer(const RunConfig& c, const std::optional<LatticeSpec>& spec,
                             const std::optional<std::filesystem::path>& graph_file, std::ostream& log) {
  const LoadedModel m = load_model(c.checkpoint_path());
  const RamanSetup setup(m.chain);
  InferResult r;
  if (graph_file) {
    r.target = graph_from_json(read_json(*graph_file));
  } else if (spec) {
    r.target = build_target(*spec);
  } else {
    throw ShapeError("infer: need a target (--target or --graph)");
  }
  if (!r.target.normalized || std::abs(r.target.couplings.norm() - 1.0) > kUnitNormTol) {
    log << "warning: target graph is not unit-norm; normalizing\n";
    r.target = normalize(InteractionGraph{r.target.n, r.target.couplings, false}).graph;
    r.renormalized = true;
  }
  r.control = infer(m.checkpoint.params, r.target);
  r.similarity = similarity(normalize(coupling_matrix(r.control, setup)).graph, r.target);

  json doc = provenance(c, m.chain, "omega/1");
  doc["chain_fingerprint"] = hex64(chain_fingerprint(m.chain));
  doc["control"] = control_to_json(r.control);
  doc["target"] = graph_to_json(r.target);
  doc["similarity"] = r.similarity;
  write_json(c.report_dir / "omega.json", doc);
  write_text(c.report_dir / "omega.csv", control_to_csv(r.control));
  log << "similarity F = " << std::setprecision(8) << r.similarity << "\n";
  return r;
}

struct EvalSummary {
  std::vector<EvalReport> reports;
  double mean_similarity = 0.0;
  double mean_xtalk_similarity_1pct = 0.0;  // NaN if 0.01 is not on the grid
};

inline EvalSummary cmd_eval(const RunConfig& c, std::ostream& log) {
  const LoadedModel m = load_model(c.checkpoint_path());
  const RamanSetup setup(m.chain);
  std::vector<LatticeSpec> targets = c.targets;
  if (targets.empty()) targets = list_supported(m.chain.size());

  EvalSummary s;
  json reports = json::array();
  int with_1pct = 0;
  for (const auto& spec : targets) {
    if (spec.n_ions != m.chain.size())
      throw ShapeError("eval: target " + spec.label() + " does not match the model's N=" + std::to_string(m.chain.size()));
    const InteractionGraph target = build_target(spec);
    const ControlMatrix control = infer(m.checkpoint.params, target);
    EvalReport r = evaluate(control, target, setup, c.epsilons, c.budget_hz * kTwoPi, spec.label());
    s.mean_similarity += r.similarity;
    for (const auto& p : r.crosstalk)
      if (std::abs(p.epsilon - 0.01) < 1e-12) {
        s.mean_xtalk_similarity_1pct += p.similarity;
        ++with_1pct;
      }
    log << std::left << std::setw(22) << spec.label() << std::right << " F=" << std::setprecision(8) << r.similarity
        << "  nbar=" << std::setprecision(3) << r.phonon_estimate << "  max ratio=" << r.max_adiabatic_ratio
        << "  |J|/2pi=" << r.physical_norm / kTwoPi << " Hz\n";
    reports.push_back(eval_report_to_json(r));
    s.reports.push_back(std::move(r));
  }
  s.mean_similarity /= static_cast<double>(targets.size());
  s.mean_xtalk_similarity_1pct =
      with_1pct ? s.mean_xtalk_similarity_1pct / with_1pct : std::numeric_limits<double>::quiet_NaN();

  json doc = provenance(c, m.chain, "eval/1");
  doc["checkpoint_params"] = m.checkpoint.meta.value("params", std::string("unknown"));
  doc["reports"] = reports;
  doc["mean_similarity"] = s.mean_similarity;
  if (with_1pct) doc["mean_crosstalk_similarity_eps_0.01"] = s.mean_xtalk_similarity_1pct;
  write_json(c.report_dir / "eval.json", doc);
  write_text(c.report_dir / "crosstalk.csv", crosstalk_to_csv(s.reports));

  std::ostringstream validity;
  validity << std::setprecision(12)
           << "target,similarity,power_budget_hz,physical_norm_hz,max_adiabatic_ratio,phonon_estimate\n";
  for (const auto& r : s.reports)
    validity << r.target << "," << r.similarity << "," << r.power_budget / kTwoPi << "," << r.physical_norm / kTwoPi
             << "," << r.max_adiabatic_ratio << "," << r.phonon_estimate << "\n";
  write_text(c.report_dir / "validity.csv", validity.str());
  log << "mean F " << std::setprecision(8) << s.mean_similarity << "\n";
  return s;
}

inline ScalingConfig scaling_config(const RunConfig& c) {
  ScalingConfig s;
  s.n_values = c.scaling_n;
  s.kinds = c.scaling_kinds;
  s.train = c.train;
  if (c.scaling_epochs) s.train.epochs = *c.scaling_epochs;
  s.f_low_hz = c.f_low_hz;
  s.f_high_hz = c.f_high_hz;
  s.budget = c.budget_hz * kTwoPi;
  s.dataset_seed = c.seed;
  return s;
}

inline json power_fit_to_json(const PowerFit& f) {
  json j = {{"powers", f.powers}, {"coeffs", json::array()}, {"r2", f.r2}};
  for (Eigen::Index k = 0; k < f.coeffs.size(); ++k) j["coeffs"].push_back(f.coeffs[k]);
  return j;
}

inline ScalingResult cmd_scaling(const RunConfig& c, std::ostream& log) {
  const ScalingConfig sc = scaling_config(c);
  ScalingResult r = scaling_study(sc, [&log](const ScalingRow& row) {
    log << "N=" << std::setw(3) << row.n_ions;
    if (!row.error.empty()) {
      log << "  failed: " << row.error << "\n" << std::flush;
      return;
    }
    for (const auto& [k, f] : row.similarity) log << "  " << to_string(k) << " F=" << std::setprecision(6) << f;
    log << "  epoch " << std::setprecision(3) << row.epoch_seconds << " s  |J|/2pi=" << row.linear_norm / kTwoPi
        << " Hz\n"
        << std::flush;
  });

  std::ostringstream head;
  head << "# schema=scaling/1\n# seed=" << c.seed << "\n# config_hash=" << run_config_hash(c) << "\n";
  write_text(c.report_dir / "scaling.csv", head.str() + scaling_to_csv(r, sc.kinds));
  json fits = {{"schema", "scaling-fits/1"}, {"seed", c.seed}, {"config_hash", run_config_hash(c)}};
  for (const auto& [k, f] : r.fits.infidelity) fits["infidelity"][to_string(k)] = power_fit_to_json(f);
  fits["epoch_seconds"] = power_fit_to_json(r.fits.epoch_time);
  fits["inverse_linear_norm"] = power_fit_to_json(r.fits.inverse_norm);
  fits["inverse_linear_norm_n2"] = power_fit_to_json(r.fits.inverse_norm_n2);
  write_json(c.report_dir / "scaling_fits.json", fits);
  return r;
}

}  // namespace ionforge
