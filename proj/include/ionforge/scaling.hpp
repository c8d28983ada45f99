#pragma once

// Size-scaling study: for each N, tune the trap, train a network, then record
// similarity per lattice kind, epoch wall time and the power-constrained
// interaction strength of the linear-chain target.

#include <chrono>
#include <functional>
#include <iomanip>
#include <optional>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "chain.hpp"
#include "evaluation.hpp"
#include "fingerprint.hpp"
#include "lattice.hpp"
#include "train.hpp"

namespace ionforge {

struct ScalingConfig {
  std::vector<int> n_values{8, 10, 12, 16, 20, 24};
  std::vector<LatticeKind> kinds{LatticeKind::linear, LatticeKind::square, LatticeKind::triangular,
                                 LatticeKind::kagome};
  TrainConfig train;  // applied at every N
  double f_low_hz = 1e6;
  double f_high_hz = 5e6;
  double budget = kDefaultPowerBudget;  // rad/s
  std::uint64_t dataset_seed = 0;
  int max_n = 64;
};

struct ScalingRow {
  int n_ions = 0;
  std::map<LatticeKind, double> similarity;  // NaN where the kind is unavailable at N
  double val_similarity = std::numeric_limits<double>::quiet_NaN();
  double epoch_seconds = std::numeric_limits<double>::quiet_NaN();  // mean over epochs
  double linear_norm = std::numeric_limits<double>::quiet_NaN();    // rad/s at the budget
  std::uint64_t chain_fingerprint = 0;
  std::string error;  // non-empty if this N failed
};

struct ScalingFits {
  std::map<LatticeKind, PowerFit> infidelity;  // 1 - F ~ quadratic in N
  PowerFit epoch_time;                         // quartic in N
  PowerFit inverse_norm;                       // 1/||J|| ~ quadratic in N
  PowerFit inverse_norm_n2;                    // 1/||J|| ~ a + c N^2
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  ScalingFits fits;
};

using ScalingProgress = std::function<void(const ScalingRow&)>;

inline ScalingRow scaling_point(int n, const ScalingConfig& cfg) {
  ScalingRow row;
  row.n_ions = n;
  try {
    if (n > cfg.max_n) throw ShapeError("N=" + std::to_string(n) + " exceeds cap " + std::to_string(cfg.max_n));
    const ChainModel chain = build_chain(tune_trap(n, cfg.f_low_hz, cfg.f_high_hz));
    row.chain_fingerprint = chain_fingerprint(chain);
    const RamanSetup setup(chain);
    const Dataset data = generate_dataset(setup, cfg.train.train_size + cfg.train.val_size, cfg.dataset_seed);
    const TrainResult tr = train(setup, data, cfg.train);
    row.val_similarity = tr.best_val_similarity;
    if (!tr.history.empty()) {
      double s = 0.0;
      for (const auto& h : tr.history) s += h.seconds;
      row.epoch_seconds = s / static_cast<double>(tr.history.size());
    }
    for (auto kind : cfg.kinds) {
      double f = std::numeric_limits<double>::quiet_NaN();
      try {
        const InteractionGraph target = build_target(default_spec(kind, n));
        const ControlMatrix c = infer(tr.best_params, target);
        f = similarity(normalize(coupling_matrix(c, setup)).graph, target);
        if (kind == LatticeKind::linear) row.linear_norm = rescale_to_power(c, setup, cfg.budget).physical_norm;
      } catch (const ShapeError&) {
      }
      row.similarity[kind] = f;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

namespace detail {

template <typename Get>
std::optional<PowerFit> fit_rows(const std::vector<ScalingRow>& rows, Get get, std::vector<int> powers) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    const double v = get(r);
    if (r.error.empty() && std::isfinite(v)) {
      x.push_back(r.n_ions);
      y.push_back(v);
    }
  }
  if (x.size() < powers.size()) return std::nullopt;
  return fit_powers(x, y, std::move(powers));
}

}  // namespace detail

inline ScalingFits scaling_fits(const std::vector<ScalingRow>& rows, const std::vector<LatticeKind>& kinds) {
  ScalingFits f;
  for (auto kind : kinds)
    if (auto fit = detail::fit_rows(
            rows, [kind](const ScalingRow& r) {
              auto it = r.similarity.find(kind);
              return it == r.similarity.end() ? std::numeric_limits<double>::quiet_NaN() : 1.0 - it->second;
            },
            {0, 1, 2}))
      f.infidelity[kind] = *fit;
  if (auto fit = detail::fit_rows(rows, [](const ScalingRow& r) { return r.epoch_seconds; }, {0, 1, 2, 3, 4}))
    f.epoch_time = *fit;
  auto inv = [](const ScalingRow& r) { return 1.0 / r.linear_norm; };
  if (auto fit = detail::fit_rows(rows, inv, {0, 1, 2})) f.inverse_norm = *fit;
  if (auto fit = detail::fit_rows(rows, inv, {0, 2})) f.inverse_norm_n2 = *fit;
  return f;
}

/// Runs every N in turn; a failure at one N is recorded in its row and the study continues.
inline ScalingResult scaling_study(const ScalingConfig& cfg, const ScalingProgress& progress = {}) {
  ScalingResult r;
  for (int n : cfg.n_values) {
    r.rows.push_back(scaling_point(n, cfg));
    if (progress) progress(r.rows.back());
  }
  r.fits = scaling_fits(r.rows, cfg.kinds);
  return r;
}

inline std::string scaling_to_csv(const ScalingResult& r, const std::vector<LatticeKind>& kinds) {
  std::ostringstream os;
  os << std::setprecision(12) << "n_ions,val_similarity";
  for (auto k : kinds) os << ",F_" << to_string(k);
  os << ",epoch_seconds,linear_norm_hz,inverse_linear_norm_s_per_rad,chain_fingerprint,error\n";
  for (const auto& row : r.rows) {
    os << row.n_ions << "," << row.val_similarity;
    for (auto k : kinds) {
      auto it = row.similarity.find(k);
      os << "," << (it == row.similarity.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
    }
    os << "," << row.epoch_seconds << "," << row.linear_norm / kTwoPi << "," << 1.0 / row.linear_norm << ","
       << hex64(row.chain_fingerprint) << "," << '"' << row.error << '"' << "\n";
  }
  return os.str();
}

}  // namespace ionforge
