#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "forward_model.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace ionforge {

struct TrainConfig {
  int train_size = 45000;
  int val_size = 5000;
  int epochs = 100;
  int batch_size = 64;
  double lr0 = 1e-3;
  double lr_decay = 0.9;
  int decay_every = 5;
  double dropout_rate = 0.05;
  int hidden_dim = 16384;
  std::uint64_t seed = 0;
  AdamConfig adam;

  void validate() const {
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ShapeError("TrainConfig: dropout_rate must be in [0, 1)");
    if (!(lr0 > 0.0)) throw ShapeError("TrainConfig: lr0 must be positive");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ShapeError("TrainConfig: lr_decay must be in (0, 1]");
    if (train_size < 1 || val_size < 1 || batch_size < 1 || hidden_dim < 1 || decay_every < 1 || epochs < 0)
      throw ShapeError("TrainConfig: sizes must be >= 1");
  }
};

/// lr for 0-based epoch e: lr0 * lr_decay^floor(e / decay_every).
inline double learning_rate(const TrainConfig& c, int epoch) {
  return c.lr0 * std::pow(c.lr_decay, static_cast<double>(epoch / c.decay_every));
}

/// Normalized upper-triangle targets, one per column.
struct Dataset {
  int n_ions = 0;
  Eigen::MatrixXd targets;  // pairs x count
  std::uint64_t seed = 0;
  std::uint64_t chain_fingerprint = 0;

  int count() const { return static_cast<int>(targets.cols()); }
};

/// Draws Omega entries i.i.d. U[-1, 1] (row-major, one derived stream per
/// sample), pushes them through the forward model and stores normalize(J).
inline Dataset generate_dataset(const RamanSetup& setup, int count, std::uint64_t seed,
                                std::uint64_t chain_fingerprint = 0) {
  if (count < 1) throw ShapeError("generate_dataset: count must be >= 1");
  const int n = setup.size();
  Dataset d{n, Eigen::MatrixXd(pair_count(n), count), seed, chain_fingerprint};
  parallel_for(count, [&](long begin, long end) {
    ControlMatrix c{Eigen::MatrixXd(n, n), 1.0};
    for (long s = begin; s < end; ++s) {
      Engine g(derive_seed(seed, streams::dataset, static_cast<std::uint64_t>(s)));
      for (int attempt = 0;; ++attempt) {
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k) c.omega(i, k) = uniform(g, -1.0, 1.0);
        const InteractionGraph j = coupling_matrix(c, setup);
        const double norm = j.couplings.norm();
        if (norm > 0.0 && std::isfinite(norm)) {
          d.targets.col(s) = j.couplings / norm;
          break;
        }
        if (attempt > 1000) throw DegenerateError("generate_dataset: could not draw a nonzero graph");
      }
    }
  });
  return d;
}

/// Normalized generated graphs for a batch of inputs, dropout off. Columns whose
/// generated graph is all-zero are left at zero.
inline Eigen::MatrixXd reconstruct_batch(const NetworkParams& p, const Eigen::Ref<const Eigen::MatrixXd>& x,
                                         const RamanSetup& setup) {
  const int n = setup.size();
  const Eigen::MatrixXd y = forward_batch(p, x);
  Eigen::MatrixXd out(pair_count(n), x.cols());
  parallel_for(x.cols(), [&](long begin, long end) {
    Eigen::VectorXd j(pair_count(n));
    for (long b = begin; b < end; ++b) {
      detail::couplings_into(Eigen::Map<const RowMajorMatrix>(y.col(b).data(), n, n), setup, j);
      const double norm = j.norm();
      out.col(b) = norm > 0.0 ? Eigen::VectorXd(j / norm) : Eigen::VectorXd::Zero(j.size());
    }
  });
  return out;
}

struct ValidationScore {
  double similarity = 0.0;  // mean over samples
  double mse = 0.0;         // same normalization as the training cost
};

inline ValidationScore validate(const NetworkParams& p, const Eigen::Ref<const Eigen::MatrixXd>& x,
                                const RamanSetup& setup, int chunk = 1024) {
  ValidationScore s;
  const Eigen::Index count = x.cols();
  for (Eigen::Index b = 0; b < count; b += chunk) {
    const Eigen::Index len = std::min<Eigen::Index>(chunk, count - b);
    const auto xs = x.middleCols(b, len);
    const Eigen::MatrixXd rec = reconstruct_batch(p, xs, setup);
    s.similarity += rec.cwiseProduct(xs).sum();
    s.mse += (rec - xs).squaredNorm() / static_cast<double>(x.rows());
  }
  s.similarity /= static_cast<double>(count);
  s.mse /= static_cast<double>(count);
  return s;
}

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_cost = 0.0;
  double val_similarity = 0.0;
  double val_mse = 0.0;
  double seconds = 0.0;
  int degenerate = 0;
};

struct TrainResult {
  NetworkParams final_params;
  NetworkParams best_params;
  int best_epoch = -1;  // -1: initialization
  double best_val_similarity = 0.0;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch ADAM on the reconstruction loss. The first train_size columns of
/// the dataset are the training split, the next val_size the validation split.
inline TrainResult train(const RamanSetup& setup, const Dataset& data, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (data.n_ions != setup.size()) throw ShapeError("train: dataset N does not match the chain");
  if (data.count() != cfg.train_size + cfg.val_size)
    throw ShapeError("train: dataset holds " + std::to_string(data.count()) + " samples, config expects " +
                     std::to_string(cfg.train_size + cfg.val_size));
  const auto xtrain = data.targets.leftCols(cfg.train_size);
  const auto xval = data.targets.middleCols(cfg.train_size, cfg.val_size);

  TrainResult r;
  r.final_params = init_params(setup.size(), cfg.hidden_dim, cfg.seed);
  r.best_params = r.final_params;
  if (cfg.epochs == 0) return r;
  r.best_val_similarity = validate(r.final_params, xval, setup).similarity;

  AdamState adam = AdamState::like(r.final_params);
  std::vector<int> order(static_cast<std::size_t>(cfg.train_size));
  std::iota(order.begin(), order.end(), 0);
  Engine shuffler(derive_seed(cfg.seed, streams::shuffle));
  Eigen::MatrixXd batch(xtrain.rows(), cfg.batch_size);
  std::uint64_t step = 0;

  for (int e = 0; e < cfg.epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = learning_rate(cfg, e);
    // Fisher-Yates with explicit draws; std::shuffle's algorithm is unspecified.
    for (std::size_t k = order.size(); k > 1; --k)
      std::swap(order[k - 1], order[static_cast<std::size_t>(shuffler() % k)]);

    double cost_sum = 0.0;
    int degenerate = 0;
    for (int start = 0; start < cfg.train_size; start += cfg.batch_size) {
      const int len = std::min(cfg.batch_size, cfg.train_size - start);
      batch.resize(xtrain.rows(), len);
      for (int k = 0; k < len; ++k) batch.col(k) = xtrain.col(order[static_cast<std::size_t>(start + k)]);
      const Eigen::MatrixXd mask = dropout_mask(cfg.hidden_dim, len, cfg.dropout_rate,
                                                derive_seed(cfg.seed, streams::dropout, step++));
      const bool use_mask = cfg.dropout_rate > 0.0;
      LossResult lr_res = loss_and_gradient(r.final_params, batch, setup, use_mask ? &mask : nullptr,
                                            cfg.dropout_rate);
      if (!std::isfinite(lr_res.cost) || !lr_res.grads.all_finite())
        throw DivergenceError("train: non-finite cost at epoch " + std::to_string(e) + ", batch starting " +
                              std::to_string(start));
      cost_sum += lr_res.cost * len;
      degenerate += lr_res.degenerate;
      adam_step(r.final_params, std::move(lr_res.grads), adam, lr, cfg.adam);
    }

    const ValidationScore v = validate(r.final_params, xval, setup);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EpochRecord rec{e, lr, cost_sum / cfg.train_size, v.similarity, v.mse, secs, degenerate};
    r.history.push_back(rec);
    if (v.similarity > r.best_val_similarity) {
      r.best_val_similarity = v.similarity;
      r.best_params = r.final_params;
      r.best_epoch = e;
    }
    if (on_epoch) on_epoch(rec);
  }
  return r;
}

/// Dropout-off forward pass. Non-normalized targets are normalized first.
inline ControlMatrix infer(const NetworkParams& p, const InteractionGraph& target) {
  if (target.couplings.size() != p.input_dim())
    throw ShapeError("infer: target has N=" + std::to_string(target.n) + ", network was trained for N=" +
                     std::to_string(p.n_ions()));
  if (target.normalized) return forward_pass(p, target.couplings);
  return forward_pass(p, normalize(target).graph.couplings);
}

}  // namespace ionforge
