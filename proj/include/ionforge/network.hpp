#pragma once

// Two-layer inverse network (graph -> Rabi frequencies), the physics-in-the-loop
// reconstruction loss with exact backpropagation, and the ADAM update.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "error.hpp"
#include "forward_model.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace ionforge {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct NetworkParams {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // output x hidden
  Eigen::VectorXd b2;

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int output_dim() const { return static_cast<int>(w2.rows()); }
  int n_ions() const { return static_cast<int>(std::lround(std::sqrt(static_cast<double>(output_dim())))); }

  static NetworkParams zeros(int n_ions, int hidden) {
    const int in = pair_count(n_ions), out = n_ions * n_ions;
    return {Eigen::MatrixXd::Zero(hidden, in), Eigen::VectorXd::Zero(hidden), Eigen::MatrixXd::Zero(out, hidden),
            Eigen::VectorXd::Zero(out)};
  }

  NetworkParams zeros_like() const {
    return {Eigen::MatrixXd::Zero(w1.rows(), w1.cols()), Eigen::VectorXd::Zero(b1.size()),
            Eigen::MatrixXd::Zero(w2.rows(), w2.cols()), Eigen::VectorXd::Zero(b2.size())};
  }

  /// Applies fn(Eigen::Ref<MatrixXd>&, ...) to corresponding tensors of this and others.
  template <typename Fn, typename... Others>
  void zip(Fn&& fn, Others&... others) {
    fn(w1, others.w1...);
    fn(b1, others.b1...);
    fn(w2, others.w2...);
    fn(b2, others.b2...);
  }

  bool all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
  }

  void validate() const {
    const int n = n_ions();
    if (n * n != output_dim() || input_dim() != pair_count(n) || b1.size() != w1.rows() ||
        w2.cols() != w1.rows() || b2.size() != w2.rows())
      throw ShapeError("NetworkParams: inconsistent dimensions");
  }
};

inline constexpr const char* kInitDescriptor =
    "hidden: he-uniform U(+-sqrt(6/fan_in)), zero bias; output: U(+-0.1*sqrt(3*fan_in/hidden)), zero bias";

/// Hidden layer: He-uniform for rectified units. Output layer: uniform with a
/// bound that gives outputs of RMS ~0.1 for unit-norm inputs.
inline NetworkParams init_params(int n_ions, int hidden, std::uint64_t seed) {
  NetworkParams p = NetworkParams::zeros(n_ions, hidden);
  Engine g(derive_seed(seed, streams::init));
  const double fan_in = p.input_dim();
  const double a1 = std::sqrt(6.0 / fan_in);
  const double a2 = 0.1 * std::sqrt(3.0 * fan_in / hidden);
  // Fill row-major so the draw order matches the checkpoint layout.
  for (Eigen::Index r = 0; r < p.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < p.w1.cols(); ++c) p.w1(r, c) = uniform(g, -a1, a1);
  for (Eigen::Index r = 0; r < p.w2.rows(); ++r)
    for (Eigen::Index c = 0; c < p.w2.cols(); ++c) p.w2(r, c) = uniform(g, -a2, a2);
  return p;
}

/// Bernoulli(keep = 1 - rate) mask of shape hidden x batch.
inline Eigen::MatrixXd dropout_mask(int hidden, int batch, double rate, std::uint64_t seed) {
  Engine g(seed);
  Eigen::MatrixXd m(hidden, batch);
  for (Eigen::Index b = 0; b < m.cols(); ++b)
    for (Eigen::Index h = 0; h < m.rows(); ++h) m(h, b) = uniform01(g) < 1.0 - rate ? 1.0 : 0.0;
  return m;
}

/// Network outputs (N^2 x batch, each column a row-major Omega) for a batch of inputs.
/// With a mask the hidden activations are masked and scaled by 1/(1 - rate).
inline Eigen::MatrixXd forward_batch(const NetworkParams& p, const Eigen::Ref<const Eigen::MatrixXd>& x,
                                     const Eigen::MatrixXd* mask = nullptr, double rate = 0.0) {
  if (x.rows() != p.input_dim())
    throw ShapeError("forward: input has " + std::to_string(x.rows()) + " entries, network expects " +
                     std::to_string(p.input_dim()));
  Eigen::MatrixXd h = ((p.w1 * x).colwise() + p.b1).cwiseMax(0.0);
  if (mask) h = h.cwiseProduct(*mask) / (1.0 - rate);
  return (p.w2 * h).colwise() + p.b2;
}

/// Omega for one target. `mask` (hidden-length 0/1 vector) enables training-mode dropout.
inline ControlMatrix forward_pass(const NetworkParams& p, const Eigen::VectorXd& target,
                                  const Eigen::VectorXd* mask = nullptr, double rate = 0.0) {
  std::optional<Eigen::MatrixXd> m;
  if (mask) m = Eigen::MatrixXd(*mask);
  const Eigen::VectorXd y = forward_batch(p, target, m ? &*m : nullptr, rate);
  const int n = p.n_ions();
  return {Eigen::Map<const RowMajorMatrix>(y.data(), n, n), 1.0};
}

struct LossResult {
  double cost = 0.0;
  NetworkParams grads;
  int degenerate = 0;  // elements whose generated graph hit the norm floor
};

inline constexpr double kNormFloor = std::numeric_limits<double>::epsilon();

/// Mean over the batch of (2/(N(N-1))) * sum_{i<j} (normalize(J(Omega)) - target)^2
/// and its exact gradient with respect to every network parameter.
/// targets: P x batch. mask: hidden x batch (0/1) or null for no dropout.
inline LossResult loss_and_gradient(const NetworkParams& p, const Eigen::Ref<const Eigen::MatrixXd>& targets,
                                    const RamanSetup& setup, const Eigen::MatrixXd* mask = nullptr,
                                    double rate = 0.0) {
  const int n = setup.size();
  const int pairs = pair_count(n);
  const Eigen::Index batch = targets.cols();
  if (batch < 1) throw ShapeError("loss_and_gradient: empty batch");
  if (targets.rows() != pairs || p.n_ions() != n) throw ShapeError("loss_and_gradient: dimension mismatch");
  if (mask && (mask->rows() != p.hidden_dim() || mask->cols() != batch))
    throw ShapeError("loss_and_gradient: mask shape mismatch");

  const Eigen::MatrixXd z1 = (p.w1 * targets).colwise() + p.b1;
  Eigen::MatrixXd h = z1.cwiseMax(0.0);
  const double keep_scale = mask ? 1.0 / (1.0 - rate) : 1.0;
  if (mask) h = h.cwiseProduct(*mask) * keep_scale;
  const Eigen::MatrixXd y = (p.w2 * h).colwise() + p.b2;

  Eigen::MatrixXd dy(y.rows(), batch);
  Eigen::VectorXd costs(batch);
  Eigen::VectorXi flagged = Eigen::VectorXi::Zero(batch);
  const double d_scale = 2.0 / (static_cast<double>(batch) * pairs);

  parallel_for(batch, [&](long begin, long end) {
    Eigen::VectorXd j(pairs);
    for (long b = begin; b < end; ++b) {
      const Eigen::Map<const RowMajorMatrix> omega(y.col(b).data(), n, n);
      detail::couplings_into(omega, setup, j);
      double norm = j.norm();
      const bool guarded = !(norm >= kNormFloor);
      if (guarded) {
        norm = kNormFloor;
        flagged[b] = 1;
      }
      const Eigen::VectorXd jhat = j / norm;
      const Eigen::VectorXd diff = jhat - targets.col(b);
      costs[b] = diff.squaredNorm() / pairs;

      const Eigen::VectorXd g_hat = d_scale * diff;
      // d(v/|v|)/dv = (I - v^ v^T) / |v|
      const Eigen::VectorXd g_j = guarded ? Eigen::VectorXd(g_hat / norm)
                                          : Eigen::VectorXd((g_hat - jhat * jhat.dot(g_hat)) / norm);
      const Eigen::MatrixXd g_omega = coupling_vjp(omega, setup, g_j);
      Eigen::Map<RowMajorMatrix>(dy.col(b).data(), n, n) = g_omega;
    }
  });

  LossResult r;
  r.cost = costs.mean();
  r.degenerate = flagged.sum();
  r.grads.w2 = dy * h.transpose();
  r.grads.b2 = dy.rowwise().sum();
  Eigen::MatrixXd dh = p.w2.transpose() * dy;
  if (mask) dh = dh.cwiseProduct(*mask) * keep_scale;
  dh = dh.cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
  r.grads.w1 = dh * targets.transpose();
  r.grads.b1 = dh.rowwise().sum();
  return r;
}

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  NetworkParams m;
  NetworkParams v;
  long t = 0;

  static AdamState like(const NetworkParams& p) { return {p.zeros_like(), p.zeros_like(), 0}; }
};

/// Bias-corrected ADAM update, in place.
inline void adam_step(NetworkParams& params, NetworkParams grads, AdamState& state, double lr,
                      const AdamConfig& cfg = {}) {
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  params.zip(
      [&](auto& theta, auto& g, auto& m, auto& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.eps);
      },
      grads, state.m, state.v);
}

}  // namespace ionforge
