#pragma once

// Forward map from Rabi frequencies to the spin-spin interaction graph,
// beat-note placement, normalization and derivatives of the map.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "chain.hpp"
#include "error.hpp"

namespace ionforge {

inline constexpr int pair_count(int n) { return n * (n - 1) / 2; }

/// Row-major upper-triangle index of (i, j), i < j.
inline constexpr int pair_index(int i, int j, int n) { return i * n - i * (i + 1) / 2 + (j - i - 1); }

/// (i, j) for every upper-triangle slot, in storage order.
inline std::vector<std::pair<int, int>> pair_list(int n) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(pair_count(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

/// Integer N with N(N-1)/2 == pairs, or -1.
inline int ions_from_pairs(Eigen::Index pairs) {
  const int n = static_cast<int>(std::lround(0.5 + std::sqrt(0.25 + 2.0 * static_cast<double>(pairs))));
  return pair_count(n) == pairs ? n : -1;
}

struct ControlMatrix {
  Eigen::MatrixXd omega;  // (ion i, beat-note n), dimensionless
  double scale = 1.0;     // rad/s per unit of omega

  int size() const { return static_cast<int>(omega.rows()); }
};

struct InteractionGraph {
  int n = 0;
  Eigen::VectorXd couplings;  // upper triangle, row-major; rad/s unless normalized
  bool normalized = false;

  /// Symmetric N x N matrix with zero diagonal.
  Eigen::MatrixXd full() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    int p = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j, ++p) m(i, j) = m(j, i) = couplings[p];
    return m;
  }
};

/// mu_1 = w_1 + 0.1 * mean gap; mu_n = w_n + 0.1 (w_{n-1} - w_n) for n >= 2.
inline Eigen::VectorXd compute_beat_notes(const Eigen::VectorXd& mode_freqs) {
  const Eigen::Index n = mode_freqs.size();
  if (n < 2) throw ShapeError("compute_beat_notes: need at least two modes for a mean gap");
  for (Eigen::Index k = 1; k < n; ++k)
    if (!(mode_freqs[k - 1] > mode_freqs[k]))
      throw ShapeError("compute_beat_notes: mode frequencies must be strictly descending");
  const double mean_gap = (mode_freqs[0] - mode_freqs[n - 1]) / static_cast<double>(n - 1);
  Eigen::VectorXd mu(n);
  mu[0] = mode_freqs[0] + 0.1 * mean_gap;
  for (Eigen::Index k = 1; k < n; ++k)
    mu[k] = mode_freqs[k] + 0.1 * (mode_freqs[k - 1] - mode_freqs[k]);
  return mu;
}

/// Chain plus fixed beat-notes, with the coupling kernel
///   F[n][i][j] = sum_m eta(i,m) eta(j,m) w_m / (mu_n^2 - w_m^2)
/// precomputed. Immutable after construction.
class RamanSetup {
 public:
  RamanSetup(const ChainModel& chain, Eigen::VectorXd beat_notes)
      : n_(chain.size()),
        beat_notes_(std::move(beat_notes)),
        mode_freqs_(chain.mode_freqs),
        lamb_dicke_(chain.lamb_dicke) {
    if (beat_notes_.size() != n_) throw ShapeError("RamanSetup: beat-note count != N");
    for (Eigen::Index k = 0; k < n_; ++k)
      for (Eigen::Index m = 0; m < n_; ++m)
        if (beat_notes_[k] == mode_freqs_[m])
          throw ShapeError("RamanSetup: beat-note exactly resonant with a mode");

    const std::size_t nn = static_cast<std::size_t>(n_);
    kernel_.assign(nn * nn * nn, 0.0);
    Eigen::MatrixXd w(n_, n_);  // w(n, m) = w_m / (mu_n^2 - w_m^2)
    for (int k = 0; k < n_; ++k)
      for (int m = 0; m < n_; ++m)
        w(k, m) = mode_freqs_[m] / (beat_notes_[k] * beat_notes_[k] - mode_freqs_[m] * mode_freqs_[m]);
    for (int k = 0; k < n_; ++k) {
      const Eigen::MatrixXd fk = lamb_dicke_ * w.row(k).asDiagonal() * lamb_dicke_.transpose();
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) kernel_[(k * nn + i) * nn + j] = fk(i, j);
    }
    // The symmetric product above can differ in the last bit between (i,j) and (j,i).
    for (int k = 0; k < n_; ++k)
      for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
          kernel_[(k * nn + j) * nn + i] = kernel_[(k * nn + i) * nn + j];

    pair_kernel_.resize(pair_count(n_), n_);
    int p = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j, ++p)
        for (int k = 0; k < n_; ++k) pair_kernel_(p, k) = kernel(k, i, j);
  }

  /// Setup with beat-notes placed by compute_beat_notes.
  explicit RamanSetup(const ChainModel& chain) : RamanSetup(chain, compute_beat_notes(chain.mode_freqs)) {}

  int size() const { return n_; }
  const Eigen::VectorXd& beat_notes() const { return beat_notes_; }
  const Eigen::VectorXd& mode_freqs() const { return mode_freqs_; }
  const Eigen::MatrixXd& lamb_dicke() const { return lamb_dicke_; }

  double kernel(int n, int i, int j) const {
    const std::size_t nn = static_cast<std::size_t>(n_);
    return kernel_[(static_cast<std::size_t>(n) * nn + static_cast<std::size_t>(i)) * nn +
                   static_cast<std::size_t>(j)];
  }
  /// Row p (pair index) holds F[.][i][j] over beat-notes.
  const Eigen::MatrixXd& pair_kernel() const { return pair_kernel_; }

 private:
  int n_;
  Eigen::VectorXd beat_notes_;
  Eigen::VectorXd mode_freqs_;
  Eigen::MatrixXd lamb_dicke_;
  std::vector<double> kernel_;  // [n][i][j]
  Eigen::MatrixXd pair_kernel_;
};

namespace detail {

inline void check_control(const ControlMatrix& c, const RamanSetup& s) {
  if (c.omega.rows() != s.size() || c.omega.cols() != s.size())
    throw ShapeError("control matrix must be N x N with N = " + std::to_string(s.size()));
}

/// Raw couplings for a dimensionless omega (no scale), written into out.
template <typename Omega, typename Out>
void couplings_into(const Omega& omega, const RamanSetup& s, Out&& out) {
  const int n = s.size();
  const Eigen::MatrixXd& k = s.pair_kernel();
  int p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++p) {
      double acc = 0.0;
      for (int b = 0; b < n; ++b) acc += omega(i, b) * omega(j, b) * k(p, b);
      out[p] = acc;
    }
}

}  // namespace detail

/// J_ij = scale^2 sum_n Omega(i,n) Omega(j,n) F[n][i][j], upper triangle only.
inline InteractionGraph coupling_matrix(const ControlMatrix& control, const RamanSetup& setup) {
  detail::check_control(control, setup);
  InteractionGraph g{setup.size(), Eigen::VectorXd(pair_count(setup.size())), false};
  detail::couplings_into(control.omega, setup, g.couplings);
  g.couplings *= control.scale * control.scale;
  return g;
}

struct NormalizedGraph {
  InteractionGraph graph;
  double norm = 0.0;  // Euclidean norm of the input couplings
};

inline NormalizedGraph normalize(const InteractionGraph& graph) {
  const double norm = graph.couplings.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw DegenerateError("normalize: interaction graph has zero or non-finite norm");
  return {InteractionGraph{graph.n, graph.couplings / norm, true}, norm};
}

/// dJ_ij / dOmega(k,n), rows in pair order, columns k*N + n (row-major Omega).
inline Eigen::MatrixXd coupling_jacobian(const ControlMatrix& control, const RamanSetup& setup) {
  detail::check_control(control, setup);
  const int n = setup.size();
  const double s2 = control.scale * control.scale;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(pair_count(n), n * n);
  const Eigen::MatrixXd& k = setup.pair_kernel();
  int p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++p)
      for (int b = 0; b < n; ++b) {
        jac(p, i * n + b) += s2 * control.omega(j, b) * k(p, b);
        jac(p, j * n + b) += s2 * control.omega(i, b) * k(p, b);
      }
  return jac;
}

/// Vector-Jacobian product: returns G with G(k,n) = sum_p g_p dJ_p/dOmega(k,n),
/// i.e. coupling_jacobian^T g reshaped row-major. O(N^3) instead of O(N^4).
template <typename Omega, typename Grad>
Eigen::MatrixXd coupling_vjp(const Omega& omega, const RamanSetup& setup, const Grad& g,
                             double scale = 1.0) {
  const int n = setup.size();
  const double s2 = scale * scale;
  const Eigen::MatrixXd& k = setup.pair_kernel();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  int p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++p) {
      const double gp = s2 * g[p];
      if (gp == 0.0) continue;
      for (int b = 0; b < n; ++b) {
        const double kb = gp * k(p, b);
        out(i, b) += kb * omega(j, b);
        out(j, b) += kb * omega(i, b);
      }
    }
  return out;
}

}  // namespace ionforge
