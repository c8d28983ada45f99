#pragma once

// Linear Coulomb crystal: equilibrium positions, transverse normal modes and
// the Lamb-Dicke coupling matrix of N ions in a harmonic trap.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"

namespace ionforge {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PhysicalConstants {
  double hbar = 1.054571817e-34;              // J s
  double ion_mass = 171.0 * 1.66053906660e-27;  // kg, 171Yb+
  double elementary_charge = 1.602176634e-19;   // C
  double coulomb_constant = 8.9875517923e9;     // N m^2 / C^2
  double raman_wavelength = 355e-9;             // m

  /// Wave-vector difference of counter-propagating Raman beams.
  double delta_k() const { return 2.0 * (kTwoPi / raman_wavelength); }
};

struct TrapConfig {
  int n_ions = 1;
  double omega_x = 0.0;  // rad/s, transverse
  double omega_z = 0.0;  // rad/s, axial

  void validate() const {
    if (n_ions < 1) throw ShapeError("TrapConfig: n_ions must be >= 1");
    if (!(omega_z > 0.0) || !(omega_x > omega_z))
      throw ShapeError("TrapConfig: require omega_x > omega_z > 0");
  }
};

struct ChainModel {
  TrapConfig trap;
  Eigen::VectorXd positions;  // dimensionless, ascending
  double length_scale = 0.0;  // m
  Eigen::VectorXd mode_freqs;   // rad/s, descending; [0] is the COM mode
  Eigen::MatrixXd mode_matrix;  // b(i, m): column m is mode m
  Eigen::MatrixXd lamb_dicke;   // eta(i, m)

  int size() const { return static_cast<int>(positions.size()); }
};

/// Gradient of V(u) = sum u_i^2/2 + sum_{i<j} 1/|u_i - u_j|.
inline Eigen::VectorXd coulomb_gradient(const Eigen::VectorXd& u) {
  const Eigen::Index n = u.size();
  Eigen::VectorXd g = u;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = u[i] - u[j];
      g[i] -= std::copysign(1.0, d) / (d * d);
    }
  return g;
}

inline double coulomb_potential(const Eigen::VectorXd& u) {
  double v = 0.5 * u.squaredNorm();
  for (Eigen::Index i = 0; i < u.size(); ++i)
    for (Eigen::Index j = i + 1; j < u.size(); ++j) v += 1.0 / std::abs(u[i] - u[j]);
  return v;
}

inline Eigen::MatrixXd coulomb_hessian(const Eigen::VectorXd& u) {
  const Eigen::Index n = u.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = 2.0 / std::pow(std::abs(u[i] - u[j]), 3);
      h(i, i) += c;
      h(i, j) -= c;
    }
  return h;
}

/// Equilibrium of the dimensionless chain by damped Newton iteration from a
/// uniformly spaced guess. Throws ConvergenceError if max |grad| stays above tol.
inline Eigen::VectorXd equilibrium_positions(int n_ions, double tol = 1e-12,
                                             int max_iter = 200) {
  if (n_ions < 1) throw ShapeError("equilibrium_positions: n_ions must be >= 1");
  const Eigen::Index n = n_ions;
  Eigen::VectorXd u(n);
  // Empirical central spacing of a long chain, good enough as a start point.
  const double spacing = 2.018 / std::pow(static_cast<double>(n), 0.559);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = (static_cast<double>(i) - 0.5 * (n - 1)) * spacing;
  if (n == 1) return u;

  auto ordered = [](const Eigen::VectorXd& x) {
    for (Eigen::Index i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) return false;
    return true;
  };

  double residual = coulomb_gradient(u).cwiseAbs().maxCoeff();
  for (int it = 0; it < max_iter && residual >= tol; ++it) {
    const Eigen::VectorXd g = coulomb_gradient(u);
    const Eigen::VectorXd step = coulomb_hessian(u).llt().solve(g);
    const double v0 = coulomb_potential(u);
    double t = 1.0;
    Eigen::VectorXd trial = u - step;
    // Backtrack until ions keep their order and the energy does not rise.
    // Near the minimum V is flat to rounding, so accept a full step whenever
    // the gradient shrinks.
    while (t > 1e-8) {
      trial = u - t * step;
      if (ordered(trial)) {
        const double r = coulomb_gradient(trial).cwiseAbs().maxCoeff();
        if (coulomb_potential(trial) <= v0 || r < residual) break;
      }
      t *= 0.5;
    }
    u = trial;
    // Restore exact mirror symmetry lost to rounding.
    for (Eigen::Index i = 0; i < n / 2; ++i) {
      const double a = 0.5 * (u[n - 1 - i] - u[i]);
      u[i] = -a;
      u[n - 1 - i] = a;
    }
    if (n % 2 == 1) u[n / 2] = 0.0;
    residual = coulomb_gradient(u).cwiseAbs().maxCoeff();
  }
  if (!(residual < tol))
    throw ConvergenceError("equilibrium_positions: Newton iteration did not converge for N=" +
                               std::to_string(n_ions),
                           residual);
  return u;
}

struct TransverseModes {
  Eigen::VectorXd freqs;   // rad/s, descending
  Eigen::MatrixXd vectors; // orthonormal columns matching freqs
};

/// Transverse normal modes of the chain. Each eigenvector is sign-fixed so
/// that its largest-magnitude component (first one on ties) is positive.
inline TransverseModes transverse_modes(const Eigen::VectorXd& positions, const TrapConfig& trap) {
  trap.validate();
  const Eigen::Index n = positions.size();
  if (n != trap.n_ions) throw ShapeError("transverse_modes: positions size != n_ions");
  const double ratio2 = (trap.omega_x / trap.omega_z) * (trap.omega_x / trap.omega_z);

  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = ratio2;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = 1.0 / std::pow(std::abs(positions[i] - positions[j]), 3);
      a(i, i) -= c;
      a(i, j) = c;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw InstabilityError("transverse_modes: eigensolver failed");
  // Eigen returns ascending eigenvalues; flip to descending frequency order.
  const Eigen::VectorXd lambda = eig.eigenvalues().reverse();
  if (lambda.minCoeff() <= 0.0)
    throw InstabilityError("transverse_modes: zigzag instability, omega_x/omega_z too small for N=" +
                           std::to_string(n));
  Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();

  for (Eigen::Index m = 0; m < n; ++m) {
    const double peak = vecs.col(m).cwiseAbs().maxCoeff();
    Eigen::Index k = 0;
    while (std::abs(vecs(k, m)) < peak - 1e-12) ++k;
    if (vecs(k, m) < 0.0) vecs.col(m) *= -1.0;
  }
  return {trap.omega_z * lambda.cwiseSqrt(), std::move(vecs)};
}

/// eta(i, m) = b(i, m) * dk * sqrt(hbar / (2 M omega_m)).
inline Eigen::MatrixXd lamb_dicke_matrix(const Eigen::MatrixXd& mode_matrix,
                                         const Eigen::VectorXd& mode_freqs,
                                         const PhysicalConstants& pc = {}) {
  if (mode_matrix.cols() != mode_freqs.size() || mode_matrix.rows() != mode_freqs.size())
    throw ShapeError("lamb_dicke_matrix: dimension mismatch");
  Eigen::MatrixXd eta = mode_matrix;
  for (Eigen::Index m = 0; m < mode_freqs.size(); ++m) {
    if (!(mode_freqs[m] > 0.0)) throw ShapeError("lamb_dicke_matrix: non-positive mode frequency");
    eta.col(m) *= pc.delta_k() * std::sqrt(pc.hbar / (2.0 * pc.ion_mass * mode_freqs[m]));
  }
  return eta;
}

inline ChainModel build_chain(const TrapConfig& trap, const PhysicalConstants& pc = {}) {
  trap.validate();
  ChainModel c;
  c.trap = trap;
  c.positions = equilibrium_positions(trap.n_ions);
  c.length_scale = std::cbrt(pc.elementary_charge * pc.elementary_charge * pc.coulomb_constant /
                             (pc.ion_mass * trap.omega_z * trap.omega_z));
  auto modes = transverse_modes(c.positions, trap);
  c.mode_freqs = std::move(modes.freqs);
  c.mode_matrix = std::move(modes.vectors);
  c.lamb_dicke = lamb_dicke_matrix(c.mode_matrix, c.mode_freqs, pc);
  return c;
}

/// Pins omega_x to 2*pi*f_high and bisects for the largest omega_z that keeps
/// the chain linear and the lowest transverse mode at or above 2*pi*f_low.
inline TrapConfig tune_trap(int n_ions, double f_low = 1e6, double f_high = 5e6,
                            double rel_tol = 1e-10) {
  if (n_ions < 1) throw ShapeError("tune_trap: n_ions must be >= 1");
  if (!(f_low > 0.0) || !(f_high > f_low)) throw ShapeError("tune_trap: require 0 < f_low < f_high");
  const double omega_x = kTwoPi * f_high;
  const double omega_low = kTwoPi * f_low;
  const Eigen::VectorXd u = equilibrium_positions(n_ions);

  auto feasible = [&](double omega_z) {
    try {
      const auto modes = transverse_modes(u, TrapConfig{n_ions, omega_x, omega_z});
      return modes.freqs[modes.freqs.size() - 1] >= omega_low;
    } catch (const InstabilityError&) {
      return false;
    }
  };

  double hi = omega_x * (1.0 - 1e-6);
  if (feasible(hi)) return {n_ions, omega_x, hi};
  double lo = hi;
  // Shrink until feasible; the axial frequency can always be lowered.
  for (int k = 0; k < 200 && !feasible(lo); ++k) lo *= 0.5;
  if (!feasible(lo)) throw InstabilityError("tune_trap: no feasible omega_z");
  while ((hi - lo) > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return {n_ions, omega_x, lo};
}

}  // namespace ionforge
