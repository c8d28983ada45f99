#pragma once

// Quality and viability measures for a control solution: similarity of
// normalized graphs, nearest-neighbour crosstalk, power-budget rescaling and
// adiabatic-elimination / phonon-excitation estimates.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"
#include "forward_model.hpp"

namespace ionforge {

inline constexpr double kUnitNormTol = 1e-9;

/// F = sum_{i<j} a_ij b_ij for unit-norm graphs.
inline double similarity(const InteractionGraph& a, const InteractionGraph& b) {
  if (a.n != b.n || a.couplings.size() != b.couplings.size())
    throw ShapeError("similarity: graphs have different N");
  for (const auto* g : {&a, &b})
    if (std::abs(g->couplings.norm() - 1.0) > kUnitNormTol)
      throw ShapeError("similarity: input graph is not unit-norm");
  return a.couplings.dot(b.couplings);
}

/// Omega'(i,n) = Omega(i,n) + eps (Omega(i-1,n) + Omega(i+1,n)); missing
/// neighbours at the chain ends are dropped.
inline ControlMatrix apply_crosstalk(const ControlMatrix& c, double epsilon) {
  if (!(epsilon >= 0.0)) throw ShapeError("apply_crosstalk: epsilon must be >= 0");
  ControlMatrix out = c;
  const Eigen::Index n = c.omega.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) out.omega.row(i) += epsilon * c.omega.row(i - 1);
    if (i + 1 < n) out.omega.row(i) += epsilon * c.omega.row(i + 1);
  }
  return out;
}

struct CrosstalkPoint {
  double epsilon = 0.0;
  double error = 0.0;       // ||J(xtalk) - J|| / ||J||
  double similarity = 1.0;  // F(normalize(J(xtalk)), normalize(J))
};

inline CrosstalkPoint crosstalk_error(const ControlMatrix& c, const RamanSetup& setup, double epsilon) {
  const InteractionGraph base = coupling_matrix(c, setup);
  const double base_norm = base.couplings.norm();
  if (!(base_norm > 0.0)) throw DegenerateError("crosstalk_error: baseline graph is zero");
  const InteractionGraph xt = coupling_matrix(apply_crosstalk(c, epsilon), setup);
  return {epsilon, (xt.couplings - base.couplings).norm() / base_norm,
          similarity(normalize(xt).graph, normalize(base).graph)};
}

inline std::vector<CrosstalkPoint> crosstalk_curve(const ControlMatrix& c, const RamanSetup& setup,
                                                   const std::vector<double>& epsilons) {
  std::vector<CrosstalkPoint> out;
  out.reserve(epsilons.size());
  for (double e : epsilons) out.push_back(crosstalk_error(c, setup, e));
  return out;
}

/// eps grid 0, step, ..., hi (inclusive).
inline std::vector<double> epsilon_grid(double hi = 0.05, int steps = 10) {
  std::vector<double> g;
  for (int k = 0; k <= steps; ++k) g.push_back(hi * k / steps);
  return g;
}

/// Least-squares y ~ sum_k c_k x^powers[k], with coefficient of determination.
struct PowerFit {
  std::vector<int> powers;
  Eigen::VectorXd coeffs;
  double r2 = 0.0;

  double operator()(double x) const {
    double y = 0.0;
    for (std::size_t k = 0; k < powers.size(); ++k) y += coeffs[static_cast<Eigen::Index>(k)] * std::pow(x, powers[k]);
    return y;
  }
};

inline PowerFit fit_powers(const std::vector<double>& x, const std::vector<double>& y, std::vector<int> powers) {
  if (x.size() != y.size() || x.size() < powers.size())
    throw ShapeError("fit_powers: need at least as many points as terms");
  const Eigen::Index m = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(m, static_cast<Eigen::Index>(powers.size()));
  Eigen::VectorXd b(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    b[r] = y[static_cast<std::size_t>(r)];
    for (std::size_t k = 0; k < powers.size(); ++k)
      a(r, static_cast<Eigen::Index>(k)) = std::pow(x[static_cast<std::size_t>(r)], powers[k]);
  }
  PowerFit f{std::move(powers), a.colPivHouseholderQr().solve(b), 0.0};
  const double ss_tot = (b.array() - b.mean()).square().sum();
  const double ss_res = (a * f.coeffs - b).squaredNorm();
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return f;
}

inline PowerFit polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  std::vector<int> p;
  for (int k = 0; k <= degree; ++k) p.push_back(k);
  return fit_powers(x, y, std::move(p));
}

struct PoweredControl {
  ControlMatrix control;        // same omega, physical scale set
  double physical_norm = 0.0;   // ||J||_2 in rad/s
};

inline constexpr double kDefaultPowerBudget = kTwoPi * 1e6;  // rad/s

/// scale = budget / sum |Omega|, so the total Rabi frequency equals the budget.
inline PoweredControl rescale_to_power(const ControlMatrix& c, const RamanSetup& setup,
                                       double budget = kDefaultPowerBudget) {
  if (!(budget > 0.0)) throw ShapeError("rescale_to_power: budget must be positive");
  const double total = c.omega.cwiseAbs().sum();
  if (!(total > 0.0)) throw DegenerateError("rescale_to_power: control matrix is zero");
  ControlMatrix out{c.omega, budget / total};
  const double norm = coupling_matrix(out, setup).couplings.norm();
  return {std::move(out), norm};
}

struct AdiabaticReport {
  double max_ratio = 0.0;        // max eta(i,m) |Omega(i,n)| scale / |mu_n - w_m|
  double phonon_estimate = 0.0;  // worst-mode sum of (eta Omega / (2 (mu - w)))^2
  int worst_mode = 0;
};

inline AdiabaticReport adiabatic_validity(const ControlMatrix& c, const RamanSetup& setup) {
  detail::check_control(c, setup);
  const int n = setup.size();
  const auto& eta = setup.lamb_dicke();
  const auto& mu = setup.beat_notes();
  const auto& w = setup.mode_freqs();
  AdiabaticReport r;
  r.phonon_estimate = 0.0;
  for (int m = 0; m < n; ++m) {
    double occupation = 0.0;
    for (int k = 0; k < n; ++k) {
      const double detuning = mu[k] - w[m];
      for (int i = 0; i < n; ++i) {
        const double coupling = std::abs(eta(i, m)) * c.scale * std::abs(c.omega(i, k));
        r.max_ratio = std::max(r.max_ratio, coupling / std::abs(detuning));
        const double amp = coupling / (2.0 * detuning);
        occupation += amp * amp;
      }
    }
    if (occupation > r.phonon_estimate) {
      r.phonon_estimate = occupation;
      r.worst_mode = m;
    }
  }
  return r;
}

struct EvalReport {
  std::string target;
  double similarity = 0.0;
  std::vector<CrosstalkPoint> crosstalk;
  PowerFit crosstalk_fit;  // E ~ a + b eps
  double power_budget = 0.0;   // rad/s
  double physical_scale = 0.0; // rad/s per unit omega
  double physical_norm = 0.0;  // rad/s
  double max_adiabatic_ratio = 0.0;
  double phonon_estimate = 0.0;
};

/// Full evaluation of one control solution against its normalized target.
inline EvalReport evaluate(const ControlMatrix& control, const InteractionGraph& target, const RamanSetup& setup,
                           const std::vector<double>& epsilons, double budget = kDefaultPowerBudget,
                           std::string label = {}) {
  EvalReport r;
  r.target = std::move(label);
  r.similarity = similarity(normalize(coupling_matrix(control, setup)).graph, target);
  r.crosstalk = crosstalk_curve(control, setup, epsilons);
  if (epsilons.size() >= 2) {
    std::vector<double> e, err;
    for (const auto& p : r.crosstalk) {
      e.push_back(p.epsilon);
      err.push_back(p.error);
    }
    r.crosstalk_fit = polyfit(e, err, 1);
  }
  const PoweredControl pc = rescale_to_power(control, setup, budget);
  r.power_budget = budget;
  r.physical_scale = pc.control.scale;
  r.physical_norm = pc.physical_norm;
  const AdiabaticReport a = adiabatic_validity(pc.control, setup);
  r.max_adiabatic_ratio = a.max_ratio;
  r.phonon_estimate = a.phonon_estimate;
  return r;
}

}  // namespace ionforge
