#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "hisd/schemes.hpp"

namespace hisd {

inline constexpr double kDefaultReferenceTau = 0x1p-13;

/// Runs the reference scheme at `ref_tau` and keeps only the states on the
/// grid of spacing `sample_tau` (which must be an integer multiple of ref_tau
/// dividing the horizon). Unconstrained experiments always use the
/// Gram-Schmidt scheme as reference; constrained experiments use the
/// constrained scheme.
Trajectory reference_solution(const EnergyModel& model, const SaddleState& init,
                              const SchemeConfig& cfg, double ref_tau, double sample_tau);

struct ErrorSummary {
  double x = 0.0;
  std::vector<double> v;  // one entry per directional vector
};

/// Max over shared grid times of |x_n - x_ref(t_n)| and |v_{i,n} - v_{i,ref}(t_n)|.
/// Throws ConfigError if the grids are not commensurate or the shapes differ.
ErrorSummary max_error(const Trajectory& traj, const Trajectory& ref);

/// Closed-form solution (x(t), V(t)) used in place of a numerical reference.
using ExactSolution = std::function<std::pair<Vector, Matrix>(double t)>;

/// Same quantity against an exact solution, at every recorded state of traj.
ErrorSummary max_error(const Trajectory& traj, const ExactSolution& exact);

struct ConvergenceReport {
  std::vector<double> taus;
  std::vector<double> errors_x;
  /// errors_v[i][m]: direction i, step size taus[m].
  std::vector<std::vector<double>> errors_v;
  /// rates[m - 1] = log2(e(taus[m-1]) / e(taus[m])); NaN when undefined.
  std::vector<double> rates_x;
  std::vector<std::vector<double>> rates_v;
  /// 0 when measured against an exact solution.
  double reference_tau = 0.0;
  Scheme scheme = Scheme::UnconstrainedGS;
};

/// Runs cfg.scheme at every tau (strictly decreasing, each an integer
/// multiple of ref_tau and larger than it) and tabulates max-in-time errors
/// against reference_solution and log2 convergence rates. Independent step
/// sizes run concurrently; results do not depend on scheduling.
ConvergenceReport convergence_table(const EnergyModel& model, const SaddleState& init,
                                    const SchemeConfig& cfg, const std::vector<double>& taus,
                                    double ref_tau = kDefaultReferenceTau);

/// As above, against a closed-form solution.
ConvergenceReport convergence_table(const EnergyModel& model, const SaddleState& init,
                                    const SchemeConfig& cfg, const std::vector<double>& taus,
                                    const ExactSolution& exact);

struct DifferenceSeries {
  double tau = 0.0;
  std::vector<double> t;
  std::vector<double> dx;
  std::vector<double> dv1;

  double max_dx() const;
  double max_dv1() const;
};

/// Runs cfg with the Gram-Schmidt scheme and with `other` in lockstep from
/// the same initial state and records |x_n - X_n| and |v_{1,n} - V_{1,n}|.
/// Both schemes must be unconstrained.
DifferenceSeries scheme_difference_series(const EnergyModel& model, const SaddleState& init,
                                          const SchemeConfig& cfg, double tau,
                                          Scheme other = Scheme::UnconstrainedLM);

/// Max-over-n recovery residuals per tau with least-squares slopes of
/// log2(residual) against log2(tau).
struct ResidualOrderReport {
  std::vector<double> taus;
  std::vector<double> max_x_residual;
  std::vector<double> max_v_residual;
  /// nullopt when every residual sits at roundoff level ("exact").
  std::optional<double> slope_x;
  std::optional<double> slope_v;
};

/// Residuals below this are treated as roundoff when fitting slopes.
inline constexpr double kResidualRoundoff = 1e-11;

ResidualOrderReport residual_order_study(const EnergyModel& model, const SaddleState& init,
                                         const SchemeConfig& cfg, const std::vector<double>& taus);

/// Least-squares slope of log2(y) against log2(x).
double log2_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hisd
