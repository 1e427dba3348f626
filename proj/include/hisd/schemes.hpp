#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hisd/energy_models.hpp"
#include "hisd/manifold_ops.hpp"

namespace hisd {

enum class Scheme {
  /// Euler predictor for v without Lagrange terms, then Gram-Schmidt.
  UnconstrainedGS,
  /// Euler predictor including the Lagrange-multiplier terms, then Gram-Schmidt.
  UnconstrainedLM,
  /// Dynamics on the unit sphere: normalization, tangent projection, Gram-Schmidt.
  ConstrainedSphere,
};

enum class Retraction { GramSchmidt, SvdProjection };

enum class HessianMode { Analytic, Dimer };

std::string_view to_string(Scheme scheme);
std::string_view to_string(Retraction retraction);
/// Accepts "gs", "lm", "constrained" (and the enum spellings). Throws ConfigError.
Scheme parse_scheme(std::string_view text);
Retraction parse_retraction(std::string_view text);

struct SchemeConfig {
  Scheme scheme = Scheme::UnconstrainedGS;
  double tau = 0.01;
  double beta = 1.0;
  double gamma = 1.0;
  int index_k = 1;
  double horizon = 7.0;
  Retraction retraction = Retraction::GramSchmidt;
  HessianMode hessian_mode = HessianMode::Analytic;
  DimerParams dimer;
  double gs_tol = kGramSchmidtTol;
  /// Stop once |F(x_n)| < early_stop_force; 0 disables (the default).
  double early_stop_force = 0.0;

  /// N = round(T / tau).
  long steps() const;

  /// Throws ConfigError naming the offending field. `dim` is the model dimension.
  void validate(int dim) const;
};

struct SaddleState {
  Vector x;
  Frame frame;
  long step = 0;
  double time = 0.0;
};

struct Trajectory {
  std::vector<SaddleState> states;
  SchemeConfig config;
  std::string model_name;
  /// Step count between consecutive recorded states (1 unless subsampled).
  long stride = 1;

  /// Time between consecutive recorded states.
  double sample_tau() const { return config.tau * static_cast<double>(stride); }
};

/// Right-hand side of the continuous dynamics at a state:
/// dx (d-vector) and dv (d x k, column i is dv_i).
struct Rhs {
  Vector dx;
  Matrix dv;
};

/// J(x) v using the configured Hessian mode.
Vector apply_hessian(const EnergyModel& model, const SchemeConfig& cfg,
                     const Vector& x, const Vector& v);

/// x_n = x + tau S, S = beta (I - 2 V V^T) F(x);
/// v~_i = v_i + tau gamma J(x) v_i; then sequential Gram-Schmidt
/// (or SVD projection of all k predictors when cfg.retraction says so).
SaddleState step_unconstrained_gs(const SaddleState& state, const EnergyModel& model,
                                  const SchemeConfig& cfg);

/// As step_unconstrained_gs with the predictor augmented by
/// L_i = gamma (-v_i v_i^T - 2 sum_{j<i} v_j v_j^T) J(x) v_i.
SaddleState step_unconstrained_lm(const SaddleState& state, const EnergyModel& model,
                                  const SchemeConfig& cfg);

/// x~ = x + tau S, x_n = x~ / |x~|; v~_i = v_i + tau J(x) v_i;
/// v^_i = v~_i - (v~_i^T x_n) x_n; sequential Gram-Schmidt on v^.
SaddleState step_constrained(const SaddleState& state, const EnergyModel& model,
                             const SchemeConfig& cfg);

/// Dispatches on cfg.scheme.
SaddleState step(const SaddleState& state, const EnergyModel& model, const SchemeConfig& cfg);

/// dx = S, dv_i = R_i + L_i.
Rhs recovered_rhs(const SaddleState& state, const EnergyModel& model, const SchemeConfig& cfg);

/// dx = S - x x^T F(x), dv_i = R_i + L_i - x x^T J(x) v_i + x v_i^T F(x),
/// with beta = gamma = 1.
Rhs constrained_rhs(const SaddleState& state, const EnergyModel& model,
                    const SchemeConfig& cfg = {});

/// recovered_rhs or constrained_rhs, depending on cfg.scheme.
Rhs continuous_rhs(const SaddleState& state, const EnergyModel& model, const SchemeConfig& cfg);

/// Initial state at t = 0 with columns of `v0` as the frame.
SaddleState make_state(Vector x0, Matrix v0);

/// Runs N = round(T / tau) steps and records every `record_stride`-th state
/// (state 0 and the final state are always multiples of the stride, which
/// must divide N). Deterministic. Throws DivergenceError once |x| > 1e8 or
/// the state turns non-finite.
Trajectory run(const EnergyModel& model, const SaddleState& init, const SchemeConfig& cfg,
               long record_stride = 1);

/// Per-step recovery residuals of a trajectory recorded with stride 1:
/// v_residual(n-1, i) = |(v_{i,n} - v_{i,n-1}) / tau - dv_i(state_{n-1})| and
/// x_residual[n-1] = |(x_n - x_{n-1}) / tau - dx(state_{n-1})|.
struct ResidualSeries {
  std::vector<double> x_residual;
  Matrix v_residual;  // N x k

  double max_x() const;
  double max_v() const;
};

ResidualSeries residual_vs_recovered(const Trajectory& traj, const EnergyModel& model);

}  // namespace hisd
