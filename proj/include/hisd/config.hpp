#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "hisd/convergence_lab.hpp"
#include "hisd/energy_models.hpp"
#include "hisd/schemes.hpp"

namespace hisd {

enum class Mode { Run, Converge, Compare, Residual, Check };

struct CheckSettings {
  int points = 100;
  double box = 2.0;
  double fd_step = 1e-4;
  std::uint64_t seed = 20240601;
};

/// One experiment, as read from a JSON document.
struct ExperimentConfig {
  Mode mode = Mode::Run;
  std::string model_name = "double_well";
  nlohmann::json model_params = nlohmann::json::object();
  /// scheme.tau holds taus.front().
  SchemeConfig scheme;
  std::vector<double> taus;
  Vector x0;
  Matrix v0;  // d x k
  double ref_tau = kDefaultReferenceTau;
  std::filesystem::path output_dir = ".";
  /// Orthonormalize v0 on load (warning when the change exceeds 1e-8).
  bool orthonormalize_v0 = true;
  /// Scheme compared against the Gram-Schmidt scheme in compare mode.
  Scheme compare_with = Scheme::UnconstrainedLM;
  CheckSettings check;
};

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Model and initial state ready to run.
struct PreparedExperiment {
  EnergyModel model;
  SaddleState init;
  std::vector<std::string> warnings;
};

/// Builds the model, checks shapes against its dimension, and applies the
/// load-time adjustments: constrained runs normalize x0 and tangent-project
/// v0; v0 is orthonormalized unless disabled. Each adjustment larger than
/// 1e-8 adds a warning.
PreparedExperiment prepare(const ExperimentConfig& cfg,
                           const ModelRegistry& registry = ModelRegistry::with_builtins());

}  // namespace hisd
