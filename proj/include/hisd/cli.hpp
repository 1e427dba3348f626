#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hisd/config.hpp"

namespace hisd::cli {

namespace exit_code {
inline constexpr int kSuccess = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kDivergence = 3;
}  // namespace exit_code

struct Options {
  std::filesystem::path config;
  /// Overrides the config's output_dir.
  std::optional<std::filesystem::path> output;
  bool strict = false;
  bool svg = false;
};

/// Rates outside this band fail `converge --strict`.
inline constexpr double kStrictRateLow = 0.8;
inline constexpr double kStrictRateHigh = 1.3;

// Each command returns an exit code and may throw hisd::Error; dispatch()
// maps exceptions onto exit codes.
int cmd_run(const ExperimentConfig& cfg, const Options& opts, std::ostream& out,
            std::ostream& err);
int cmd_converge(const ExperimentConfig& cfg, const Options& opts, std::ostream& out,
                 std::ostream& err);
int cmd_compare(const ExperimentConfig& cfg, const Options& opts, std::ostream& out,
                std::ostream& err);
int cmd_residual(const ExperimentConfig& cfg, const Options& opts, std::ostream& out,
                 std::ostream& err);

struct CheckGroup {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Self-checks of `model`: gradient and Hessian finite differences at random
/// points, linearity and symmetry of the Hessian action, O(l^2) order of the
/// dimer approximation, and the manifold kernel invariants.
std::vector<CheckGroup> run_checks(const ExperimentConfig& cfg, const EnergyModel& model);

/// Prints one PASS/FAIL line per group; 0 iff every group passes, else 1.
int cmd_check(const ExperimentConfig& cfg, const EnergyModel& model, std::ostream& out);

/// Runs the command selected by cfg.mode, translating errors into exit codes.
int dispatch(const ExperimentConfig& cfg, const Options& opts, std::ostream& out,
             std::ostream& err);

/// Parses flags (--config, --output, --strict, --svg), loads the config and dispatches.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hisd::cli
