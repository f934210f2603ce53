#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "experiment_config.hpp"

namespace shrinkforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

/// Each command writes into config.output_dir and returns an exit code;
/// progress and skipped methods go to `log`.
int cmd_simulate(const ExperimentConfig& config, std::ostream& log);
int cmd_instability(const ExperimentConfig& config, std::ostream& log);
int cmd_ga(const ExperimentConfig& config, std::ostream& log);
int cmd_oracle(const ExperimentConfig& config, std::ostream& log);
int cmd_real(const ExperimentConfig& config, std::ostream& log);

/// Cell label used in output file names, e.g. n500_s0.9_light_identity.
std::string cell_label(Index n, double sparsity, Tails tails, CovarianceKind covariance);

/// Parses argv (without the program name) and dispatches. Config and data
/// input errors map to exit code 2.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& log);

}  // namespace shrinkforge::cli
