#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shrinkforge/data_model.hpp"
#include "shrinkforge/diagnostics.hpp"
#include "shrinkforge/ga_search.hpp"
#include "shrinkforge/methods.hpp"
#include "shrinkforge/stability.hpp"

namespace shrinkforge::cli {

/// Simulation grid shared by `simulate`, `instability` and simulated `ga` runs.
struct SimulationSection {
    std::vector<Index> n_values{40, 75, 150, 500};
    Index p = 100;
    std::vector<double> sparsity{0.1, 0.5, 0.9};
    std::vector<Tails> tails{Tails::light, Tails::heavy};
    std::vector<CovarianceKind> covariance{CovarianceKind::identity};
    double off_diagonal = 0.5;
    double beta_mean = 4.0;
    double beta_sd = 1.0;

    bool operator==(const SimulationSection&) const = default;
};

struct InstabilitySection {
    std::vector<Method> methods;  // empty: the standard roster
    std::vector<double> tau{0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
    int replicates = 100;
    Index n_train = 0;  // 0 with n_test = 0: default split for n
    Index n_test = 0;

    bool operator==(const InstabilitySection&) const = default;
};

struct GaSection {
    int population = 150;
    int generations = 10;
    double elite_fraction = 0.2;
    double mutation_rate = 0.1;
    double diversity_epsilon = 0.05;
    int grid_count = 100;
    double gamma_min = 0.001;
    /// Simulated data unless `data` names a CSV file.
    Index n = 40;
    double sparsity = 0.5;
    Tails tails = Tails::light;
    std::filesystem::path data;
    std::string response = "y";
    Index n_train_lambda = 2;
    Index n_train_beta = 30;
    Index n_train_alpha = 4;
    Index n_test = 4;
    std::vector<Method> compare;  // empty: the standard roster

    bool operator==(const GaSection&) const = default;
};

struct OracleSection {
    PenaltyKind penalty = PenaltyKind::scad;
    double h_exponent = 0.25;
    double g_exponent = 0.25;
    Index p = 10;
    Index p0 = 5;
    std::vector<Index> n_values{100, 200, 500};
    int replicates = 100;
    PilotRule pilot = PilotRule::none;

    bool operator==(const OracleSection&) const = default;
};

struct RealSection {
    std::filesystem::path data;
    std::string response = "y";
    std::filesystem::path true_beta;  // optional sidecar; enables the metrics CSV
    bool standardize = true;
    std::vector<Index> sizes{40, 75, 150, 500};
    std::vector<Method> methods;
    std::vector<double> tau{0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
    int replicates = 100;

    bool operator==(const RealSection&) const = default;
};

struct ExperimentConfig {
    std::uint64_t master_seed = 0;
    std::filesystem::path output_dir = "out";
    unsigned jobs = 1;
    SimulationSection simulation;
    InstabilitySection instability;
    GaSection ga;
    OracleSection oracle;
    RealSection real;

    bool operator==(const ExperimentConfig&) const = default;

    /// Throws ConfigError on any out-of-range value.
    void validate() const;
};

/// Parses INI text: top-level keys (master_seed, output_dir, jobs) and the
/// sections [simulation], [instability], [ga], [oracle], [real]. Missing
/// keys keep their defaults; unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes every field; parse_config(to_ini(c)) == c.
std::string to_ini(const ExperimentConfig& config);

}  // namespace shrinkforge::cli
