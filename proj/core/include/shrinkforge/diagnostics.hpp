#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "shrinkforge/data_model.hpp"
#include "shrinkforge/penalty.hpp"

namespace shrinkforge {

/// lambda_j = a_n on the first p0 (nonzero) coordinates and b_n on the rest,
/// a_n = n^(-1/2 - h_exponent), b_n = n^(g_exponent - 1/2). Then
/// sqrt(n) a_n -> 0 and sqrt(n) b_n -> infinity.
struct OracleRateSchedule {
    double h_exponent = 0.25;
    double g_exponent = 0.25;
    Index p = 10;
    Index p0 = 5;

    /// Throws ConfigError unless h > 0, 0 < g < 1/2 and 0 < p0 < p.
    void validate() const;
    double a_n(Index n) const;
    double b_n(Index n) const;
    Eigen::VectorXd lambdas(Index n) const;
};

struct OracleRow {
    Index n = 0;
    std::string penalty;
    double zero_recovery_rate = 0.0;
    double coverage = 0.0;
    int replicates = 0;  // fits that succeeded
};

struct OracleReport {
    std::vector<OracleRow> rows;
    std::string trend;  // one-line summary of recovery across n
};

/// Where the penalty of a shifted sweep is centered.
enum class PilotRule { none, truth, ols, scad2 };

std::string to_string(PilotRule rule);
PilotRule pilot_rule_from_string(const std::string& name);

struct OracleConfig {
    PenaltyKind penalty = PenaltyKind::scad;
    OracleRateSchedule schedule;
    std::vector<Index> n_values{100, 200, 500};
    int replicates = 100;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

/// Per n and replicate: simulate light-tailed data with the first p0
/// coefficients nonzero, fit the Gaussian log-likelihood objective
/// (1/2n)||y - X b||^2 + sum_j p_{lambda_j}(|b_j|), record whether every tail
/// coefficient is exactly 0 and whether each standardized head coordinate
/// sqrt(n)(b_j - beta_j) / sqrt(s^2 [(X1'X1/n)^-1]_jj) lies within 1.96.
/// Penalty kinds: scad, mcp, lasso.
OracleReport oracle_sweep(const OracleConfig& cfg);

struct ShiftedOracleReport {
    OracleReport shifted;
    OracleReport baseline;  // same seeds, no shift
};

/// oracle_sweep with the penalty centered on a pilot estimate (needs n > p).
/// PilotRule::none reproduces oracle_sweep exactly.
ShiftedOracleReport shifted_oracle_sweep(const OracleConfig& cfg, PilotRule pilot);

/// Number of times the recovery rate drops as n grows.
int recovery_inversions(const OracleReport& report);

void write_oracle_csv(std::ostream& out, const OracleReport& report);

}  // namespace shrinkforge
