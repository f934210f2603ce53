#pragma once

#include <filesystem>
#include <string>

#include "shrinkforge/data_model.hpp"
#include "shrinkforge/fit_result.hpp"
#include "shrinkforge/penalty.hpp"

namespace shrinkforge {

std::string to_string(Tails tails);
Tails tails_from_string(const std::string& name);
std::string to_string(CovarianceKind kind);
CovarianceKind covariance_from_string(const std::string& name);

/// {"kind", "params": {mix, scad_a, mcp_g, genome}, "weights", "shifts"};
/// excluded weights are written as the string "exclude".
std::string penalty_to_json(const PenaltySpec& spec);
PenaltySpec penalty_from_json(const std::string& text);

std::string genome_to_json(const Genome& genome);
Genome genome_from_json(const std::string& text);

/// {"method", "lambda_hat", "beta_hat", "zero_set", "converged", "iterations"}.
std::string fit_to_json(const FitResult& fit);
FitResult fit_from_json(const std::string& text);

/// Reads the single-column true_beta sidecar written by write_true_beta.
Eigen::VectorXd read_true_beta(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace shrinkforge
