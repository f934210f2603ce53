#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shrinkforge/data_model.hpp"
#include "shrinkforge/solver.hpp"

namespace shrinkforge {

/// The standard roster plus POLY, a polynomial-family penalty given by a
/// genome (used to compare a searched penalty against the roster).
enum class Method { LM, RR, L, EN, AL, AEN, LADL, SCAD1, ASCAD1, SCAD2, MCP, POLY };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

/// The eleven standard methods in table order.
const std::vector<Method>& standard_methods();

/// LM and the absolute-loss methods need n > p.
bool requires_more_rows_than_columns(Method m);

/// SCAD2 and MCP pick lambda on an explicit holdout instead of by CV.
bool uses_holdout_selection(Method m);

struct MethodConfig {
    std::uint64_t seed = 0;
    int cv_folds = 5;
    /// Share of the training rows held out for lambda when none is given.
    double lla_holdout_fraction = 0.1;
    /// Rows of the training set used to pick lambda for SCAD2/MCP; the
    /// remaining rows fit beta.
    std::optional<std::vector<Index>> lambda_holdout;
    int grid_count = 100;
    /// Absolute-loss fits run proximal subgradient steps, so their CV grid
    /// is coarser.
    int absolute_grid_count = 20;
    /// Defaults to 0.001 when n > p, 0.01 otherwise.
    std::optional<double> gamma_min;
    double en_mix = 0.5;
    double scad_a = 3.7;
    double mcp_g = 3.0;
    Genome genome;  // POLY only
    SolverOptions solver{1e-10, 20000, 1e-10};
    /// Proximal-subgradient budget per grid point while walking a CV path.
    int absolute_path_iter = 1000;
};

/// Fits `name` on `train`. Throws CapabilityError when the method needs
/// n > p and the training set does not have it.
FitResult fit_method(Method name, const Dataset& train, const MethodConfig& config = {});

/// Inverse-pilot weights used by the adaptive methods: OLS when n > p,
/// SCAD2 otherwise; zero pilots map to kExclude.
Eigen::VectorXd pilot_weights(const Dataset& train, const MethodConfig& config);

struct CvResult {
    double lambda_hat = 0.0;
    std::vector<double> grid;
    std::vector<double> cv_loss;
    FitResult fit;  // refit on the full training set at lambda_hat
};

/// K-fold cross-validation of a penalized fit over a log grid from
/// path_lambda_max. Folds come from a seeded permutation of the rows.
CvResult cross_validate(const Dataset& train, Loss loss, const PenaltySpec& penalty, const MethodConfig& config);

}  // namespace shrinkforge
