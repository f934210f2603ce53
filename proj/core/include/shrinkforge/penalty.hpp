#pragma once

#include <array>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "shrinkforge/fit_result.hpp"

namespace shrinkforge {

using Index = Eigen::Index;

enum class PenaltyKind { none, ridge, lasso, elastic_net, scad, mcp, polynomial };

std::string to_string(PenaltyKind kind);
PenaltyKind penalty_kind_from_string(const std::string& name);

/// Weight value that removes a coordinate from the fit (fixed at 0).
inline constexpr double kExclude = std::numeric_limits<double>::infinity();

inline bool is_excluded(double weight) { return weight == kExclude; }

/// Coefficients of the penalty family sum_k alpha_k |t|^k, k = 1..6.
struct Genome {
    static constexpr int kTerms = 6;
    static constexpr double kMin = 0.0;
    static constexpr double kMax = 20.0;

    std::array<double, kTerms> alpha{};

    void clamp();
    bool valid() const;

    friend bool operator==(const Genome&, const Genome&) = default;
    friend auto operator<=>(const Genome&, const Genome&) = default;
};

/// f(t) per kind, with per-coordinate weights and location shifts. The
/// penalty evaluated at beta is sum_j w_j f(beta_j - shift_j). For scad/mcp
/// the shape depends on lambda and the term is p_{lambda w_j}(|t|) / lambda.
struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::none;
    double mix = 0.5;      // elastic net: mix*|t| + (1-mix)*t^2
    double scad_a = 3.7;   // > 2
    double mcp_g = 3.0;    // > 1
    Genome genome;         // polynomial only
    Eigen::VectorXd weights;
    Eigen::VectorXd shifts;

    Index size() const { return weights.size(); }
    bool convex() const { return kind != PenaltyKind::scad && kind != PenaltyKind::mcp; }
    bool folded_concave() const { return !convex(); }
    bool has_exclusions() const;

    /// Throws ConfigError on out-of-range hyperparameters or sizes.
    void validate() const;

    static PenaltySpec make(PenaltyKind kind, Index p);
};

PenaltySpec no_penalty(Index p);
PenaltySpec ridge_penalty(Index p);
PenaltySpec lasso_penalty(Index p);
PenaltySpec elastic_net_penalty(Index p, double mix = 0.5);
PenaltySpec scad_penalty(Index p, double a = 3.7);
PenaltySpec mcp_penalty(Index p, double g = 3.0);
PenaltySpec polynomial_penalty(Index p, const Genome& genome);

/// Convex kinds are members of the polynomial family; this returns their
/// alpha. Throws ContractError for scad/mcp.
std::array<double, Genome::kTerms> convex_coefficients(const PenaltySpec& spec);

/// Unweighted scalar penalty f(t) and its right derivative f'(t) for t >= 0.
/// `lambda` only matters for the folded-concave kinds.
double scalar_penalty(const PenaltySpec& spec, double t, double lambda = 1.0);
double scalar_derivative(const PenaltySpec& spec, double t, double lambda = 1.0);

/// SCAD and MCP derivative p'_{level}(t), t >= 0, with `level` the
/// effective threshold (lambda times weight).
double scad_derivative(double t, double level, double a);
double mcp_derivative(double t, double level, double g);

double penalty_value(const PenaltySpec& spec, const Eigen::VectorXd& beta, double lambda = 1.0);
Eigen::VectorXd penalty_subgradient(const PenaltySpec& spec, const Eigen::VectorXd& beta,
                                    double lambda = 1.0);

/// argmin_u 0.5 (u - z)^2 + scale * sum_k coeffs[k] |u|^(k+1), for
/// nonnegative coefficients. Exact zero below the |u| threshold.
double polynomial_prox(const std::array<double, Genome::kTerms>& coeffs, double z, double scale);

enum class WeightSource { ones, inverse_ols, inverse_scad2 };

struct WeightRule {
    WeightSource source = WeightSource::ones;
    double gamma = 1.0;
};

/// w_j = 1/|pilot_j|^gamma; exactly-zero pilots map to kExclude.
Eigen::VectorXd adaptive_weights(const WeightRule& rule, const Eigen::VectorXd& pilot);
Eigen::VectorXd adaptive_weights(const WeightRule& rule, const FitResult& pilot_fit);

struct ConditionReport {
    double max_abs_derivative = 0.0;  // over [-C, C]
    double derivative_at_zero = 0.0;  // one-sided, magnitude
    bool zero_derivative_at_origin = false;
    bool convex = false;
};

/// Numerical proxies for the regularity conditions on f, evaluated with unit
/// weight and zero shift over a grid on [-bound, bound].
ConditionReport condition_check(const PenaltySpec& spec, double bound = 5.0, int grid_points = 2001,
                                double lambda = 1.0);

}  // namespace shrinkforge
