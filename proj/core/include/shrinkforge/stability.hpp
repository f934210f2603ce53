#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "shrinkforge/data_model.hpp"
#include "shrinkforge/methods.hpp"

namespace shrinkforge {

struct InstabilityConfig {
    std::vector<double> tau_values{0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
    int replicates = 100;
    /// Only n_train and n_test are read; zero sizes fall back to default_split.
    SplitSpec split;
    std::vector<Method> methods;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    MethodConfig method;

    /// Throws ConfigError unless tau is ascending from 0 and replicates >= 1.
    void validate() const;
};

/// Train/test sizes used for the simulation study: (28,12), (60,15),
/// (120,30), (350,150) at n = 40, 75, 150, 500 and 70/30 otherwise.
SplitSpec default_split(Index n);

struct CurvePoint {
    double tau = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    int replicates = 0;  // fits that succeeded
    std::vector<double> samples;  // per replicate; NaN marks a failed fit
};

struct InstabilityCurve {
    std::string method;
    std::vector<CurvePoint> points;
};

struct SelectionCounts {
    Index p = 0;
    Index zero_true = 0;
    Index zeroed = 0;
};

struct SelectionMetrics {
    double tot = 0.0;
    double tr = 0.0;
    double fa = 0.0;
    SelectionCounts counts;
};

struct SkippedMethod {
    std::string method;
    std::string reason;
};

struct InstabilityResult {
    std::vector<InstabilityCurve> curves;
    /// Per method, averaged over the tau = 0 fits; empty without ground truth.
    std::vector<std::pair<std::string, SelectionMetrics>> metrics;
    std::vector<SkippedMethod> skipped;
};

/// Root mean squared error of the fit on the given rows.
double instability_score(const FitResult& fit, const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test);

/// For each replicate and tau: a fresh split, both parts perturbed by
/// N(0, tau^2) noise, every method fit on the same perturbed training rows
/// and scored on the same perturbed test rows. Methods that cannot run at
/// this n are skipped and recorded; failed fits lower a point's count.
InstabilityResult instability_curves(const Dataset& ds, const InstabilityConfig& cfg);

SelectionMetrics selection_metrics(const FitResult& fit, const Eigen::VectorXd& true_beta);
SelectionMetrics aggregate_metrics(const std::vector<SelectionMetrics>& records);

void write_curves_csv(std::ostream& out, const std::vector<InstabilityCurve>& curves);

struct MetricsRow {
    std::string method;
    Tails tails = Tails::light;
    double sparsity = 0.0;
    SelectionMetrics metrics;
};

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace shrinkforge
