#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shrinkforge {

struct FitResult {
    std::string method;
    Eigen::VectorXd beta_hat;
    double lambda_hat = 0.0;
    /// Best objective seen so far, one entry per iteration (or sweep/round).
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
    /// Indices j with beta_hat(j) exactly 0.
    std::vector<Eigen::Index> zero_set;

    void refresh_zero_set();
};

}  // namespace shrinkforge
