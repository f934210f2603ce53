#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "shrinkforge/fit_result.hpp"
#include "shrinkforge/penalty.hpp"

namespace shrinkforge {

enum class Loss { squared, absolute };

/// Q(beta) = (1/n) sum_i loss(y_i - x_i' beta) + lambda * penalty(beta).
struct Objective {
    Loss loss = Loss::squared;
    PenaltySpec penalty;
    double lambda = 0.0;
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& y;
};

struct SolverOptions {
    /// Squared loss: relative iterate change. Absolute loss: relative
    /// improvement of the best objective over a 100-iteration window.
    double tol = 1e-8;
    int max_iter = 5000;
    /// Subgradient paths snap |beta_j| below this to exactly 0.
    double zero_snap = 1e-10;
};

double objective_value(const Objective& obj, const Eigen::VectorXd& beta);

double mean_loss(Loss loss, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

/// Sufficient statistics of the squared loss: (1/n) ||y - X b||^2 =
/// b'Gb - 2 c'b + yy with G = X'X/n, c = X'y/n, yy = y'y/n.
class LeastSquaresModel {
public:
    LeastSquaresModel(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

    const Eigen::MatrixXd& gram() const { return gram_; }
    const Eigen::VectorXd& xty() const { return xty_; }
    double yy() const { return yy_; }
    Index n() const { return n_; }
    Index p() const { return gram_.rows(); }
    /// Largest eigenvalue of G.
    double spectral_norm() const { return spectral_norm_; }

    double loss(const Eigen::VectorXd& beta) const;
    LeastSquaresModel restrict_to(const std::vector<Index>& columns) const;

private:
    LeastSquaresModel() = default;

    Eigen::MatrixXd gram_;
    Eigen::VectorXd xty_;
    double yy_ = 0.0;
    Index n_ = 0;
    double spectral_norm_ = 0.0;
};

double soft_threshold(double z, double threshold);

/// Convex penalties only. Squared loss runs accelerated proximal steps with
/// the scalar penalty prox (step 1/L, monotone restart); absolute loss runs
/// proximal subgradient steps s0/sqrt(t), s0 = 1/||X'X/n||. Both keep the
/// best iterate. Throws ContractError for scad/mcp, DivergenceError when the
/// objective exceeds 1e6 times its initial value.
FitResult subgradient_descent(const Objective& obj, const Eigen::VectorXd& init,
                              const SolverOptions& options = {});

/// Squared-loss variant on precomputed sufficient statistics.
FitResult subgradient_descent(const LeastSquaresModel& model, const PenaltySpec& penalty, double lambda,
                              const Eigen::VectorXd& init, const SolverOptions& options = {});

/// Cyclic coordinate descent with exact scalar minimizers (squared loss;
/// ridge, lasso, elastic net). Zero weights leave a coordinate unpenalized.
FitResult coordinate_fit(const Objective& obj, const std::optional<Eigen::VectorXd>& init = std::nullopt,
                         const SolverOptions& options = {});

FitResult coordinate_fit(const LeastSquaresModel& model, const PenaltySpec& penalty, double lambda,
                         const std::optional<Eigen::VectorXd>& init = std::nullopt,
                         const SolverOptions& options = {});

struct LlaOptions {
    int max_rounds = 10;
    double weight_tol = 1e-6;
    SolverOptions inner;
};

/// Local linear approximation for scad/mcp: reweighted lasso solves with
/// weights p'_{lambda w_j}(|beta_j - shift_j|)/lambda, started from the
/// lasso solution unless `init` is given. Squared loss uses coordinate
/// descent inside, absolute loss the proximal subgradient path.
FitResult lla_fit(const Objective& obj, const std::optional<Eigen::VectorXd>& init = std::nullopt,
                  const LlaOptions& options = {});

/// Least squares. Throws RankError when n <= p or cond(X'X) >= 1e12.
FitResult ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

enum class Spacing { linear, log };

struct LambdaGrid {
    double lambda_max = 1.0;
    double gamma_min = 0.001;
    int count = 100;
    Spacing spacing = Spacing::linear;
    std::vector<double> values;  // strictly decreasing

    static LambdaGrid make(double lambda_max, double gamma_min, int count, Spacing spacing);
};

struct GridParams {
    double gamma_min = 0.001;
    int count = 100;
    Spacing spacing = Spacing::linear;
};

/// lambda_max = (1/n) max_j |y' X(:, j)| down to gamma_min * lambda_max.
LambdaGrid build_lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GridParams& params);

/// Smallest lambda at which beta = 0 solves the lasso part of the
/// objective: 2 max_j |x_j'y| / (n w_j m) for squared loss and
/// max_j |x_j' sign(y)| / (n w_j m) for absolute loss, m the |t| coefficient
/// (1 when the penalty has no |t| term).
double path_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Loss loss, const PenaltySpec& penalty);

/// Fits at one lambda, optionally warm-started from the previous grid point.
using PathFitter = std::function<FitResult(double lambda, const Eigen::VectorXd* warm)>;

struct LambdaSelection {
    double lambda_hat = 0.0;
    FitResult fit;
    std::vector<double> holdout_loss;  // one per grid value
};

/// Walks the grid in order, scores every fit by mean holdout loss and
/// returns the minimizer; ties go to the larger lambda.
LambdaSelection select_lambda(const PathFitter& fitter, const std::vector<double>& grid,
                              const Eigen::MatrixXd& x_holdout, const Eigen::VectorXd& y_holdout,
                              Loss holdout_loss = Loss::squared);

}  // namespace shrinkforge
