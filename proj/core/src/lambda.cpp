#include <algorithm>
#include <cmath>

#include "shrinkforge/errors.hpp"
#include "shrinkforge/solver.hpp"

namespace shrinkforge {

LambdaGrid LambdaGrid::make(double lambda_max, double gamma_min, int count, Spacing spacing) {
    if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) throw DegenerateGridError("lambda_max must be positive");
    if (!(gamma_min > 0.0 && gamma_min < 1.0)) throw ConfigError("gamma_min must lie in (0, 1)");
    if (count < 2) throw ConfigError("lambda grid needs at least two values");

    LambdaGrid grid;
    grid.lambda_max = lambda_max;
    grid.gamma_min = gamma_min;
    grid.count = count;
    grid.spacing = spacing;
    grid.values.resize(static_cast<std::size_t>(count));
    const double lambda_min = gamma_min * lambda_max;
    for (int k = 0; k < count; ++k) {
        const double frac = static_cast<double>(k) / static_cast<double>(count - 1);
        grid.values[static_cast<std::size_t>(k)] =
            spacing == Spacing::linear ? lambda_max - frac * (lambda_max - lambda_min)
                                       : lambda_max * std::pow(gamma_min, frac);
    }
    grid.values.front() = lambda_max;
    grid.values.back() = lambda_min;
    return grid;
}

LambdaGrid build_lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GridParams& params) {
    if (x.rows() == 0 || x.rows() != y.size()) throw DomainError("grid needs a nonempty subset");
    const double lambda_max = (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
    if (!(lambda_max > 0.0)) throw DegenerateGridError("max |y'X| is zero; lambda grid is degenerate");
    return LambdaGrid::make(lambda_max, params.gamma_min, params.count, params.spacing);
}

double path_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Loss loss, const PenaltySpec& penalty) {
    if (x.rows() == 0 || x.rows() != y.size()) throw DomainError("path needs a nonempty subset");
    double m = 1.0;
    if (penalty.convex()) {
        const auto c = convex_coefficients(penalty);
        if (c[0] > 0.0) m = c[0];
    }
    Eigen::VectorXd score;
    if (loss == Loss::squared) {
        score = 2.0 * (x.transpose() * y).cwiseAbs();
    } else {
        const Eigen::VectorXd signs = y.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
        score = (x.transpose() * signs).cwiseAbs();
    }
    score /= static_cast<double>(x.rows());
    double lambda_max = 0.0;
    for (Index j = 0; j < score.size(); ++j) {
        const double w = penalty.weights(j);
        if (is_excluded(w) || w <= 0.0) continue;
        lambda_max = std::max(lambda_max, score(j) / (w * m));
    }
    if (!(lambda_max > 0.0)) throw DegenerateGridError("no penalized column correlates with the response");
    return lambda_max;
}

LambdaSelection select_lambda(const PathFitter& fitter, const std::vector<double>& grid,
                              const Eigen::MatrixXd& x_holdout, const Eigen::VectorXd& y_holdout, Loss holdout_loss) {
    if (grid.empty()) throw ConfigError("lambda grid is empty");
    if (y_holdout.size() == 0) throw DomainError("holdout set is empty");

    LambdaSelection out;
    out.holdout_loss.reserve(grid.size());
    Eigen::VectorXd warm;
    bool have_warm = false;
    double best = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        FitResult fit = fitter(lambda, have_warm ? &warm : nullptr);
        warm = fit.beta_hat;
        have_warm = true;
        const double loss = mean_loss(holdout_loss, x_holdout, y_holdout, fit.beta_hat);
        out.holdout_loss.push_back(loss);
        if (loss < best || (loss == best && lambda > out.lambda_hat)) {
            best = loss;
            out.lambda_hat = lambda;
            out.fit = std::move(fit);
        }
    }
    return out;
}

}  // namespace shrinkforge
