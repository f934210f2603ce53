#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shrinkforge/errors.hpp"
#include "shrinkforge/solver.hpp"
#include "test_util.hpp"

using namespace shrinkforge;
using testutil::gaussian_matrix;
using testutil::gaussian_vector;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

const SolverOptions kTight{1e-12, 50000, 1e-10};

Eigen::VectorXd ridge_closed_form(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    const double n = static_cast<double>(x.rows());
    const Eigen::MatrixXd a = x.transpose() * x + n * lambda * Eigen::MatrixXd::Identity(x.cols(), x.cols());
    return a.ldlt().solve(x.transpose() * y);
}

// argmin_b sum_i w_i |r_i - b| is a weighted median of r.
double weighted_median(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end());
    double total = 0.0;
    for (auto& p : pts) total += p.second;
    double acc = 0.0;
    for (auto& p : pts) {
        acc += p.second;
        if (acc >= total / 2) return p.first;
    }
    return pts.back().first;
}

}  // namespace

TEST(ObjectiveValue, Examples) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
    const Eigen::VectorXd y = vec({1.0, -1.0});
    const Objective obj{Loss::squared, no_penalty(1), 0.0, x, y};
    EXPECT_DOUBLE_EQ(objective_value(obj, vec({3.0})), 1.0);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    const Objective exact{Loss::squared, ridge_penalty(2), 0.0, id, y};
    EXPECT_EQ(objective_value(exact, y), 0.0);
    const Objective abs{Loss::absolute, lasso_penalty(2), 0.5, id, y};
    EXPECT_DOUBLE_EQ(objective_value(abs, vec({0.0, 0.0})), 1.0);
}

TEST(SubgradientDescent, RidgeTwoByTwo) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::VectorXd y = vec({2.0, 4.0});
    const FitResult fit = subgradient_descent(Objective{Loss::squared, ridge_penalty(2), 1.0, x, y},
                                              Eigen::VectorXd::Zero(2), kTight);
    EXPECT_NEAR(fit.beta_hat(0), 2.0 / 3.0, 1e-6);
    EXPECT_NEAR(fit.beta_hat(1), 4.0 / 3.0, 1e-6);
}

TEST(SubgradientDescent, LassoTwoByTwo) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::VectorXd y = vec({3.0, -1.0});
    const FitResult fit = subgradient_descent(Objective{Loss::squared, lasso_penalty(2), 1.0, x, y},
                                              Eigen::VectorXd::Zero(2), kTight);
    EXPECT_NEAR(fit.beta_hat(0), 2.0, 1e-6);
    EXPECT_EQ(fit.beta_hat(1), 0.0);
    EXPECT_EQ(fit.zero_set, std::vector<Index>{1});
}

TEST(SubgradientDescent, RidgeStationarityOnRandomProblems) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Eigen::MatrixXd x = gaussian_matrix(30, 8, s);
        const Eigen::VectorXd y = gaussian_vector(30, 100 + s);
        const double lambda = 0.05 * static_cast<double>(s + 1);
        const FitResult fit = subgradient_descent(Objective{Loss::squared, ridge_penalty(8), lambda, x, y},
                                                  Eigen::VectorXd::Zero(8), kTight);
        EXPECT_LT((fit.beta_hat - ridge_closed_form(x, y, lambda)).lpNorm<Eigen::Infinity>(), 1e-6);
    }
}

TEST(SubgradientDescent, ZeroLambdaIsLeastSquares) {
    const Eigen::MatrixXd x = gaussian_matrix(40, 5, 1);
    const Eigen::VectorXd y = gaussian_vector(40, 2);
    const FitResult fit = subgradient_descent(Objective{Loss::squared, lasso_penalty(5), 0.0, x, y},
                                              Eigen::VectorXd::Zero(5), kTight);
    const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(y);
    EXPECT_LT((fit.beta_hat - ols).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(SubgradientDescent, BestIterateTraceNeverIncreases) {
    const Eigen::MatrixXd x = gaussian_matrix(25, 6, 3);
    const Eigen::VectorXd y = gaussian_vector(25, 4);
    Genome g;
    g.alpha = {1.0, 0.5, 0.0, 2.0, 0.0, 0.3};
    for (Loss loss : {Loss::squared, Loss::absolute}) {
        const FitResult fit =
            subgradient_descent(Objective{loss, polynomial_penalty(6, g), 0.1, x, y}, Eigen::VectorXd::Zero(6));
        ASSERT_FALSE(fit.objective_trace.empty());
        for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
            EXPECT_LE(fit.objective_trace[i], fit.objective_trace[i - 1]);
    }
}

TEST(SubgradientDescent, RejectsFoldedConcave) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::VectorXd y = vec({1.0, 2.0});
    EXPECT_THROW(subgradient_descent(Objective{Loss::squared, scad_penalty(2), 1.0, x, y}, Eigen::VectorXd::Zero(2)),
                 ContractError);
    EXPECT_THROW(subgradient_descent(Objective{Loss::squared, lasso_penalty(2), 1.0, x, y},
                                     vec({std::nan(""), 0.0})),
                 DomainError);
}

TEST(SubgradientDescent, AbsoluteLossMatchesWeightedMedian) {
    // One predictor: (1/n) sum |y_i - x_i b| = (1/n) sum |x_i| |y_i/x_i - b|.
    const Eigen::MatrixXd x = gaussian_matrix(41, 1, 5);
    const Eigen::VectorXd y = 2.0 * x.col(0) + gaussian_vector(41, 6);
    std::vector<std::pair<double, double>> pts;
    for (Index i = 0; i < 41; ++i) pts.emplace_back(y(i) / x(i, 0), std::abs(x(i, 0)));
    const double oracle = weighted_median(pts);
    const Objective obj{Loss::absolute, lasso_penalty(1), 0.0, x, y};
    const FitResult fit = subgradient_descent(obj, Eigen::VectorXd::Zero(1), SolverOptions{1e-12, 20000, 1e-10});
    EXPECT_LE(objective_value(obj, fit.beta_hat), objective_value(obj, vec({oracle})) + 1e-4);
    EXPECT_NEAR(fit.beta_hat(0), oracle, 1e-2);
}

TEST(SubgradientDescent, AbsoluteLossWithLassoAddsPseudoPoint) {
    // (1/n) sum |y_i - x_i b| + lambda |b| is a weighted median with a point at 0 of weight n lambda.
    const Eigen::MatrixXd x = gaussian_matrix(31, 1, 7);
    const Eigen::VectorXd y = 0.4 * x.col(0) + gaussian_vector(31, 8);
    const double lambda = 0.2;
    std::vector<std::pair<double, double>> pts;
    for (Index i = 0; i < 31; ++i) pts.emplace_back(y(i) / x(i, 0), std::abs(x(i, 0)));
    pts.emplace_back(0.0, 31 * lambda);
    const double oracle = weighted_median(pts);
    const Objective obj{Loss::absolute, lasso_penalty(1), lambda, x, y};
    const FitResult fit = subgradient_descent(obj, Eigen::VectorXd::Zero(1), SolverOptions{1e-12, 20000, 1e-10});
    EXPECT_LE(objective_value(obj, fit.beta_hat), objective_value(obj, vec({oracle})) + 1e-4);
}

TEST(CoordinateFit, SoftThreshold) {
    EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
    EXPECT_EQ(soft_threshold(-0.5, 1.0), 0.0);
    EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
}

TEST(CoordinateFit, AgreesWithSubgradientOnRandomLasso) {
    const Eigen::MatrixXd x = gaussian_matrix(20, 10, 11);
    const Eigen::VectorXd y = gaussian_vector(20, 12);
    const Objective obj{Loss::squared, lasso_penalty(10), 0.1, x, y};
    const FitResult cd = coordinate_fit(obj, std::nullopt, kTight);
    const FitResult sg = subgradient_descent(obj, Eigen::VectorXd::Zero(10), kTight);
    EXPECT_NEAR(objective_value(obj, cd.beta_hat), objective_value(obj, sg.beta_hat), 1e-6);
}

TEST(CoordinateFit, OrthonormalLassoIsSoftThreshold) {
    const Eigen::MatrixXd x = testutil::orthonormal_design(50, 6, 13);
    const Eigen::VectorXd y = gaussian_vector(50, 14) * 2.0;
    const Eigen::VectorXd z = x.transpose() * y / 50.0;
    const double lambda = 0.3;
    const FitResult fit = coordinate_fit(Objective{Loss::squared, lasso_penalty(6), lambda, x, y}, std::nullopt, kTight);
    for (Index j = 0; j < 6; ++j) EXPECT_NEAR(fit.beta_hat(j), soft_threshold(z(j), lambda / 2), 1e-6);
}

TEST(CoordinateFit, LassoPathShrinksMonotonically) {
    const Eigen::MatrixXd x = testutil::orthonormal_design(40, 5, 15);
    const Eigen::VectorXd y = gaussian_vector(40, 16) * 3.0;
    Eigen::VectorXd prev = Eigen::VectorXd::Constant(5, 1e300);
    for (double lambda = 0.01; lambda < 5.0; lambda *= 1.5) {
        const FitResult fit =
            coordinate_fit(Objective{Loss::squared, lasso_penalty(5), lambda, x, y}, std::nullopt, kTight);
        for (Index j = 0; j < 5; ++j) EXPECT_LE(std::abs(fit.beta_hat(j)), prev(j) + 1e-9);
        prev = fit.beta_hat.cwiseAbs();
    }
}

TEST(CoordinateFit, ElasticNetStationarity) {
    const Eigen::MatrixXd x = gaussian_matrix(30, 7, 17);
    const Eigen::VectorXd y = gaussian_vector(30, 18);
    const double lambda = 0.2, mix = 0.5;
    const FitResult fit =
        coordinate_fit(Objective{Loss::squared, elastic_net_penalty(7, mix), lambda, x, y}, std::nullopt, kTight);
    // KKT: -(2/n) x_j'r + lambda (mix s_j + 2 (1 - mix) b_j) = 0, |s_j| <= 1.
    const Eigen::VectorXd g = -2.0 / 30.0 * x.transpose() * (y - x * fit.beta_hat);
    for (Index j = 0; j < 7; ++j) {
        const double smooth = g(j) + lambda * 2.0 * (1.0 - mix) * fit.beta_hat(j);
        if (fit.beta_hat(j) != 0.0)
            EXPECT_NEAR(smooth + lambda * mix * std::copysign(1.0, fit.beta_hat(j)), 0.0, 1e-6);
        else
            EXPECT_LE(std::abs(smooth), lambda * mix + 1e-6);
    }
}

TEST(CoordinateFit, RejectsUnsupportedKinds) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(3, 2);
    const Eigen::VectorXd y = vec({1.0, 2.0, 3.0});
    EXPECT_THROW(coordinate_fit(Objective{Loss::squared, scad_penalty(2), 1.0, x, y}), ContractError);
    EXPECT_THROW(coordinate_fit(Objective{Loss::absolute, lasso_penalty(2), 1.0, x, y}), ContractError);
}

TEST(Solvers, LargeLambdaPullsToShifts) {
    const Eigen::MatrixXd x = gaussian_matrix(30, 4, 19);
    const Eigen::VectorXd y = gaussian_vector(30, 20);
    for (auto kind : {PenaltyKind::ridge, PenaltyKind::lasso, PenaltyKind::polynomial}) {
        auto pen = PenaltySpec::make(kind, 4);
        pen.genome.alpha = {0.0, 1.0, 0.0, 0.5, 0.0, 0.0};
        pen.shifts = vec({1.0, -2.0, 0.5, 0.0});
        const FitResult fit =
            subgradient_descent(Objective{Loss::squared, pen, 1e6, x, y}, Eigen::VectorXd::Zero(4), kTight);
        EXPECT_LT((fit.beta_hat - pen.shifts).lpNorm<Eigen::Infinity>(), 1e-4) << to_string(kind);
    }
}

TEST(Solvers, ExcludedColumnsStayZeroAndDropOut) {
    const Eigen::MatrixXd x = gaussian_matrix(30, 5, 21);
    const Eigen::VectorXd y = gaussian_vector(30, 22);
    auto pen = lasso_penalty(5);
    pen.weights(2) = kExclude;
    std::vector<Index> kept{0, 1, 3, 4};
    Eigen::MatrixXd xr(30, 4);
    for (std::size_t k = 0; k < kept.size(); ++k) xr.col(static_cast<Index>(k)) = x.col(kept[k]);
    const FitResult reduced =
        coordinate_fit(Objective{Loss::squared, lasso_penalty(4), 0.05, xr, y}, std::nullopt, kTight);

    const Objective obj{Loss::squared, pen, 0.05, x, y};
    const FitResult cd = coordinate_fit(obj, std::nullopt, kTight);
    const FitResult sg = subgradient_descent(obj, Eigen::VectorXd::Ones(5), kTight);
    EXPECT_EQ(cd.beta_hat(2), 0.0);
    EXPECT_EQ(sg.beta_hat(2), 0.0);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        EXPECT_NEAR(cd.beta_hat(kept[k]), reduced.beta_hat(static_cast<Index>(k)), 1e-8);
        EXPECT_NEAR(sg.beta_hat(kept[k]), reduced.beta_hat(static_cast<Index>(k)), 1e-5);
    }
    auto scad = scad_penalty(5);
    scad.weights(2) = kExclude;
    EXPECT_EQ(lla_fit(Objective{Loss::squared, scad, 0.1, x, y}).beta_hat(2), 0.0);
}

TEST(LlaFit, ScadDerivativeExample) { EXPECT_DOUBLE_EQ(scad_derivative(0.5, 1.0, 3.7), 1.0); }

TEST(LlaFit, OneRoundMatchesWeightedSoftThreshold) {
    const Index n = 60, p = 6;
    const Eigen::MatrixXd x = testutil::orthonormal_design(n, p, 23);
    Eigen::VectorXd beta(p);
    beta << 3.0, -0.9, 0.5, 0.0, 0.0, 1.5;
    const Eigen::VectorXd y = x * beta + 0.3 * gaussian_vector(n, 24);
    const Eigen::VectorXd z = x.transpose() * y / static_cast<double>(n);
    const double lambda = 0.6, a = 3.7;
    const FitResult fit = lla_fit(Objective{Loss::squared, scad_penalty(p, a), lambda, x, y}, std::nullopt,
                                  LlaOptions{1, 1e-6, kTight});
    for (Index j = 0; j < p; ++j) {
        const double init = soft_threshold(z(j), lambda / 2);
        const double want = soft_threshold(z(j), scad_derivative(std::abs(init), lambda, a) / 2);
        EXPECT_NEAR(fit.beta_hat(j), want, 1e-8) << j;
    }
}

TEST(LlaFit, FlatRegionGivesUnpenalizedRefit) {
    const Eigen::MatrixXd x = gaussian_matrix(80, 4, 25);
    const Eigen::VectorXd y = x * vec({5.0, -6.0, 4.0, 7.0}) + 0.1 * gaussian_vector(80, 26);
    const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(y);
    const double lambda = 0.1;  // a * lambda = 0.37, far below every |ols_j|
    const FitResult fit = lla_fit(Objective{Loss::squared, scad_penalty(4), lambda, x, y}, ols,
                                  LlaOptions{10, 1e-6, kTight});
    EXPECT_LT((fit.beta_hat - ols).lpNorm<Eigen::Infinity>(), 1e-8);
    EXPECT_TRUE(fit.converged);
}

TEST(LlaFit, McpAndAbsoluteLossRun) {
    const Eigen::MatrixXd x = gaussian_matrix(60, 5, 27);
    const Eigen::VectorXd y = x * vec({2.0, 0.0, 0.0, -3.0, 0.0}) + gaussian_vector(60, 28);
    const FitResult mcp = lla_fit(Objective{Loss::squared, mcp_penalty(5), 0.3, x, y});
    EXPECT_EQ(mcp.beta_hat(1), 0.0);
    EXPECT_NEAR(mcp.beta_hat(0), 2.0, 0.5);
    const FitResult lad = lla_fit(Objective{Loss::absolute, scad_penalty(5), 0.3, x, y});
    EXPECT_NEAR(lad.beta_hat(3), -3.0, 0.6);
    EXPECT_THROW(lla_fit(Objective{Loss::squared, lasso_penalty(5), 0.3, x, y}), ContractError);
}

TEST(OlsFit, Examples) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 3);
    x.topRows(3) = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd y = vec({1.0, -2.0, 3.0, 0.0});
    EXPECT_LT((ols_fit(x, y).beta_hat - y.head(3)).norm(), 1e-12);

    Eigen::MatrixXd dup = gaussian_matrix(20, 3, 29);
    dup.col(2) = dup.col(1);
    EXPECT_THROW(ols_fit(dup, gaussian_vector(20, 30)), RankError);
    EXPECT_THROW(ols_fit(gaussian_matrix(3, 3, 1), gaussian_vector(3, 2)), RankError);

    const Eigen::MatrixXd xr = gaussian_matrix(50, 6, 31);
    const Eigen::VectorXd yr = gaussian_vector(50, 32);
    const FitResult fit = ols_fit(xr, yr);
    EXPECT_LT((xr.transpose() * (yr - xr * fit.beta_hat)).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(LambdaGrid, Examples) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
    const LambdaGrid g = build_lambda_grid(x, vec({1.0, -1.0}), GridParams{0.01, 100, Spacing::linear});
    EXPECT_DOUBLE_EQ(g.lambda_max, 0.5);
    EXPECT_DOUBLE_EQ(g.values.front(), 0.5);
    EXPECT_NEAR(g.values.back(), 0.005, 1e-15);
    EXPECT_EQ(g.values.size(), 100u);
    for (std::size_t i = 1; i < g.values.size(); ++i) EXPECT_LT(g.values[i], g.values[i - 1]);

    const LambdaGrid scaled = build_lambda_grid(x, vec({3.0, -3.0}), GridParams{0.01, 100, Spacing::linear});
    for (std::size_t i = 0; i < g.values.size(); ++i) EXPECT_NEAR(scaled.values[i], 3.0 * g.values[i], 1e-14);

    const LambdaGrid lg = LambdaGrid::make(2.0, 0.001, 4, Spacing::log);
    EXPECT_NEAR(lg.values[1], 0.2, 1e-14);
    EXPECT_THROW(build_lambda_grid(Eigen::MatrixXd::Zero(3, 2), vec({1.0, 2.0, 3.0}), GridParams{}),
                 DegenerateGridError);
}

TEST(LambdaGrid, PathMaxZeroesTheLasso) {
    const Eigen::MatrixXd x = gaussian_matrix(40, 6, 33);
    const Eigen::VectorXd y = gaussian_vector(40, 34);
    const double lmax = path_lambda_max(x, y, Loss::squared, lasso_penalty(6));
    const FitResult at = coordinate_fit(Objective{Loss::squared, lasso_penalty(6), lmax, x, y});
    EXPECT_TRUE((at.beta_hat.array() == 0.0).all());
    const FitResult below = coordinate_fit(Objective{Loss::squared, lasso_penalty(6), 0.95 * lmax, x, y});
    EXPECT_FALSE((below.beta_hat.array() == 0.0).all());
}

TEST(SelectLambda, SingleGridValue) {
    const Eigen::MatrixXd x = gaussian_matrix(20, 3, 35);
    const Eigen::VectorXd y = gaussian_vector(20, 36);
    const LeastSquaresModel model(x, y);
    PathFitter fitter = [&](double lambda, const Eigen::VectorXd*) {
        return coordinate_fit(model, ridge_penalty(3), lambda);
    };
    const auto sel = select_lambda(fitter, {0.7}, x, y);
    EXPECT_EQ(sel.lambda_hat, 0.7);
    EXPECT_THROW(select_lambda(fitter, {}, x, y), ConfigError);
}

TEST(SelectLambda, NoiselessDataPicksZero) {
    const Eigen::MatrixXd x = gaussian_matrix(40, 4, 37);
    const Eigen::VectorXd y = x * vec({1.0, -2.0, 0.5, 3.0});
    const Eigen::MatrixXd xh = gaussian_matrix(10, 4, 38);
    const Eigen::VectorXd yh = xh * vec({1.0, -2.0, 0.5, 3.0});
    const LeastSquaresModel model(x, y);
    PathFitter fitter = [&](double lambda, const Eigen::VectorXd*) {
        return coordinate_fit(model, ridge_penalty(4), lambda, std::nullopt, kTight);
    };
    EXPECT_EQ(select_lambda(fitter, {1.0, 0.1, 0.01, 0.0}, xh, yh).lambda_hat, 0.0);
}

TEST(SelectLambda, ReturnsTheExhaustiveMinimizer) {
    const Eigen::MatrixXd x = gaussian_matrix(30, 8, 39);
    const Eigen::VectorXd y = x.col(0) * 2.0 + gaussian_vector(30, 40);
    const Eigen::MatrixXd xh = gaussian_matrix(15, 8, 41);
    const Eigen::VectorXd yh = xh.col(0) * 2.0 + gaussian_vector(15, 42);
    const LeastSquaresModel model(x, y);
    const std::vector<double> grid = LambdaGrid::make(1.0, 0.001, 40, Spacing::log).values;
    PathFitter fitter = [&](double lambda, const Eigen::VectorXd*) {
        return coordinate_fit(model, lasso_penalty(8), lambda, std::nullopt, kTight);
    };
    const auto sel = select_lambda(fitter, grid, xh, yh);
    double best = 1e300, best_lambda = 0.0;
    for (double l : grid) {
        const double loss = mean_loss(Loss::squared, xh, yh, fitter(l, nullptr).beta_hat);
        if (loss < best) {
            best = loss;
            best_lambda = l;
        }
    }
    EXPECT_EQ(sel.lambda_hat, best_lambda);
    EXPECT_NEAR(*std::min_element(sel.holdout_loss.begin(), sel.holdout_loss.end()), best, 1e-12);
}

TEST(SolverAgreement, RandomConvexInstances) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Eigen::MatrixXd x = gaussian_matrix(30, 10, 500 + s);
        const Eigen::VectorXd y = gaussian_vector(30, 600 + s);
        for (auto pen : {ridge_penalty(10), lasso_penalty(10), elastic_net_penalty(10)}) {
            const Objective obj{Loss::squared, pen, 0.02 + 0.01 * static_cast<double>(s), x, y};
            const FitResult cd = coordinate_fit(obj, std::nullopt, kTight);
            const FitResult sg = subgradient_descent(obj, Eigen::VectorXd::Zero(10), kTight);
            EXPECT_NEAR(objective_value(obj, cd.beta_hat), objective_value(obj, sg.beta_hat), 1e-6);
            EXPECT_LT((cd.beta_hat - sg.beta_hat).lpNorm<Eigen::Infinity>(), 1e-4);
        }
    }
}
