#include <benchmark/benchmark.h>

#include "shrinkforge/ga_search.hpp"
#include "shrinkforge/solver.hpp"

using namespace shrinkforge;

namespace {

Dataset make_data(Index n, Index p) {
    SimConfig c;
    c.n = n;
    c.p = p;
    c.sparsity = 0.5;
    c.seed = 1;
    return generate_dataset(c);
}

}  // namespace

static void BM_CoordinateLasso(benchmark::State& state) {
    const Dataset ds = make_data(state.range(0), state.range(1));
    const LeastSquaresModel model(ds.x, ds.y);
    const PenaltySpec pen = lasso_penalty(ds.p());
    for (auto _ : state) {
        FitResult fit = coordinate_fit(model, pen, 0.05, std::nullopt, SolverOptions{1e-10, 20000, 1e-10});
        benchmark::DoNotOptimize(fit.beta_hat.data());
    }
}
BENCHMARK(BM_CoordinateLasso)->Args({150, 100})->Args({500, 100});

static void BM_AcceleratedPolynomial(benchmark::State& state) {
    const Dataset ds = make_data(state.range(0), state.range(1));
    const LeastSquaresModel model(ds.x, ds.y);
    Genome g;
    g.alpha = {1, 1, 0.5, 0.2, 0.1, 0.05};
    const PenaltySpec pen = polynomial_penalty(ds.p(), g);
    const Eigen::VectorXd init = Eigen::VectorXd::Zero(ds.p());
    for (auto _ : state) {
        FitResult fit = subgradient_descent(model, pen, 0.05, init, SolverOptions{1e-8, 5000, 1e-10});
        benchmark::DoNotOptimize(fit.beta_hat.data());
    }
}
BENCHMARK(BM_AcceleratedPolynomial)->Args({150, 100})->Args({500, 100});

static void BM_AbsoluteLossLasso(benchmark::State& state) {
    const Dataset ds = make_data(state.range(0), state.range(1));
    const Objective obj{Loss::absolute, lasso_penalty(ds.p()), 0.05, ds.x, ds.y};
    const Eigen::VectorXd init = Eigen::VectorXd::Zero(ds.p());
    for (auto _ : state) {
        FitResult fit = subgradient_descent(obj, init, SolverOptions{1e-8, 1000, 1e-10});
        benchmark::DoNotOptimize(fit.beta_hat.data());
    }
}
BENCHMARK(BM_AbsoluteLossLasso)->Args({150, 20});

static void BM_EvaluateGenome(benchmark::State& state) {
    const Dataset ds = make_data(150, 100);
    SplitSpec s{135, 15, 9, 113, 13, 3};
    const SplitIndices idx = split(ds.n(), s);
    GaConfig cfg;
    const GaProblem problem(ds, idx, resolve_mode(113, 100), cfg);
    Genome g;
    g.alpha = {3, 8, 1, 0.5, 2, 0.1};
    for (auto _ : state) {
        FitnessRecord rec = evaluate_genome(g, problem);
        benchmark::DoNotOptimize(rec.fitness);
    }
}
BENCHMARK(BM_EvaluateGenome)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
