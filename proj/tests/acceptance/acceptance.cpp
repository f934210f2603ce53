// Runs the ten acceptance criteria and prints one PASS/FAIL line each.
// Usage: acceptance [criterion numbers...]  (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "shrinkforge/diagnostics.hpp"
#include "shrinkforge/errors.hpp"
#include "shrinkforge/format.hpp"
#include "shrinkforge/ga_search.hpp"
#include "shrinkforge/io.hpp"
#include "shrinkforge/solver.hpp"
#include "shrinkforge/stability.hpp"

using namespace shrinkforge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

Eigen::MatrixXd gaussian(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = z(rng);
    return m;
}

// 1. Accelerated proximal and coordinate solvers agree on ridge, lasso and
// elastic net.
Outcome solver_agreement() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> lam(0.01, 1.0);
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const Eigen::MatrixXd x = gaussian(30, 10, rng);
        const Eigen::VectorXd y = gaussian(30, 1, rng).col(0) * 2.0 + x.col(0) * 3.0;
        for (const PenaltySpec& pen : {ridge_penalty(10), lasso_penalty(10), elastic_net_penalty(10, 0.5)}) {
            const Objective obj{Loss::squared, pen, lam(rng), x, y};
            const SolverOptions tight{1e-12, 100000, 1e-10};
            const FitResult a = subgradient_descent(obj, Eigen::VectorXd::Zero(10), tight);
            const FitResult b = coordinate_fit(obj, std::nullopt, tight);
            worst = std::max(worst, std::abs(objective_value(obj, a.beta_hat) - objective_value(obj, b.beta_hat)));
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst <= 1e-6 && secs < 30.0,
            "max objective gap " + fmt(worst) + " over 150 fits in " + fmt(secs) + " s"};
}

// 2. Ridge stationarity and the orthonormal lasso soft-threshold.
Outcome closed_forms() {
    std::mt19937_64 rng(202);
    const Index n = 40, p = 6;
    const Eigen::MatrixXd x = gaussian(n, p, rng);
    const Eigen::VectorXd y = gaussian(n, 1, rng).col(0) + x * Eigen::VectorXd::LinSpaced(p, -2.0, 2.0);
    const double lambda = 0.3;
    const SolverOptions tight{1e-13, 100000, 1e-12};
    const FitResult ridge = coordinate_fit(Objective{Loss::squared, ridge_penalty(p), lambda, x, y}, std::nullopt, tight);
    const Eigen::MatrixXd a = x.transpose() * x + static_cast<double>(n) * lambda * Eigen::MatrixXd::Identity(p, p);
    const double ridge_res = (a * ridge.beta_hat - x.transpose() * y).lpNorm<Eigen::Infinity>();

    // Orthonormal columns scaled so X'X = nI.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(n, p, rng));
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p) * std::sqrt(static_cast<double>(n));
    const Eigen::VectorXd yq = gaussian(n, 1, rng).col(0) + q * Eigen::VectorXd::LinSpaced(p, -1.5, 1.5);
    const FitResult lasso =
        coordinate_fit(Objective{Loss::squared, lasso_penalty(p), lambda, q, yq}, std::nullopt, tight);
    const Eigen::VectorXd z = q.transpose() * yq / static_cast<double>(n);
    double lasso_err = 0.0;
    for (Index j = 0; j < p; ++j)
        lasso_err = std::max(lasso_err, std::abs(lasso.beta_hat(j) - soft_threshold(z(j), lambda / 2.0)));
    return {ridge_res <= 1e-6 && lasso_err <= 1e-6,
            "ridge stationarity residual " + fmt(ridge_res) + ", lasso soft-threshold error " + fmt(lasso_err)};
}

// 3. tot = s tr + (1 - s) fa, plus the published .11 row.
Outcome metric_identity() {
    std::mt19937_64 rng(303);
    int exact = 0;
    for (int t = 0; t < 1000; ++t) {
        const Index p = 1 + static_cast<Index>(rng() % 80);
        Eigen::VectorXd truth(p), est(p);
        for (Index j = 0; j < p; ++j) {
            truth(j) = rng() % 2 ? 0.0 : 1.0 + static_cast<double>(j);
            est(j) = rng() % 3 ? 0.0 : 0.7;
        }
        FitResult f;
        f.beta_hat = est;
        f.refresh_zero_set();
        const SelectionMetrics m = selection_metrics(f, truth);
        const double s = static_cast<double>(m.counts.zero_true) / static_cast<double>(p);
        exact += std::abs(m.tot - (s * m.tr + (1.0 - s) * m.fa)) <= 1e-15;
    }
    const double published = 1.0 * 0.1 + 0.01 * 0.9;
    const bool rounds = std::round(published * 100.0) / 100.0 == 0.11;
    return {exact == 1000 && rounds,
            std::to_string(exact) + "/1000 identities hold; 1 x .1 + .01 x .9 = " + fmt(published)};
}

Dataset sim_data(Index n, Index p, double sparsity, std::uint64_t seed) {
    SimConfig c;
    c.n = n;
    c.p = p;
    c.sparsity = sparsity;
    c.tails = Tails::light;
    c.seed = seed;
    return generate_dataset(c);
}

// 4. Minimum mean tau = 0 instability near the noise floor.
Outcome instability_floor() {
    const Dataset ds = sim_data(500, 100, 0.9, 404);
    InstabilityConfig cfg;
    cfg.tau_values = {0.0};
    cfg.replicates = 20;
    cfg.methods = {Method::LM, Method::RR, Method::L, Method::EN, Method::AL,
                   Method::AEN, Method::SCAD2, Method::MCP};
    cfg.seed = 4040;
    const InstabilityResult res = instability_curves(ds, cfg);
    double best = std::numeric_limits<double>::infinity();
    std::string who, all;
    for (const auto& c : res.curves) {
        all += c.method + "=" + fmt(c.points[0].mean) + " ";
        if (c.points[0].mean < best) {
            best = c.points[0].mean;
            who = c.method;
        }
    }
    return {best >= 0.9 && best <= 1.5, "min " + fmt(best) + " (" + who + "); " + all};
}

// 5. Zero-selection quality of the adaptive and folded-concave methods.
Outcome selection_quality() {
    const Dataset ds = sim_data(500, 100, 0.5, 505);
    InstabilityConfig cfg;
    cfg.tau_values = {0.0};
    cfg.replicates = 20;
    cfg.methods = {Method::AL, Method::AEN, Method::SCAD2, Method::MCP};
    cfg.seed = 5050;
    const InstabilityResult res = instability_curves(ds, cfg);
    bool ok = res.metrics.size() == 4;
    std::string detail;
    for (const auto& [method, m] : res.metrics) {
        const bool good = m.tot >= 0.47 && m.tot <= 0.53 && m.tr >= 0.95 && m.fa <= 0.02;
        ok = ok && good;
        detail += method + " tot=" + fmt(m.tot) + " tr=" + fmt(m.tr) + " fa=" + fmt(m.fa) + (good ? "" : " (out)") + "; ";
    }
    return {ok, detail};
}

SplitIndices ga_split(Index n, Index lam, Index beta, Index alpha, Index test, std::uint64_t seed) {
    SplitSpec s;
    s.n_train = lam + beta + alpha;
    s.n_test = test;
    s.n_train_lambda = lam;
    s.n_train_beta = beta;
    s.n_train_alpha = alpha;
    s.seed = seed;
    if (s.n_train + s.n_test != n) throw ConfigError("split does not cover the data");
    return split(n, s);
}

// 6. Elitism keeps the best fitness from rising.
Outcome ga_monotone() {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed : {61u, 62u, 63u}) {
        const Dataset ds = sim_data(80, 10, 0.5, seed);
        const SplitIndices idx = ga_split(80, 15, 40, 15, 10, seed + 1);
        GaConfig cfg;
        cfg.population = 20;
        cfg.max_generations = 12;
        cfg.diversity_epsilon = 0.0;
        cfg.diversity_share = 1.0;
        cfg.grid_count = 30;
        cfg.seed = seed;
        const GaRunResult r = run_ga(ds, idx, cfg);
        bool mono = r.generations_run >= 10;
        for (std::size_t g = 1; g < r.best_per_generation.size(); ++g)
            mono = mono && r.best_per_generation[g] <= r.best_per_generation[g - 1];
        ok = ok && mono;
        detail += "seed " + std::to_string(seed) + ": " + std::to_string(r.generations_run) + " generations " +
                  (mono ? "monotone" : "NOT monotone") + "; ";
    }
    return {ok, detail};
}

// 7. The GA predictor against the best standard method.
Outcome ga_dominance() {
    int wins = 0;
    std::string detail;
    for (std::uint64_t k = 0; k < 5; ++k) {
        const std::uint64_t seed = 700 + k;
        const Dataset ds = sim_data(150, 100, 0.5, seed);
        const SplitIndices idx = ga_split(150, 9, 113, 13, 15, seed * 31);
        GaConfig cfg;
        cfg.population = 50;
        cfg.max_generations = 5;
        cfg.seed = seed * 17;
        const GaRunResult r = run_ga(ds, idx, cfg);
        MethodConfig mc;
        mc.seed = seed * 13;
        const auto rows = compare_methods(ds, idx, r, standard_methods(), mc);
        double best = std::numeric_limits<double>::infinity();
        std::string who;
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i].ran && rows[i].mspe < best) {
                best = rows[i].mspe;
                who = rows[i].method;
            }
        const bool win = rows[0].ran && rows[0].mspe <= 1.10 * best;
        wins += win;
        detail += "seed " + std::to_string(seed) + ": GA " + fmt(rows[0].mspe) + " vs " + who + " " + fmt(best) +
                  (win ? "" : " (lost)") + "; ";
    }
    return {wins >= 4, std::to_string(wins) + "/5 within 1.10x; " + detail};
}

// 8. In plain mode the search does at least as well as the ridge genome.
Outcome ga_ridge() {
    const Dataset ds = sim_data(40, 100, 0.5, 808);
    const SplitIndices idx = ga_split(40, 2, 30, 4, 4, 8080);
    GaConfig cfg;
    cfg.population = 50;
    cfg.max_generations = 3;
    cfg.seed = 80800;
    const GaProblem problem(ds, idx, resolve_mode(30, 100), cfg);
    const GaRunResult r = run_ga(problem, cfg);
    Genome ridge;
    ridge.alpha = {0, 1, 0, 0, 0, 0};
    const double ridge_fit = evaluate_genome(ridge, problem).fitness;
    std::string genome;
    for (double a : r.final_genome.alpha) genome += fmt(a) + " ";
    return {problem.mode() == GaMode::plain && r.best.fitness <= ridge_fit,
            "mode " + to_string(problem.mode()) + ", GA fitness " + fmt(r.best.fitness) + " vs ridge genome " +
                fmt(ridge_fit) + "; final genome ( " + genome + ")"};
}

// 9. Oracle behaviour of SCAD under the rate schedule.
Outcome oracle_check() {
    OracleConfig cfg;
    cfg.penalty = PenaltyKind::scad;
    cfg.n_values = {100, 200, 500};
    cfg.replicates = 100;
    cfg.seed = 909;
    const OracleReport r = oracle_sweep(cfg);
    const OracleRow& last = r.rows.back();
    return {last.n == 500 && last.zero_recovery_rate >= 0.9 && last.coverage >= 0.92 && last.coverage <= 0.98,
            "n=500 recovery " + fmt(last.zero_recovery_rate) + ", coverage " + fmt(last.coverage) + "; " + r.trend};
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), dir).string(), read_text(e.path()));
    std::sort(files.begin(), files.end());
    return files;
}

// 10. Every command reproduces its bytes.
Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "shrinkforge_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path data_dir = root / "data";
    write_text(root / "base.ini", R"(master_seed = 1010
[simulation]
n_values = 60
p = 8
sparsity = 0.5
tails = light, heavy
covariance = identity
[instability]
methods = L, SCAD2, LADL
tau = 0, 0.5
replicates = 3
[ga]
population = 10
generations = 2
grid_count = 15
n = 60
n_train_lambda = 10
n_train_beta = 30
n_train_alpha = 10
n_test = 10
compare = RR, L, SCAD2
[oracle]
n_values = 60, 120
replicates = 3
pilot = scad2
)");
    std::ostringstream sink;
    if (cli::run_cli({"simulate", "--config", (root / "base.ini").string(), "--out", data_dir.string()}, sink, sink) != 0)
        return {false, "simulate failed: " + sink.str()};
    write_text(root / "real.ini", "master_seed = 1010\n[real]\ndata = " +
                                      (data_dir / "dataset_n60_s0.5_light_identity.csv").string() +
                                      "\nsizes = 40, 60\nmethods = RR, L, LM\ntau = 0, 0.4\nreplicates = 2\n");

    const std::vector<std::pair<std::string, std::string>> runs{
        {"simulate", "base.ini"}, {"instability", "base.ini"}, {"ga", "base.ini"},
        {"oracle", "base.ini"},   {"real", "real.ini"}};
    std::string detail;
    bool ok = true;
    for (const auto& [cmd, ini] : runs) {
        std::vector<std::pair<std::string, std::string>> first, second;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = root / (cmd + std::to_string(rep));
            std::ostringstream log;
            const int code = cli::run_cli({cmd, "--config", (root / ini).string(), "--out", out.string()}, log, log);
            if (code != 0) return {false, cmd + " exited " + std::to_string(code) + ": " + log.str()};
            (rep == 0 ? first : second) = snapshot(out);
        }
        const bool same = !first.empty() && first == second;
        ok = ok && same;
        detail += cmd + " " + std::to_string(first.size()) + " files " + (same ? "identical" : "DIFFER") + "; ";
    }
    fs::remove_all(root);
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"solver oracle agreement", solver_agreement},
        {"closed-form anchors", closed_forms},
        {"metric identity", metric_identity},
        {"instability floor", instability_floor},
        {"selection quality", selection_quality},
        {"GA elitism monotonicity", ga_monotone},
        {"GA dominance", ga_dominance},
        {"GA ridge-recovery tendency", ga_ridge},
        {"oracle diagnostic", oracle_check},
        {"determinism", determinism},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!wanted.empty() && !wanted.contains(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::cout << "criterion " << id << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL") << " - "
                  << o.detail << " [" << fmt(secs) << " s]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
