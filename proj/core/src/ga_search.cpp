#include "shrinkforge/ga_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "shrinkforge/errors.hpp"
#include "shrinkforge/format.hpp"
#include "shrinkforge/parallel.hpp"
#include "shrinkforge/random.hpp"

namespace shrinkforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double f) { return std::isnan(f) ? kInf : f; }

// Orders population members by fitness, then genome.
std::vector<std::size_t> ranking(const std::vector<Genome>& population, const std::vector<double>& fitness) {
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double fa = sanitize(fitness[a]), fb = sanitize(fitness[b]);
        if (fa != fb) return fa < fb;
        if (population[a] != population[b]) return population[a] < population[b];
        return a < b;
    });
    return order;
}

double sup_distance(const Genome& a, const Genome& b) {
    double d = 0.0;
    for (int k = 0; k < Genome::kTerms; ++k) {
        const auto i = static_cast<std::size_t>(k);
        d = std::max(d, std::abs(a.alpha[i] - b.alpha[i]));
    }
    return d;
}

}  // namespace

void GaConfig::validate() const {
    if (population < 2) throw ConfigError("population must be at least 2");
    if (max_generations < 1) throw ConfigError("max_generations must be at least 1");
    if (!(elite_fraction > 0.0 && elite_fraction < 1.0)) throw ConfigError("elite_fraction must lie in (0, 1)");
    if (static_cast<double>(population) * elite_fraction < 1.0)
        throw ConfigError("population * elite_fraction must be at least 1");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw ConfigError("mutation_rate must lie in [0, 1]");
    if (!(mutation_lo <= mutation_hi)) throw ConfigError("mutation bounds out of order");
    if (!(coef_lo >= Genome::kMin && coef_lo < coef_hi && coef_hi <= Genome::kMax))
        throw ConfigError("coefficient bounds must be ordered within [0, 20]");
    if (!(diversity_epsilon >= 0.0)) throw ConfigError("diversity_epsilon must be nonnegative");
    if (!(diversity_share > 0.0 && diversity_share <= 1.0)) throw ConfigError("diversity_share must lie in (0, 1]");
    if (grid_count < 2) throw ConfigError("grid_count must be at least 2");
    if (!(gamma_min > 0.0 && gamma_min < 1.0)) throw ConfigError("gamma_min must lie in (0, 1)");
}

int GaConfig::elite_count() const {
    return static_cast<int>(std::ceil(elite_fraction * static_cast<double>(population) - 1e-12));
}

std::string to_string(GaMode mode) { return mode == GaMode::shifted ? "shifted" : "plain"; }

GaMode resolve_mode(Index n_train_beta, Index p) { return n_train_beta > p ? GaMode::shifted : GaMode::plain; }

std::string to_string(StopReason reason) { return reason == StopReason::diversity ? "diversity" : "budget"; }

GaProblem::GaProblem(const Dataset& ds, const SplitIndices& idx, GaMode mode, const GaConfig& cfg)
    : mode_(mode),
      lambda_(take_rows(ds, idx.train_lambda)),
      beta_(take_rows(ds, idx.train_beta)),
      alpha_(take_rows(ds, idx.train_alpha)),
      model_(beta_.x, beta_.y),
      solver_(cfg.solver) {
    if (idx.train_lambda.empty() || idx.train_beta.empty() || idx.train_alpha.empty())
        throw ConfigError("the GA needs nonempty lambda, beta and alpha training blocks");
    const Index p = ds.p();
    weights_ = Eigen::VectorXd::Ones(p);
    shifts_ = Eigen::VectorXd::Zero(p);

    if (mode_ == GaMode::shifted) {
        // SCAD2 pilot: beta fit on the beta rows, lambda chosen on the lambda rows.
        std::vector<Index> rows = idx.train_beta;
        rows.insert(rows.end(), idx.train_lambda.begin(), idx.train_lambda.end());
        const Dataset pilot_data = take_rows(ds, rows);
        MethodConfig pilot_cfg;
        pilot_cfg.seed = derive_seed(cfg.seed, {name_tag("ga-pilot")});
        std::vector<Index> holdout(idx.train_lambda.size());
        std::iota(holdout.begin(), holdout.end(), static_cast<Index>(idx.train_beta.size()));
        pilot_cfg.lambda_holdout = holdout;
        std::optional<FitResult> scad2;
        try {
            scad2 = fit_method(Method::SCAD2, pilot_data, pilot_cfg);
        } catch (const Error&) {
        }
        try {
            weights_ = adaptive_weights(WeightRule{WeightSource::inverse_ols, 1.0}, ols_fit(beta_.x, beta_.y));
        } catch (const Error&) {
            if (!scad2) throw;
            weights_ = adaptive_weights(WeightRule{WeightSource::inverse_scad2, 1.0}, *scad2);
        }
        if (!scad2) throw DivergenceError("SCAD2 pilot for the penalty shifts failed");
        shifts_ = scad2->beta_hat;
    }

    grid_ = build_lambda_grid(beta_.x, beta_.y, GridParams{cfg.gamma_min, cfg.grid_count, Spacing::linear}).values;

    PenaltySpec init = mode_ == GaMode::shifted ? lasso_penalty(p) : ridge_penalty(p);
    init.weights = weights_;
    init.shifts = shifts_;
    init_path_.reserve(grid_.size());
    std::optional<Eigen::VectorXd> warm;
    for (double lambda : grid_) {
        FitResult fit = coordinate_fit(model_, init, lambda, warm, solver_);
        warm = fit.beta_hat;
        init_path_.push_back(std::move(fit.beta_hat));
    }
}

PenaltySpec GaProblem::penalty_for(const Genome& genome) const {
    PenaltySpec spec = polynomial_penalty(weights_.size(), genome);
    spec.weights = weights_;
    spec.shifts = shifts_;
    return spec;
}

std::vector<Genome> init_population(const GaConfig& cfg) {
    if (cfg.population < 2) throw ConfigError("population must be at least 2");
    std::vector<Genome> pop(static_cast<std::size_t>(cfg.population));
    Rng rng = make_rng(derive_seed(cfg.seed, {name_tag("init-population")}));
    std::uniform_real_distribution<double> draw(cfg.coef_lo, cfg.coef_hi);
    for (auto& g : pop)
        for (auto& a : g.alpha) a = draw(rng);
    return pop;
}

FitnessRecord evaluate_penalty(const PenaltySpec& penalty, const GaProblem& problem) {
    FitnessRecord rec;
    rec.genome = penalty.genome;
    rec.fitness = kInf;
    const auto& grid = problem.grid();
    try {
        double best_loss = kInf;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const FitResult fit =
                subgradient_descent(problem.model(), penalty, grid[g], problem.init_path()[g], problem.solver());
            const double loss = mean_loss(Loss::squared, problem.train_lambda().x, problem.train_lambda().y,
                                          fit.beta_hat);
            if (loss < best_loss) {  // strict: ties keep the larger lambda
                best_loss = loss;
                rec.lambda_hat = grid[g];
                rec.beta_hat = fit.beta_hat;
            }
        }
        if (rec.beta_hat.size() == 0) return rec;
        const Eigen::VectorXd r = problem.train_alpha().y - problem.train_alpha().x * rec.beta_hat;
        rec.fitness = sanitize(r.squaredNorm());
    } catch (const Error&) {
        rec.fitness = kInf;
    }
    return rec;
}

FitnessRecord evaluate_genome(const Genome& genome, const GaProblem& problem) {
    if (!genome.valid()) throw DomainError("genome coefficients must lie in [0, 20]");
    return evaluate_penalty(problem.penalty_for(genome), problem);
}

std::vector<Genome> step_generation(const std::vector<Genome>& population, const std::vector<double>& fitness,
                                    const GaConfig& cfg, int generation) {
    if (population.size() != fitness.size()) throw DomainError("one fitness value per genome is required");
    if (population.empty()) throw DomainError("empty population");
    const std::size_t m = population.size();
    const std::vector<std::size_t> order = ranking(population, fitness);
    const std::size_t elites = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(cfg.elite_fraction * static_cast<double>(m) - 1e-12)), 1, m);

    std::vector<Genome> next;
    next.reserve(m);
    for (std::size_t i = 0; i < elites; ++i) next.push_back(population[order[i]]);

    std::vector<std::size_t> pool(order.begin() + static_cast<std::ptrdiff_t>(elites), order.end());
    if (pool.empty()) pool = order;

    for (std::size_t slot = elites; slot < m; ++slot) {
        Rng rng = make_rng(derive_seed(cfg.seed, {name_tag("child"), static_cast<std::uint64_t>(generation), slot}));
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const Genome& a = population[pool[pick(rng)]];
        const Genome& b = population[pool[pick(rng)]];
        std::bernoulli_distribution coin(0.5);
        std::bernoulli_distribution mutate(cfg.mutation_rate);
        std::uniform_real_distribution<double> shift(cfg.mutation_lo, cfg.mutation_hi);
        Genome child;
        for (std::size_t k = 0; k < child.alpha.size(); ++k) {
            child.alpha[k] = coin(rng) ? a.alpha[k] : b.alpha[k];
            if (mutate(rng)) child.alpha[k] += shift(rng);
            child.alpha[k] = std::clamp(child.alpha[k], cfg.coef_lo, cfg.coef_hi);
        }
        next.push_back(child);
    }
    return next;
}

GaRunResult run_ga(const GaProblem& problem, const GaConfig& cfg, const std::optional<std::vector<Genome>>& initial) {
    cfg.validate();
    std::vector<Genome> pop = initial ? *initial : init_population(cfg);
    if (pop.size() < 2) throw ConfigError("population must be at least 2");
    for (auto& g : pop)
        if (!g.valid()) throw ConfigError("initial genomes must lie in [0, 20]");

    GaRunResult out;
    out.mode = problem.mode();
    out.best.fitness = kInf;
    bool have_best = false;
    std::map<Genome, FitnessRecord> cache;

    for (int gen = 0; gen < cfg.max_generations; ++gen) {
        std::vector<Genome> todo;
        for (const auto& g : pop)
            if (!cache.contains(g) && std::find(todo.begin(), todo.end(), g) == todo.end()) todo.push_back(g);
        std::vector<FitnessRecord> fresh(todo.size());
        parallel_for(todo.size(), cfg.jobs, [&](std::size_t i) { fresh[i] = evaluate_genome(todo[i], problem); });
        for (std::size_t i = 0; i < todo.size(); ++i) cache.emplace(todo[i], std::move(fresh[i]));

        std::vector<double> fitness(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) fitness[i] = sanitize(cache.at(pop[i]).fitness);
        const std::vector<std::size_t> order = ranking(pop, fitness);
        const FitnessRecord& gen_best = cache.at(pop[order.front()]);
        if (!have_best || sanitize(gen_best.fitness) < sanitize(out.best.fitness)) {
            out.best = gen_best;
            have_best = true;
        }

        GenerationLog entry;
        entry.generation = gen;
        entry.best_fitness = sanitize(out.best.fitness);
        entry.best_genome = out.best.genome;
        double sum = 0.0;
        std::size_t finite = 0;
        for (double f : fitness)
            if (std::isfinite(f)) {
                sum += f;
                ++finite;
            }
        entry.mean_fitness = finite ? sum / static_cast<double>(finite) : kInf;
        out.log.push_back(entry);
        out.best_per_generation.push_back(entry.best_fitness);
        out.generations_run = gen + 1;

        const Genome& lead = pop[order.front()];
        std::size_t close = 0;
        for (const auto& g : pop) close += sup_distance(g, lead) <= cfg.diversity_epsilon;
        if (static_cast<double>(close) >= cfg.diversity_share * static_cast<double>(pop.size())) {
            out.stop_reason = StopReason::diversity;
            break;
        }
        out.stop_reason = StopReason::budget;
        if (gen + 1 == cfg.max_generations) break;
        pop = step_generation(pop, fitness, cfg, gen);
    }

    out.final_genome = out.best.genome;
    out.final_penalty = problem.penalty_for(out.best.genome);
    out.final_fit.method = "GA";
    out.final_fit.beta_hat = out.best.beta_hat;
    out.final_fit.lambda_hat = out.best.lambda_hat;
    out.final_fit.converged = std::isfinite(out.best.fitness);
    out.final_fit.iterations = out.generations_run;
    if (out.final_fit.beta_hat.size() > 0) out.final_fit.refresh_zero_set();
    return out;
}

GaRunResult run_ga(const Dataset& ds, const SplitIndices& idx, const GaConfig& cfg,
                   const std::optional<std::vector<Genome>>& initial) {
    const GaProblem problem(ds, idx, resolve_mode(static_cast<Index>(idx.train_beta.size()), ds.p()), cfg);
    return run_ga(problem, cfg, initial);
}

void write_ga_log(std::ostream& out, const GaRunResult& result) {
    for (const auto& e : result.log) {
        nlohmann::json line{{"generation", e.generation},
                            {"best_fitness", e.best_fitness},
                            {"mean_fitness", e.mean_fitness},
                            {"best_genome", std::vector<double>(e.best_genome.alpha.begin(), e.best_genome.alpha.end())}};
        out << line.dump() << '\n';
    }
}

std::vector<ComparisonRow> compare_methods(const Dataset& ds, const SplitIndices& idx, const GaRunResult& ga,
                                           const std::vector<Method>& methods, const MethodConfig& config) {
    const Dataset train = take_rows(ds, idx.train);
    const Dataset test = take_rows(ds, idx.test);
    std::vector<ComparisonRow> rows;

    ComparisonRow ga_row{"GA", kInf, false, ""};
    if (ga.final_fit.beta_hat.size() == ds.p()) {
        ga_row.mspe = mean_loss(Loss::squared, test.x, test.y, ga.final_fit.beta_hat);
        ga_row.ran = true;
    } else {
        ga_row.note = "no finite GA fit";
    }
    rows.push_back(ga_row);

    // Positions of the lambda and alpha blocks inside the training rows.
    std::vector<Index> holdout;
    if (!idx.train_lambda.empty() || !idx.train_alpha.empty()) {
        const Index n_lambda = static_cast<Index>(idx.train_lambda.size());
        const Index n_beta = static_cast<Index>(idx.train_beta.size());
        for (Index i = 0; i < n_lambda; ++i) holdout.push_back(i);
        for (Index i = n_lambda + n_beta; i < train.n(); ++i) holdout.push_back(i);
    }

    for (Method m : methods) {
        ComparisonRow row{to_string(m), kInf, false, ""};
        MethodConfig mc = config;
        mc.seed = derive_seed(config.seed, {name_tag(to_string(m))});
        if (uses_holdout_selection(m) && !holdout.empty()) mc.lambda_holdout = holdout;
        try {
            const FitResult fit = fit_method(m, train, mc);
            row.mspe = mean_loss(Loss::squared, test.x, test.y, fit.beta_hat);
            row.ran = true;
        } catch (const Error& e) {
            row.note = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    out << kSchemaHeader << '\n' << "method,mspe,note\n";
    for (const auto& r : rows) {
        std::string note = r.note;
        std::replace(note.begin(), note.end(), ',', ';');
        out << r.method << ',' << (r.ran ? format_double(r.mspe) : std::string("nan")) << ',' << note << '\n';
    }
}

}  // namespace shrinkforge
