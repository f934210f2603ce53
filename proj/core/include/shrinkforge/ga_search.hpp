#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shrinkforge/data_model.hpp"
#include "shrinkforge/methods.hpp"
#include "shrinkforge/solver.hpp"

namespace shrinkforge {

struct GaConfig {
    int population = 150;
    int max_generations = 10;
    double elite_fraction = 0.2;
    double mutation_rate = 0.1;  // per component
    double mutation_lo = -2.0;
    double mutation_hi = 2.0;
    double coef_lo = Genome::kMin;
    double coef_hi = Genome::kMax;
    /// Stop once 95% of the population lies within this sup-norm distance
    /// of the best genome.
    double diversity_epsilon = 0.05;
    double diversity_share = 0.95;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    int grid_count = 100;
    double gamma_min = 0.001;
    SolverOptions solver{1e-8, 5000, 1e-10};

    void validate() const;
    int elite_count() const;
};

/// shifted: n_train_beta > p, w_j = 1/|OLS_j| and shifts from a SCAD2 pilot.
/// plain: w_j = 1 and no shifts.
enum class GaMode { shifted, plain };

std::string to_string(GaMode mode);
GaMode resolve_mode(Index n_train_beta, Index p);

struct FitnessRecord {
    Genome genome;
    double lambda_hat = 0.0;
    Eigen::VectorXd beta_hat;
    /// Sum of squared errors on the alpha rows; +inf when the fit failed.
    double fitness = 0.0;
};

/// Everything a genome evaluation shares: the three training blocks, the
/// weights and shifts, the lambda grid and the initialization path.
class GaProblem {
public:
    GaProblem(const Dataset& ds, const SplitIndices& idx, GaMode mode, const GaConfig& cfg);

    GaMode mode() const { return mode_; }
    const Dataset& train_lambda() const { return lambda_; }
    const Dataset& train_beta() const { return beta_; }
    const Dataset& train_alpha() const { return alpha_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    const Eigen::VectorXd& shifts() const { return shifts_; }
    const std::vector<double>& grid() const { return grid_; }
    /// Lasso (shifted mode) or ridge (plain mode) solution at each grid value.
    const std::vector<Eigen::VectorXd>& init_path() const { return init_path_; }
    const LeastSquaresModel& model() const { return model_; }
    const SolverOptions& solver() const { return solver_; }

    /// The penalty a genome induces here (weights and shifts attached).
    PenaltySpec penalty_for(const Genome& genome) const;

private:
    GaMode mode_;
    Dataset lambda_, beta_, alpha_;
    LeastSquaresModel model_;
    Eigen::VectorXd weights_, shifts_;
    std::vector<double> grid_;
    std::vector<Eigen::VectorXd> init_path_;
    SolverOptions solver_;
};

std::vector<Genome> init_population(const GaConfig& cfg);

/// Fits the penalty on the beta rows at every grid value (subgradient
/// descent from the initialization path), picks lambda by mean squared
/// error on the lambda rows and scores the SSE on the alpha rows.
FitnessRecord evaluate_genome(const Genome& genome, const GaProblem& problem);

/// Same protocol for any convex penalty carrying the problem's weights and
/// shifts; evaluate_genome is this with polynomial_penalty.
FitnessRecord evaluate_penalty(const PenaltySpec& penalty, const GaProblem& problem);

/// Elites (lowest fitness, ties by genome order) pass unchanged; the other
/// slots are uniform crossovers of two non-elite parents, then mutated.
std::vector<Genome> step_generation(const std::vector<Genome>& population, const std::vector<double>& fitness,
                                    const GaConfig& cfg, int generation);

enum class StopReason { diversity, budget };

std::string to_string(StopReason reason);

struct GenerationLog {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    Genome best_genome;
};

struct GaRunResult {
    GaMode mode = GaMode::plain;
    std::vector<double> best_per_generation;
    std::vector<GenerationLog> log;
    FitnessRecord best;
    Genome final_genome;
    FitResult final_fit;
    PenaltySpec final_penalty;
    int generations_run = 0;
    StopReason stop_reason = StopReason::budget;
};

GaRunResult run_ga(const GaProblem& problem, const GaConfig& cfg,
                   const std::optional<std::vector<Genome>>& initial = std::nullopt);

/// Builds the problem from the dataset and split and runs the search.
GaRunResult run_ga(const Dataset& ds, const SplitIndices& idx, const GaConfig& cfg,
                   const std::optional<std::vector<Genome>>& initial = std::nullopt);

/// One JSON object per generation.
void write_ga_log(std::ostream& out, const GaRunResult& result);

struct ComparisonRow {
    std::string method;
    double mspe = 0.0;
    bool ran = true;
    std::string note;
};

/// Test-set MSPE of the GA predictor and of each standard method. Standard
/// methods fit on every training row; SCAD2/MCP choose lambda on the lambda
/// and alpha rows and fit beta on the beta rows.
std::vector<ComparisonRow> compare_methods(const Dataset& ds, const SplitIndices& idx, const GaRunResult& ga,
                                           const std::vector<Method>& methods, const MethodConfig& config);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

}  // namespace shrinkforge
