#include "shrinkforge/methods.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shrinkforge/errors.hpp"
#include "shrinkforge/random.hpp"

namespace shrinkforge {

std::string to_string(Method m) {
    switch (m) {
        case Method::LM: return "LM";
        case Method::RR: return "RR";
        case Method::L: return "L";
        case Method::EN: return "EN";
        case Method::AL: return "AL";
        case Method::AEN: return "AEN";
        case Method::LADL: return "LADL";
        case Method::SCAD1: return "SCAD1";
        case Method::ASCAD1: return "ASCAD1";
        case Method::SCAD2: return "SCAD2";
        case Method::MCP: return "MCP";
        case Method::POLY: return "POLY";
    }
    return "LM";
}

Method method_from_string(const std::string& name) {
    for (Method m : {Method::LM, Method::RR, Method::L, Method::EN, Method::AL, Method::AEN, Method::LADL,
                     Method::SCAD1, Method::ASCAD1, Method::SCAD2, Method::MCP, Method::POLY})
        if (to_string(m) == name) return m;
    throw ConfigError("unknown method '" + name + "'");
}

const std::vector<Method>& standard_methods() {
    static const std::vector<Method> roster{Method::LM,    Method::RR,     Method::L,     Method::EN,
                                            Method::AL,    Method::AEN,    Method::LADL,  Method::SCAD1,
                                            Method::ASCAD1, Method::SCAD2, Method::MCP};
    return roster;
}

bool requires_more_rows_than_columns(Method m) {
    return m == Method::LM || m == Method::LADL || m == Method::SCAD1 || m == Method::ASCAD1;
}

bool uses_holdout_selection(Method m) { return m == Method::SCAD2 || m == Method::MCP; }

namespace {

double default_gamma(const Dataset& ds, const MethodConfig& config) {
    if (config.gamma_min) return *config.gamma_min;
    return ds.n() > ds.p() ? 0.001 : 0.01;
}

std::vector<Index> complement(Index n, const std::vector<Index>& taken) {
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (Index i : taken) {
        if (i < 0 || i >= n) throw ConfigError("holdout index out of range");
        used[static_cast<std::size_t>(i)] = 1;
    }
    std::vector<Index> rest;
    for (Index i = 0; i < n; ++i)
        if (!used[static_cast<std::size_t>(i)]) rest.push_back(i);
    return rest;
}

// Fits one grid point. Squared-loss fits share one set of sufficient statistics.
class PenalizedPath {
public:
    PenalizedPath(const Dataset& data, Loss loss, const PenaltySpec& penalty, const MethodConfig& config,
                  bool final_fit)
        : data_(data), loss_(loss), penalty_(penalty), config_(config), final_fit_(final_fit) {
        if (loss_ == Loss::squared) model_.emplace(data.x, data.y);
    }

    FitResult operator()(double lambda, const Eigen::VectorXd* warm) const {
        const Index p = data_.p();
        const Eigen::VectorXd start = warm ? *warm : Eigen::VectorXd::Zero(p);
        if (penalty_.folded_concave()) {
            LlaOptions lla;
            lla.inner = solver_options();
            // Each grid point starts from its own lasso solution, not the previous fit.
            Objective obj{loss_, penalty_, lambda, data_.x, data_.y};
            return lla_fit(obj, std::nullopt, lla);
        }
        if (loss_ == Loss::squared) {
            const bool coordinate = penalty_.kind == PenaltyKind::ridge || penalty_.kind == PenaltyKind::lasso ||
                                    penalty_.kind == PenaltyKind::elastic_net;
            if (coordinate) return coordinate_fit(*model_, penalty_, lambda, start, config_.solver);
            return subgradient_descent(*model_, penalty_, lambda, start, config_.solver);
        }
        Objective obj{loss_, penalty_, lambda, data_.x, data_.y};
        return subgradient_descent(obj, start, solver_options());
    }

private:
    SolverOptions solver_options() const {
        SolverOptions options = config_.solver;
        if (loss_ == Loss::absolute) {
            options.tol = 1e-8;
            options.max_iter = final_fit_ ? 5000 : config_.absolute_path_iter;
        }
        return options;
    }

    const Dataset& data_;
    Loss loss_;
    const PenaltySpec& penalty_;
    const MethodConfig& config_;
    bool final_fit_;
    std::optional<LeastSquaresModel> model_;
};

// Walks the grid down to (and including) lambda_hat with warm starts.
FitResult refit_along_path(const PenalizedPath& path, const std::vector<double>& grid, double lambda_hat) {
    FitResult fit;
    Eigen::VectorXd warm;
    bool have_warm = false;
    for (double lambda : grid) {
        if (lambda < lambda_hat) break;
        fit = path(lambda, have_warm ? &warm : nullptr);
        warm = fit.beta_hat;
        have_warm = true;
    }
    return fit;
}

PenaltySpec method_penalty(Method m, Index p, const MethodConfig& config) {
    switch (m) {
        case Method::RR: return ridge_penalty(p);
        case Method::L:
        case Method::AL:
        case Method::LADL: return lasso_penalty(p);
        case Method::EN:
        case Method::AEN: return elastic_net_penalty(p, config.en_mix);
        case Method::SCAD1:
        case Method::ASCAD1:
        case Method::SCAD2: return scad_penalty(p, config.scad_a);
        case Method::MCP: return mcp_penalty(p, config.mcp_g);
        case Method::POLY: return polynomial_penalty(p, config.genome);
        case Method::LM: return no_penalty(p);
    }
    return no_penalty(p);
}

bool is_adaptive(Method m) {
    return m == Method::AL || m == Method::AEN || m == Method::LADL || m == Method::ASCAD1;
}

Loss method_loss(Method m) {
    return (m == Method::LADL || m == Method::SCAD1 || m == Method::ASCAD1) ? Loss::absolute : Loss::squared;
}

FitResult holdout_fit(const Dataset& train, const PenaltySpec& penalty, const MethodConfig& config) {
    std::vector<Index> holdout;
    if (config.lambda_holdout) {
        holdout = *config.lambda_holdout;
    } else {
        std::vector<Index> order(static_cast<std::size_t>(train.n()));
        std::iota(order.begin(), order.end(), Index{0});
        Rng rng = make_rng(derive_seed(config.seed, {name_tag("lla-holdout")}));
        std::shuffle(order.begin(), order.end(), rng);
        const auto m = std::clamp<Index>(
            static_cast<Index>(std::lround(config.lla_holdout_fraction * static_cast<double>(train.n()))), 1,
            train.n() - 1);
        holdout.assign(order.begin(), order.begin() + m);
        std::sort(holdout.begin(), holdout.end());
    }
    const std::vector<Index> fit_rows = complement(train.n(), holdout);
    if (holdout.empty() || fit_rows.empty()) throw ConfigError("holdout split leaves an empty side");
    const Dataset fit_set = take_rows(train, fit_rows);
    const Dataset hold_set = take_rows(train, holdout);

    const double lambda_max = path_lambda_max(fit_set.x, fit_set.y, Loss::squared, penalty);
    const LambdaGrid grid =
        LambdaGrid::make(lambda_max, default_gamma(fit_set, config), config.grid_count, Spacing::log);
    const PenalizedPath path(fit_set, Loss::squared, penalty, config, true);
    LambdaSelection sel = select_lambda(path, grid.values, hold_set.x, hold_set.y, Loss::squared);
    return std::move(sel.fit);
}

}  // namespace

CvResult cross_validate(const Dataset& train, Loss loss, const PenaltySpec& penalty, const MethodConfig& config) {
    const Index n = train.n();
    const int folds = std::clamp<int>(config.cv_folds, 2, static_cast<int>(std::max<Index>(n, 2)));
    if (n < 2) throw ConfigError("cross-validation needs at least two rows");

    const double lambda_max = path_lambda_max(train.x, train.y, loss, penalty);
    const int count = loss == Loss::absolute ? config.absolute_grid_count : config.grid_count;
    const LambdaGrid grid = LambdaGrid::make(lambda_max, default_gamma(train, config), count, Spacing::log);

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng = make_rng(derive_seed(config.seed, {name_tag("cv-folds")}));
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> total(grid.values.size(), 0.0);
    for (int k = 0; k < folds; ++k) {
        std::vector<Index> in_fold, out_fold;
        for (std::size_t i = 0; i < order.size(); ++i)
            (static_cast<int>(i % static_cast<std::size_t>(folds)) == k ? out_fold : in_fold).push_back(order[i]);
        std::sort(in_fold.begin(), in_fold.end());
        std::sort(out_fold.begin(), out_fold.end());
        const Dataset fit_set = take_rows(train, in_fold);
        const Dataset hold_set = take_rows(train, out_fold);
        const PenalizedPath path(fit_set, loss, penalty, config, false);
        const LambdaSelection sel = select_lambda(path, grid.values, hold_set.x, hold_set.y, loss);
        for (std::size_t g = 0; g < total.size(); ++g)
            total[g] += sel.holdout_loss[g] * static_cast<double>(out_fold.size());
    }

    CvResult out;
    out.grid = grid.values;
    out.cv_loss.resize(total.size());
    std::size_t best = 0;
    for (std::size_t g = 0; g < total.size(); ++g) {
        out.cv_loss[g] = total[g] / static_cast<double>(n);
        if (out.cv_loss[g] < out.cv_loss[best]) best = g;  // strict: ties keep the larger lambda
    }
    out.lambda_hat = grid.values[best];
    const PenalizedPath path(train, loss, penalty, config, true);
    out.fit = refit_along_path(path, grid.values, out.lambda_hat);
    out.fit.lambda_hat = out.lambda_hat;
    return out;
}

Eigen::VectorXd pilot_weights(const Dataset& train, const MethodConfig& config) {
    const WeightRule rule{train.n() > train.p() ? WeightSource::inverse_ols : WeightSource::inverse_scad2, 1.0};
    if (rule.source == WeightSource::inverse_ols) {
        try {
            return adaptive_weights(rule, ols_fit(train.x, train.y));
        } catch (const RankError&) {
            // singular design: fall through to the SCAD2 pilot
        }
    }
    MethodConfig pilot_config = config;
    pilot_config.seed = derive_seed(config.seed, {name_tag("scad2-pilot")});
    pilot_config.lambda_holdout.reset();
    return adaptive_weights(WeightRule{WeightSource::inverse_scad2, 1.0},
                            fit_method(Method::SCAD2, train, pilot_config));
}

FitResult fit_method(Method name, const Dataset& train, const MethodConfig& config) {
    train.validate();
    const Index p = train.p();
    if (requires_more_rows_than_columns(name) && train.n() <= p)
        throw CapabilityError(to_string(name) + " needs n > p (n = " + std::to_string(train.n()) +
                              ", p = " + std::to_string(p) + ")");

    FitResult fit;
    if (name == Method::LM) {
        fit = ols_fit(train.x, train.y);
    } else {
        PenaltySpec penalty = method_penalty(name, p, config);
        if (is_adaptive(name)) penalty.weights = pilot_weights(train, config);
        const bool any_penalized = (penalty.weights.array().isFinite() && penalty.weights.array() > 0.0).any();
        if (!any_penalized) {
            // Every penalized column was excluded by the pilot: lambda has nothing to act on.
            const PenalizedPath path(train, method_loss(name), penalty, config, true);
            fit = path(1.0, nullptr);
            fit.lambda_hat = 0.0;
        } else if (uses_holdout_selection(name)) {
            fit = holdout_fit(train, penalty, config);
        } else {
            fit = cross_validate(train, method_loss(name), penalty, config).fit;
        }
    }
    fit.method = to_string(name);
    fit.refresh_zero_set();
    return fit;
}

}  // namespace shrinkforge
