#include "shrinkforge/penalty.hpp"

#include <algorithm>
#include <cmath>

#include "shrinkforge/errors.hpp"

namespace shrinkforge {

void FitResult::refresh_zero_set() {
    zero_set.clear();
    for (Index j = 0; j < beta_hat.size(); ++j)
        if (beta_hat(j) == 0.0) zero_set.push_back(j);
}

std::string to_string(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::none: return "none";
        case PenaltyKind::ridge: return "ridge";
        case PenaltyKind::lasso: return "lasso";
        case PenaltyKind::elastic_net: return "elastic_net";
        case PenaltyKind::scad: return "scad";
        case PenaltyKind::mcp: return "mcp";
        case PenaltyKind::polynomial: return "polynomial";
    }
    return "none";
}

PenaltyKind penalty_kind_from_string(const std::string& name) {
    for (auto kind : {PenaltyKind::none, PenaltyKind::ridge, PenaltyKind::lasso, PenaltyKind::elastic_net,
                      PenaltyKind::scad, PenaltyKind::mcp, PenaltyKind::polynomial})
        if (to_string(kind) == name) return kind;
    throw ConfigError("unknown penalty kind '" + name + "'");
}

void Genome::clamp() {
    for (double& a : alpha) a = std::clamp(a, kMin, kMax);
}

bool Genome::valid() const {
    return std::all_of(alpha.begin(), alpha.end(), [](double a) { return a >= kMin && a <= kMax; });
}

bool PenaltySpec::has_exclusions() const {
    for (Index j = 0; j < weights.size(); ++j)
        if (is_excluded(weights(j))) return true;
    return false;
}

void PenaltySpec::validate() const {
    if (weights.size() != shifts.size()) throw ConfigError("weights and shifts differ in length");
    for (Index j = 0; j < weights.size(); ++j) {
        if (!(weights(j) >= 0.0)) throw ConfigError("penalty weights must be nonnegative");
        if (!std::isfinite(shifts(j))) throw ConfigError("penalty shifts must be finite");
    }
    switch (kind) {
        case PenaltyKind::elastic_net:
            if (!(mix >= 0.0 && mix <= 1.0)) throw ConfigError("elastic-net mix must lie in [0, 1]");
            break;
        case PenaltyKind::scad:
            if (!(scad_a > 2.0)) throw ConfigError("SCAD requires a > 2");
            break;
        case PenaltyKind::mcp:
            if (!(mcp_g > 1.0)) throw ConfigError("MCP requires g > 1");
            break;
        case PenaltyKind::polynomial:
            if (!genome.valid()) throw ConfigError("genome coefficients must lie in [0, 20]");
            break;
        default:
            break;
    }
}

PenaltySpec PenaltySpec::make(PenaltyKind kind, Index p) {
    PenaltySpec spec;
    spec.kind = kind;
    spec.weights = Eigen::VectorXd::Ones(p);
    spec.shifts = Eigen::VectorXd::Zero(p);
    return spec;
}

PenaltySpec no_penalty(Index p) { return PenaltySpec::make(PenaltyKind::none, p); }
PenaltySpec ridge_penalty(Index p) { return PenaltySpec::make(PenaltyKind::ridge, p); }
PenaltySpec lasso_penalty(Index p) { return PenaltySpec::make(PenaltyKind::lasso, p); }

PenaltySpec elastic_net_penalty(Index p, double mix) {
    auto spec = PenaltySpec::make(PenaltyKind::elastic_net, p);
    spec.mix = mix;
    spec.validate();
    return spec;
}

PenaltySpec scad_penalty(Index p, double a) {
    auto spec = PenaltySpec::make(PenaltyKind::scad, p);
    spec.scad_a = a;
    spec.validate();
    return spec;
}

PenaltySpec mcp_penalty(Index p, double g) {
    auto spec = PenaltySpec::make(PenaltyKind::mcp, p);
    spec.mcp_g = g;
    spec.validate();
    return spec;
}

PenaltySpec polynomial_penalty(Index p, const Genome& genome) {
    auto spec = PenaltySpec::make(PenaltyKind::polynomial, p);
    spec.genome = genome;
    spec.validate();
    return spec;
}

std::array<double, Genome::kTerms> convex_coefficients(const PenaltySpec& spec) {
    std::array<double, Genome::kTerms> c{};
    switch (spec.kind) {
        case PenaltyKind::none: break;
        case PenaltyKind::ridge: c[1] = 1.0; break;
        case PenaltyKind::lasso: c[0] = 1.0; break;
        case PenaltyKind::elastic_net:
            c[0] = spec.mix;
            c[1] = 1.0 - spec.mix;
            break;
        case PenaltyKind::polynomial: c = spec.genome.alpha; break;
        case PenaltyKind::scad:
        case PenaltyKind::mcp:
            throw ContractError("folded-concave penalty has no polynomial representation");
    }
    return c;
}

namespace {

double polynomial_value(const std::array<double, Genome::kTerms>& c, double t) {
    const double a = std::abs(t);
    double value = 0.0;
    double power = 1.0;
    for (int k = 0; k < Genome::kTerms; ++k) {
        power *= a;
        value += c[static_cast<std::size_t>(k)] * power;
    }
    return value;
}

// d/dt of sum_k c_k t^k at t >= 0 (right derivative at 0).
double polynomial_derivative(const std::array<double, Genome::kTerms>& c, double t) {
    double value = c[0];
    double power = 1.0;
    for (int k = 1; k < Genome::kTerms; ++k) {
        power *= t;
        value += static_cast<double>(k + 1) * c[static_cast<std::size_t>(k)] * power;
    }
    return value;
}

double scad_value(double t, double level, double a) {
    if (t <= level) return level * t;
    if (t <= a * level) return (2.0 * a * level * t - t * t - level * level) / (2.0 * (a - 1.0));
    return level * level * (a + 1.0) / 2.0;
}

double mcp_value(double t, double level, double g) {
    if (t <= g * level) return level * t - t * t / (2.0 * g);
    return g * level * level / 2.0;
}

void require_positive_lambda(const PenaltySpec& spec, double lambda) {
    if (spec.folded_concave() && !(lambda > 0.0))
        throw DomainError("folded-concave penalties need lambda > 0");
}

// Weighted term w f(|t|) (convex) or p_{lambda w}(|t|)/lambda (folded concave).
double term_value(const PenaltySpec& spec, double t, double w, double lambda) {
    const double a = std::abs(t);
    switch (spec.kind) {
        case PenaltyKind::scad: return scad_value(a, lambda * w, spec.scad_a) / lambda;
        case PenaltyKind::mcp: return mcp_value(a, lambda * w, spec.mcp_g) / lambda;
        default: return w * polynomial_value(convex_coefficients(spec), a);
    }
}

double term_derivative(const PenaltySpec& spec, double t, double w, double lambda) {
    switch (spec.kind) {
        case PenaltyKind::scad: return scad_derivative(t, lambda * w, spec.scad_a) / lambda;
        case PenaltyKind::mcp: return mcp_derivative(t, lambda * w, spec.mcp_g) / lambda;
        default: return w * polynomial_derivative(convex_coefficients(spec), t);
    }
}

}  // namespace

double scad_derivative(double t, double level, double a) {
    if (t <= level) return level;
    return std::max(a * level - t, 0.0) / (a - 1.0);
}

double mcp_derivative(double t, double level, double g) { return std::max(level - t / g, 0.0); }

double scalar_penalty(const PenaltySpec& spec, double t, double lambda) {
    require_positive_lambda(spec, lambda);
    return term_value(spec, t, 1.0, lambda);
}

double scalar_derivative(const PenaltySpec& spec, double t, double lambda) {
    require_positive_lambda(spec, lambda);
    return term_derivative(spec, std::abs(t), 1.0, lambda);
}

double penalty_value(const PenaltySpec& spec, const Eigen::VectorXd& beta, double lambda) {
    if (beta.size() != spec.weights.size() || beta.size() != spec.shifts.size())
        throw DomainError("beta length differs from penalty dimension");
    require_positive_lambda(spec, lambda);
    if (spec.kind == PenaltyKind::none) return 0.0;
    double total = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        const double w = spec.weights(j);
        if (is_excluded(w)) {
            if (beta(j) != 0.0)
                throw ConstraintViolation("excluded coordinate " + std::to_string(j) + " is nonzero");
            continue;
        }
        total += term_value(spec, beta(j) - spec.shifts(j), w, lambda);
    }
    return total;
}

Eigen::VectorXd penalty_subgradient(const PenaltySpec& spec, const Eigen::VectorXd& beta, double lambda) {
    if (beta.size() != spec.weights.size() || beta.size() != spec.shifts.size())
        throw DomainError("beta length differs from penalty dimension");
    require_positive_lambda(spec, lambda);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(beta.size());
    if (spec.kind == PenaltyKind::none) return g;
    for (Index j = 0; j < beta.size(); ++j) {
        const double w = spec.weights(j);
        if (is_excluded(w)) {
            if (beta(j) != 0.0)
                throw ConstraintViolation("excluded coordinate " + std::to_string(j) + " is nonzero");
            continue;
        }
        const double u = beta(j) - spec.shifts(j);
        // At u = 0 every smooth term has zero slope, so 0 lies in the
        // subdifferential [-kink, kink].
        if (u == 0.0) continue;
        g(j) = std::copysign(term_derivative(spec, std::abs(u), w, lambda), u);
    }
    return g;
}

double polynomial_prox(const std::array<double, Genome::kTerms>& c, double z, double scale) {
    if (scale == 0.0) return z;
    const double excess = std::abs(z) - scale * c[0];
    if (excess <= 0.0) return 0.0;
    bool higher = false;
    for (int k = 2; k < Genome::kTerms; ++k) higher = higher || c[static_cast<std::size_t>(k)] > 0.0;
    if (!higher) return std::copysign(excess / (1.0 + 2.0 * scale * c[1]), z);

    // h(t) = t + scale * sum_{k>=2} k c_k t^(k-1) - excess is increasing and
    // convex on [0, excess] with h(excess) >= 0, so Newton from the right
    // endpoint decreases monotonically to the root.
    double t = excess;
    for (int iter = 0; iter < 200; ++iter) {
        double h = t - excess;
        double dh = 1.0;
        double power = 1.0;  // t^(k-2)
        for (int k = 2; k <= Genome::kTerms; ++k) {
            const double ck = scale * c[static_cast<std::size_t>(k - 1)];
            h += ck * static_cast<double>(k) * power * t;
            dh += ck * static_cast<double>(k * (k - 1)) * power;
            power *= t;
        }
        const double step = h / dh;
        const double next = std::max(t - step, 0.0);
        if (std::abs(next - t) <= 1e-15 * std::max(t, 1e-300)) {
            t = next;
            break;
        }
        t = next;
    }
    return std::copysign(t, z);
}

Eigen::VectorXd adaptive_weights(const WeightRule& rule, const Eigen::VectorXd& pilot) {
    Eigen::VectorXd w(pilot.size());
    for (Index j = 0; j < pilot.size(); ++j) {
        if (rule.source == WeightSource::ones) {
            w(j) = 1.0;
        } else if (pilot(j) == 0.0) {
            w(j) = kExclude;
        } else {
            w(j) = 1.0 / std::pow(std::abs(pilot(j)), rule.gamma);
        }
    }
    return w;
}

Eigen::VectorXd adaptive_weights(const WeightRule& rule, const FitResult& pilot_fit) {
    return adaptive_weights(rule, pilot_fit.beta_hat);
}

ConditionReport condition_check(const PenaltySpec& spec, double bound, int grid_points, double lambda) {
    ConditionReport report;
    const int m = std::max(grid_points, 3);
    const double h = 2.0 * bound / static_cast<double>(m - 1);
    report.derivative_at_zero = std::abs(scalar_derivative(spec, 0.0, lambda));
    report.zero_derivative_at_origin = report.derivative_at_zero < 1e-12;
    report.convex = true;
    for (int i = 0; i < m; ++i) {
        const double t = -bound + h * static_cast<double>(i);
        report.max_abs_derivative = std::max(report.max_abs_derivative, scalar_derivative(spec, t, lambda));
        if (i == 0 || i == m - 1) continue;
        const double f_minus = scalar_penalty(spec, t - h, lambda);
        const double f_mid = scalar_penalty(spec, t, lambda);
        const double f_plus = scalar_penalty(spec, t + h, lambda);
        const double second = f_minus - 2.0 * f_mid + f_plus;
        if (second < -1e-10 * std::max(1.0, std::abs(f_mid))) report.convex = false;
    }
    return report;
}

}  // namespace shrinkforge
