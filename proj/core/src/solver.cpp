#include "shrinkforge/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shrinkforge/errors.hpp"

namespace shrinkforge {

namespace {

using Coefficients = std::array<double, Genome::kTerms>;

constexpr double kDivergenceFactor = 1e6;
constexpr int kAbsoluteWindow = 100;

double largest_eigenvalue(const Eigen::MatrixXd& symmetric) {
    if (symmetric.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric, Eigen::EigenvaluesOnly);
    return std::max(eig.eigenvalues().maxCoeff(), 0.0);
}

// Largest eigenvalue of X'X/n through whichever Gram matrix is smaller.
double design_spectral_norm(const Eigen::MatrixXd& x) {
    const double n = static_cast<double>(x.rows());
    if (x.rows() < x.cols()) return largest_eigenvalue(x * x.transpose()) / n;
    return largest_eigenvalue(x.transpose() * x) / n;
}

double polynomial_term(const Coefficients& c, double t) {
    const double a = std::abs(t);
    double value = 0.0;
    double power = 1.0;
    for (double ck : c) {
        power *= a;
        value += ck * power;
    }
    return value;
}

double convex_penalty(const Coefficients& c, const Eigen::VectorXd& w, const Eigen::VectorXd& s,
                      const Eigen::VectorXd& beta) {
    double total = 0.0;
    for (Index j = 0; j < beta.size(); ++j) total += w(j) * polynomial_term(c, beta(j) - s(j));
    return total;
}

void check_dimensions(const Objective& obj) {
    if (obj.x.rows() != obj.y.size()) throw DomainError("design rows differ from response length");
    if (obj.penalty.weights.size() != obj.x.cols() || obj.penalty.shifts.size() != obj.x.cols())
        throw DomainError("penalty dimension differs from design columns");
    if (!(obj.lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
}

// Columns kept after dropping excluded (infinite-weight) coordinates.
std::vector<Index> kept_columns(const Eigen::VectorXd& weights) {
    std::vector<Index> kept;
    kept.reserve(static_cast<std::size_t>(weights.size()));
    for (Index j = 0; j < weights.size(); ++j)
        if (!is_excluded(weights(j))) kept.push_back(j);
    return kept;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<Index>& idx) {
    Eigen::VectorXd out(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Index>(k)) = v(idx[k]);
    return out;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& x, const std::vector<Index>& idx) {
    Eigen::MatrixXd out(x.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = x.col(idx[k]);
    return out;
}

PenaltySpec restrict_penalty(const PenaltySpec& spec, const std::vector<Index>& idx) {
    PenaltySpec out = spec;
    out.weights = gather(spec.weights, idx);
    out.shifts = gather(spec.shifts, idx);
    return out;
}

void expand_into(FitResult& fit, const std::vector<Index>& idx, Index p) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(p);
    for (std::size_t k = 0; k < idx.size(); ++k) full(idx[k]) = fit.beta_hat(static_cast<Index>(k));
    fit.beta_hat = std::move(full);
}

void snap_zeros(Eigen::VectorXd& beta, double threshold) {
    for (Index j = 0; j < beta.size(); ++j)
        if (std::abs(beta(j)) < threshold) beta(j) = 0.0;
}

void check_divergence(double value, double initial) {
    if (!std::isfinite(value) || value > kDivergenceFactor * std::max(initial, 1e-300))
        throw DivergenceError("objective exceeded 1e6 times its initial value");
}

// Accelerated proximal gradient on b'Gb - 2c'b + yy + lambda * sum_j w_j f(b_j - s_j).
// A step that would raise the objective is rejected and the momentum reset,
// so accepted iterates (and the trace) are monotone.
FitResult accelerated_prox(const LeastSquaresModel& m, const Coefficients& c, double lambda,
                           const Eigen::VectorXd& w, const Eigen::VectorXd& s, Eigen::VectorXd x,
                           const SolverOptions& options) {
    const Index p = m.p();
    FitResult fit;
    double lipschitz = 2.0 * m.spectral_norm();
    if (!(lipschitz > 0.0)) lipschitz = 1.0;
    const double step = 1.0 / lipschitz;
    const auto& gram = m.gram();
    const auto& xty = m.xty();

    auto value = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& gb) {
        double v = b.dot(gb) - 2.0 * xty.dot(b) + m.yy();
        if (lambda > 0.0) v += lambda * convex_penalty(c, w, s, b);
        return v;
    };

    Eigen::VectorXd gx = gram * x;
    double best = value(x, gx);
    const double f0 = std::max(best, 0.0);
    Eigen::VectorXd x_prev = x, gx_prev = gx;
    Eigen::VectorXd yk(p), gy(p), z(p), xn(p), gxn(p);
    double t = 1.0;

    for (int k = 1; k <= options.max_iter; ++k) {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double theta = (t - 1.0) / t_next;
        yk = x + theta * (x - x_prev);
        gy = gx + theta * (gx - gx_prev);
        z = yk - (2.0 * step) * (gy - xty);
        for (Index j = 0; j < p; ++j)
            xn(j) = s(j) + polynomial_prox(c, z(j) - s(j), step * lambda * w(j));
        gxn.noalias() = gram * xn;
        const double fn = value(xn, gxn);
        check_divergence(fn, f0);
        fit.iterations = k;
        best = std::min(best, fn);
        fit.objective_trace.push_back(best);

        // Restart when the step opposes the momentum. This compares iterates,
        // so it keeps working after objective differences drop below rounding.
        const bool restart = (yk - xn).dot(xn - x) > 0.0;
        const double change = (xn - x).lpNorm<Eigen::Infinity>();
        const double scale = 1.0 + xn.lpNorm<Eigen::Infinity>();
        x_prev.swap(x);
        x.swap(xn);
        gx_prev.swap(gx);
        gx.swap(gxn);
        if (restart) {
            t = 1.0;
            x_prev = x;
            gx_prev = gx;
        } else {
            t = t_next;
        }
        if (change <= options.tol * scale) {
            fit.converged = true;
            break;
        }
    }
    snap_zeros(x, options.zero_snap);
    fit.beta_hat = std::move(x);
    return fit;
}

// Proximal subgradient on (1/n)||y - Xb||_1 + lambda * sum_j w_j f(b_j - s_j)
// with steps s0/sqrt(t); returns the best iterate.
FitResult absolute_prox_subgradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Coefficients& c,
                                    double lambda, const Eigen::VectorXd& w, const Eigen::VectorXd& s,
                                    Eigen::VectorXd beta, const SolverOptions& options) {
    const Index p = x.cols();
    const double n = static_cast<double>(x.rows());
    FitResult fit;
    double norm = design_spectral_norm(x);
    const double s0 = norm > 0.0 ? 1.0 / norm : 1.0;

    auto value = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& r) {
        double v = r.cwiseAbs().sum() / n;
        if (lambda > 0.0) v += lambda * convex_penalty(c, w, s, b);
        return v;
    };

    Eigen::VectorXd r = y - x * beta;
    double best_value = value(beta, r);
    const double f0 = std::max(best_value, 0.0);
    Eigen::VectorXd best = beta;
    double window_start = best_value;
    Eigen::VectorXd signs(r.size()), g(p);

    for (int t = 1; t <= options.max_iter; ++t) {
        signs = r.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
        g.noalias() = -(x.transpose() * signs) / n;
        const double st = s0 / std::sqrt(static_cast<double>(t));
        for (Index j = 0; j < p; ++j) {
            const double z = beta(j) - st * g(j);
            beta(j) = s(j) + polynomial_prox(c, z - s(j), st * lambda * w(j));
        }
        r.noalias() = y - x * beta;
        const double v = value(beta, r);
        check_divergence(v, f0);
        if (v < best_value) {
            best_value = v;
            best = beta;
        }
        fit.objective_trace.push_back(best_value);
        fit.iterations = t;
        if (t % kAbsoluteWindow == 0) {
            if (window_start - best_value <= options.tol * std::max(1.0, std::abs(best_value))) {
                fit.converged = true;
                break;
            }
            window_start = best_value;
        }
    }
    snap_zeros(best, options.zero_snap);
    fit.beta_hat = std::move(best);
    return fit;
}

// Cyclic coordinate descent on b'Gb - 2c'b + yy
//   + lambda * sum_j w_j (l1 |b_j - s_j| + l2 (b_j - s_j)^2),
// full sweeps alternating with sweeps over the active set.
FitResult coordinate_descent(const LeastSquaresModel& m, double l1, double l2, double lambda,
                             const Eigen::VectorXd& w, const Eigen::VectorXd& s, Eigen::VectorXd b,
                             const SolverOptions& options) {
    const Index p = m.p();
    const auto& gram = m.gram();
    const auto& xty = m.xty();
    FitResult fit;
    Eigen::VectorXd q = gram * b;

    auto value = [&] {
        double v = b.dot(q) - 2.0 * xty.dot(b) + m.yy();
        if (lambda > 0.0) {
            for (Index j = 0; j < p; ++j) {
                const double u = b(j) - s(j);
                v += lambda * w(j) * (l1 * std::abs(u) + l2 * u * u);
            }
        }
        return v;
    };

    auto update = [&](Index j) {
        const double gjj = gram(j, j);
        const double rho = xty(j) - (q(j) - gjj * b(j));
        const double denom = gjj + lambda * w(j) * l2;
        double next = b(j);
        if (denom > 0.0) {
            next = s(j) + soft_threshold(rho - gjj * s(j), 0.5 * lambda * w(j) * l1) / denom;
        } else if (lambda * w(j) * l1 > 0.0) {
            next = s(j);
        }
        const double delta = next - b(j);
        if (delta != 0.0) {
            q.noalias() += delta * gram.col(j);
            b(j) = next;
        }
        return std::abs(delta);
    };

    std::vector<Index> active;
    int sweeps = 0;
    bool done = false;
    while (!done && sweeps < options.max_iter) {
        double max_change = 0.0;
        for (Index j = 0; j < p; ++j) max_change = std::max(max_change, update(j));
        ++sweeps;
        fit.objective_trace.push_back(value());
        if (max_change <= options.tol * (1.0 + b.lpNorm<Eigen::Infinity>())) {
            fit.converged = true;
            break;
        }
        active.clear();
        for (Index j = 0; j < p; ++j)
            if (b(j) != s(j)) active.push_back(j);
        while (sweeps < options.max_iter) {
            double active_change = 0.0;
            for (Index j : active) active_change = std::max(active_change, update(j));
            ++sweeps;
            fit.objective_trace.push_back(value());
            if (active_change <= options.tol * (1.0 + b.lpNorm<Eigen::Infinity>())) break;
        }
        done = sweeps >= options.max_iter;
    }
    // Keep the trace monotone against rounding in the Gram-form objective.
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
        fit.objective_trace[k] = std::min(fit.objective_trace[k], fit.objective_trace[k - 1]);
    fit.iterations = sweeps;
    fit.beta_hat = std::move(b);
    return fit;
}

Eigen::VectorXd initial_or_zero(const std::optional<Eigen::VectorXd>& init, Index p) {
    if (!init) return Eigen::VectorXd::Zero(p);
    if (init->size() != p) throw DomainError("initial vector length differs from p");
    return *init;
}

void require_finite(const Eigen::VectorXd& v) {
    if (!v.allFinite()) throw DomainError("initial vector must be finite");
}

FitResult coordinate_fit_reduced(const LeastSquaresModel& m, const PenaltySpec& spec, double lambda,
                                 Eigen::VectorXd init, const SolverOptions& options) {
    double l1 = 0.0, l2 = 0.0;
    switch (spec.kind) {
        case PenaltyKind::ridge: l2 = 1.0; break;
        case PenaltyKind::lasso: l1 = 1.0; break;
        case PenaltyKind::elastic_net:
            l1 = spec.mix;
            l2 = 1.0 - spec.mix;
            break;
        default:
            throw ContractError("coordinate_fit supports ridge, lasso and elastic net only");
    }
    return coordinate_descent(m, l1, l2, lambda, spec.weights, spec.shifts, std::move(init), options);
}

// Weighted-lasso weights of one LLA round.
Eigen::VectorXd lla_weights(const PenaltySpec& spec, double lambda, const Eigen::VectorXd& beta) {
    Eigen::VectorXd v(beta.size());
    for (Index j = 0; j < beta.size(); ++j) {
        const double t = std::abs(beta(j) - spec.shifts(j));
        const double level = lambda * spec.weights(j);
        v(j) = (spec.kind == PenaltyKind::scad ? scad_derivative(t, level, spec.scad_a)
                                               : mcp_derivative(t, level, spec.mcp_g)) /
               lambda;
    }
    return v;
}

double folded_objective(const PenaltySpec& spec, double lambda, double loss, const Eigen::VectorXd& beta) {
    return loss + lambda * penalty_value(spec, beta, lambda);
}

// Shared LLA loop; `inner` solves the weighted lasso for given weights.
template <class LossFn, class InnerFn>
FitResult lla_loop(const PenaltySpec& spec, double lambda, Eigen::VectorXd beta, const LlaOptions& options,
                   LossFn loss_of, InnerFn inner) {
    FitResult fit;
    if (lambda <= 0.0) {
        PenaltySpec unpenalized = spec;
        unpenalized.kind = PenaltyKind::lasso;
        for (Index j = 0; j < unpenalized.weights.size(); ++j)
            if (!is_excluded(unpenalized.weights(j))) unpenalized.weights(j) = 0.0;
        fit = inner(unpenalized, beta);
        fit.objective_trace = {loss_of(fit.beta_hat)};
        fit.iterations = 1;
        return fit;
    }
    PenaltySpec weighted = spec;
    weighted.kind = PenaltyKind::lasso;
    weighted.weights = lla_weights(spec, lambda, beta);
    fit.objective_trace.push_back(folded_objective(spec, lambda, loss_of(beta), beta));
    for (int round = 1; round <= options.max_rounds; ++round) {
        FitResult step = inner(weighted, beta);
        beta = step.beta_hat;
        fit.iterations = round;
        fit.objective_trace.push_back(folded_objective(spec, lambda, loss_of(beta), beta));
        Eigen::VectorXd next = lla_weights(spec, lambda, beta);
        const double change = (next - weighted.weights).lpNorm<Eigen::Infinity>();
        weighted.weights = std::move(next);
        if (change < options.weight_tol) {
            fit.converged = true;
            break;
        }
    }
    fit.beta_hat = std::move(beta);
    return fit;
}

}  // namespace

double soft_threshold(double z, double threshold) {
    if (z > threshold) return z - threshold;
    if (z < -threshold) return z + threshold;
    return 0.0;
}

double mean_loss(Loss loss, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
    if (y.size() == 0) throw DomainError("mean loss over an empty set");
    const Eigen::VectorXd r = y - x * beta;
    const double n = static_cast<double>(y.size());
    return loss == Loss::squared ? r.squaredNorm() / n : r.cwiseAbs().sum() / n;
}

double objective_value(const Objective& obj, const Eigen::VectorXd& beta) {
    check_dimensions(obj);
    if (beta.size() != obj.x.cols()) throw DomainError("beta length differs from p");
    double value = mean_loss(obj.loss, obj.x, obj.y, beta);
    if (obj.lambda > 0.0) value += obj.lambda * penalty_value(obj.penalty, beta, obj.lambda);
    return value;
}

LeastSquaresModel::LeastSquaresModel(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw DomainError("design rows differ from response length");
    if (x.rows() == 0) throw DomainError("empty data");
    n_ = x.rows();
    const double n = static_cast<double>(n_);
    gram_.noalias() = x.transpose() * x / n;
    xty_.noalias() = x.transpose() * y / n;
    yy_ = y.squaredNorm() / n;
    spectral_norm_ = largest_eigenvalue(gram_);
}

double LeastSquaresModel::loss(const Eigen::VectorXd& beta) const {
    return std::max(beta.dot(gram_ * beta) - 2.0 * xty_.dot(beta) + yy_, 0.0);
}

LeastSquaresModel LeastSquaresModel::restrict_to(const std::vector<Index>& columns) const {
    LeastSquaresModel out;
    const auto k = static_cast<Index>(columns.size());
    out.gram_.resize(k, k);
    out.xty_.resize(k);
    for (Index a = 0; a < k; ++a) {
        out.xty_(a) = xty_(columns[static_cast<std::size_t>(a)]);
        for (Index b = 0; b < k; ++b)
            out.gram_(a, b) = gram_(columns[static_cast<std::size_t>(a)], columns[static_cast<std::size_t>(b)]);
    }
    out.yy_ = yy_;
    out.n_ = n_;
    out.spectral_norm_ = largest_eigenvalue(out.gram_);
    return out;
}

FitResult subgradient_descent(const LeastSquaresModel& model, const PenaltySpec& penalty, double lambda,
                              const Eigen::VectorXd& init, const SolverOptions& options) {
    if (penalty.folded_concave())
        throw ContractError("folded-concave penalties are not convex; use lla_fit");
    if (penalty.size() != model.p() || init.size() != model.p())
        throw DomainError("penalty or initial vector length differs from p");
    if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
    require_finite(init);
    const Coefficients c = convex_coefficients(penalty);

    FitResult fit;
    if (penalty.has_exclusions()) {
        const auto kept = kept_columns(penalty.weights);
        const PenaltySpec reduced = restrict_penalty(penalty, kept);
        fit = accelerated_prox(model.restrict_to(kept), c, lambda, reduced.weights, reduced.shifts,
                               gather(init, kept), options);
        expand_into(fit, kept, model.p());
    } else {
        fit = accelerated_prox(model, c, lambda, penalty.weights, penalty.shifts, init, options);
    }
    fit.lambda_hat = lambda;
    fit.refresh_zero_set();
    return fit;
}

FitResult subgradient_descent(const Objective& obj, const Eigen::VectorXd& init, const SolverOptions& options) {
    check_dimensions(obj);
    if (obj.penalty.folded_concave())
        throw ContractError("folded-concave penalties are not convex; use lla_fit");
    if (init.size() != obj.x.cols()) throw DomainError("initial vector length differs from p");
    require_finite(init);
    if (obj.loss == Loss::squared) return subgradient_descent(LeastSquaresModel(obj.x, obj.y), obj.penalty,
                                                              obj.lambda, init, options);

    const Coefficients c = convex_coefficients(obj.penalty);
    const auto kept = kept_columns(obj.penalty.weights);
    const PenaltySpec reduced = restrict_penalty(obj.penalty, kept);
    FitResult fit = absolute_prox_subgradient(gather_columns(obj.x, kept), obj.y, c, obj.lambda, reduced.weights,
                                              reduced.shifts, gather(init, kept), options);
    expand_into(fit, kept, obj.x.cols());
    fit.lambda_hat = obj.lambda;
    fit.refresh_zero_set();
    return fit;
}

FitResult coordinate_fit(const LeastSquaresModel& model, const PenaltySpec& penalty, double lambda,
                         const std::optional<Eigen::VectorXd>& init, const SolverOptions& options) {
    if (penalty.size() != model.p()) throw DomainError("penalty dimension differs from p");
    if (!(lambda >= 0.0)) throw DomainError("lambda must be nonnegative");
    Eigen::VectorXd start = initial_or_zero(init, model.p());
    require_finite(start);

    FitResult fit;
    if (penalty.has_exclusions()) {
        const auto kept = kept_columns(penalty.weights);
        fit = coordinate_fit_reduced(model.restrict_to(kept), restrict_penalty(penalty, kept), lambda,
                                     gather(start, kept), options);
        expand_into(fit, kept, model.p());
    } else {
        fit = coordinate_fit_reduced(model, penalty, lambda, std::move(start), options);
    }
    fit.lambda_hat = lambda;
    fit.refresh_zero_set();
    return fit;
}

FitResult coordinate_fit(const Objective& obj, const std::optional<Eigen::VectorXd>& init,
                         const SolverOptions& options) {
    check_dimensions(obj);
    if (obj.loss != Loss::squared) throw ContractError("coordinate_fit requires squared loss");
    return coordinate_fit(LeastSquaresModel(obj.x, obj.y), obj.penalty, obj.lambda, init, options);
}

FitResult lla_fit(const Objective& obj, const std::optional<Eigen::VectorXd>& init, const LlaOptions& options) {
    check_dimensions(obj);
    if (!obj.penalty.folded_concave()) throw ContractError("lla_fit requires a scad or mcp penalty");
    obj.penalty.validate();
    const Index p = obj.x.cols();
    if (init && init->size() != p) throw DomainError("initial vector length differs from p");
    const auto kept = kept_columns(obj.penalty.weights);
    const PenaltySpec reduced = restrict_penalty(obj.penalty, kept);
    PenaltySpec lasso = reduced;
    lasso.kind = PenaltyKind::lasso;

    FitResult fit;
    if (obj.loss == Loss::squared) {
        const LeastSquaresModel full(obj.x, obj.y);
        const LeastSquaresModel model = kept.size() == static_cast<std::size_t>(p) ? full : full.restrict_to(kept);
        auto inner = [&](const PenaltySpec& weighted, const Eigen::VectorXd& start) {
            return coordinate_fit_reduced(model, weighted, obj.lambda, start, options.inner);
        };
        Eigen::VectorXd start = init ? gather(*init, kept)
                                     : inner(lasso, Eigen::VectorXd::Zero(static_cast<Index>(kept.size()))).beta_hat;
        fit = lla_loop(reduced, obj.lambda, std::move(start), options,
                       [&](const Eigen::VectorXd& b) { return model.loss(b); }, inner);
    } else {
        const Eigen::MatrixXd xr = gather_columns(obj.x, kept);
        auto inner = [&](const PenaltySpec& weighted, const Eigen::VectorXd& start) {
            return absolute_prox_subgradient(xr, obj.y, convex_coefficients(weighted), obj.lambda, weighted.weights,
                                             weighted.shifts, start, options.inner);
        };
        Eigen::VectorXd start = init ? gather(*init, kept)
                                     : inner(lasso, Eigen::VectorXd::Zero(static_cast<Index>(kept.size()))).beta_hat;
        fit = lla_loop(reduced, obj.lambda, std::move(start), options,
                       [&](const Eigen::VectorXd& b) { return mean_loss(Loss::absolute, xr, obj.y, b); }, inner);
    }
    expand_into(fit, kept, p);
    fit.lambda_hat = obj.lambda;
    fit.refresh_zero_set();
    return fit;
}

FitResult ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw DomainError("design rows differ from response length");
    if (x.rows() <= x.cols()) throw RankError("least squares needs n > p");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x.transpose() * x, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo >= 1e12) throw RankError("design is rank deficient (cond(X'X) >= 1e12)");

    FitResult fit;
    fit.method = "LM";
    fit.beta_hat = x.colPivHouseholderQr().solve(y);
    fit.lambda_hat = 0.0;
    fit.iterations = 1;
    fit.converged = true;
    fit.objective_trace = {mean_loss(Loss::squared, x, y, fit.beta_hat)};
    fit.refresh_zero_set();
    return fit;
}

}  // namespace shrinkforge
