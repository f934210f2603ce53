#include "shrinkforge/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include "shrinkforge/errors.hpp"
#include "shrinkforge/format.hpp"
#include "shrinkforge/io.hpp"
#include "shrinkforge/parallel.hpp"
#include "shrinkforge/random.hpp"

namespace shrinkforge {

void InstabilityConfig::validate() const {
    if (tau_values.empty() || tau_values.front() != 0.0) throw ConfigError("tau values must start at 0");
    if (!std::is_sorted(tau_values.begin(), tau_values.end()) ||
        std::adjacent_find(tau_values.begin(), tau_values.end()) != tau_values.end())
        throw ConfigError("tau values must be strictly ascending");
    if (replicates < 1) throw ConfigError("replicates must be at least 1");
    if (methods.empty()) throw ConfigError("no methods requested");
}

SplitSpec default_split(Index n) {
    SplitSpec s;
    switch (n) {
        case 40: s.n_train = 28; break;
        case 75: s.n_train = 60; break;
        case 150: s.n_train = 120; break;
        case 500: s.n_train = 350; break;
        default: s.n_train = static_cast<Index>(std::lround(0.7 * static_cast<double>(n)));
    }
    s.n_test = n - s.n_train;
    return s;
}

double instability_score(const FitResult& fit, const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test) {
    if (y_test.size() == 0) throw DomainError("instability score needs a nonempty test set");
    if (x_test.rows() != y_test.size() || x_test.cols() != fit.beta_hat.size())
        throw DomainError("test set shape does not match the fit");
    return std::sqrt(mean_loss(Loss::squared, x_test, y_test, fit.beta_hat));
}

SelectionMetrics selection_metrics(const FitResult& fit, const Eigen::VectorXd& true_beta) {
    const Index p = true_beta.size();
    if (fit.beta_hat.size() != p) throw DomainError("fit and true_beta lengths differ");
    SelectionMetrics m;
    m.counts.p = p;
    Index zero_true = 0, hit = 0, miss = 0;
    for (Index j = 0; j < p; ++j) {
        const bool truly_zero = true_beta(j) == 0.0;
        const bool zeroed = fit.beta_hat(j) == 0.0;
        zero_true += truly_zero;
        if (zeroed) (truly_zero ? hit : miss) += 1;
    }
    m.counts.zero_true = zero_true;
    m.counts.zeroed = hit + miss;
    if (p == 0) return m;
    m.tot = static_cast<double>(hit + miss) / static_cast<double>(p);
    m.tr = zero_true == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(zero_true);
    m.fa = zero_true == p ? 0.0 : static_cast<double>(miss) / static_cast<double>(p - zero_true);
    return m;
}

SelectionMetrics aggregate_metrics(const std::vector<SelectionMetrics>& records) {
    if (records.empty()) throw DomainError("cannot aggregate an empty list");
    SelectionMetrics out;
    out.counts = records.front().counts;
    for (const auto& r : records) {
        out.tot += r.tot;
        out.tr += r.tr;
        out.fa += r.fa;
    }
    const double k = static_cast<double>(records.size());
    out.tot /= k;
    out.tr /= k;
    out.fa /= k;
    return out;
}

namespace {

struct Cell {
    std::optional<double> score;
    std::optional<SelectionMetrics> metrics;
};

}  // namespace

InstabilityResult instability_curves(const Dataset& ds, const InstabilityConfig& cfg) {
    ds.validate();
    cfg.validate();
    SplitSpec spec = cfg.split;
    if (spec.n_train == 0 || spec.n_test == 0) spec = default_split(ds.n());
    if (spec.n_train + spec.n_test != ds.n()) throw ConfigError("n_train + n_test must equal n");

    InstabilityResult result;
    std::vector<Method> runnable;
    for (Method m : cfg.methods) {
        if (requires_more_rows_than_columns(m) && spec.n_train <= ds.p()) {
            result.skipped.push_back({to_string(m), "needs n_train > p (n_train = " + std::to_string(spec.n_train) +
                                                         ", p = " + std::to_string(ds.p()) + ")"});
            continue;
        }
        runnable.push_back(m);
    }

    const std::size_t n_tau = cfg.tau_values.size();
    const std::size_t n_rep = static_cast<std::size_t>(cfg.replicates);
    const std::size_t n_method = runnable.size();
    // cells[(rep * n_tau + k) * n_method + m]
    std::vector<Cell> cells(n_rep * n_tau * n_method);
    const bool with_truth = ds.true_beta.has_value();

    parallel_for(n_rep, cfg.jobs, [&](std::size_t rep) {
        for (std::size_t k = 0; k < n_tau; ++k) {
            SplitSpec s = spec;
            s.seed = derive_seed(cfg.seed, {name_tag("split"), rep, k});
            const SplitIndices idx = split(ds.n(), s);
            const Dataset noisy =
                perturb_response(ds, cfg.tau_values[k], derive_seed(cfg.seed, {name_tag("perturb"), rep, k}));
            const Dataset train = take_rows(noisy, idx.train);
            const Dataset test = take_rows(noisy, idx.test);
            for (std::size_t m = 0; m < n_method; ++m) {
                MethodConfig mc = cfg.method;
                mc.seed = derive_seed(cfg.seed, {name_tag("fit"), rep, k, name_tag(to_string(runnable[m]))});
                Cell& cell = cells[(rep * n_tau + k) * n_method + m];
                try {
                    const FitResult fit = fit_method(runnable[m], train, mc);
                    const double score = instability_score(fit, test.x, test.y);
                    if (!std::isfinite(score)) continue;
                    cell.score = score;
                    if (k == 0 && with_truth) cell.metrics = selection_metrics(fit, *ds.true_beta);
                } catch (const Error&) {
                    // recorded as a gap: the point's replicate count drops
                }
            }
        }
    });

    for (std::size_t m = 0; m < n_method; ++m) {
        InstabilityCurve curve;
        curve.method = to_string(runnable[m]);
        std::vector<SelectionMetrics> records;
        for (std::size_t k = 0; k < n_tau; ++k) {
            std::vector<double> scores, pt_samples;
            for (std::size_t rep = 0; rep < n_rep; ++rep) {
                const Cell& cell = cells[(rep * n_tau + k) * n_method + m];
                pt_samples.push_back(cell.score.value_or(std::numeric_limits<double>::quiet_NaN()));
                if (cell.score) scores.push_back(*cell.score);
                if (cell.metrics) records.push_back(*cell.metrics);
            }
            CurvePoint pt;
            pt.tau = cfg.tau_values[k];
            pt.replicates = static_cast<int>(scores.size());
            pt.samples = std::move(pt_samples);
            if (!scores.empty()) {
                double sum = 0.0;
                for (double v : scores) sum += v;
                pt.mean = sum / static_cast<double>(scores.size());
                if (scores.size() > 1) {
                    double ss = 0.0;
                    for (double v : scores) ss += (v - pt.mean) * (v - pt.mean);
                    pt.sd = std::sqrt(ss / static_cast<double>(scores.size() - 1));
                }
            } else {
                pt.mean = std::numeric_limits<double>::quiet_NaN();
                pt.sd = std::numeric_limits<double>::quiet_NaN();
            }
            curve.points.push_back(pt);
        }
        if (!records.empty()) result.metrics.emplace_back(curve.method, aggregate_metrics(records));
        result.curves.push_back(std::move(curve));
    }
    return result;
}

void write_curves_csv(std::ostream& out, const std::vector<InstabilityCurve>& curves) {
    out << kSchemaHeader << '\n' << "method,tau,mean_instability,sd_instability,replicates\n";
    for (const auto& c : curves)
        for (const auto& pt : c.points)
            out << c.method << ',' << format_double(pt.tau) << ',' << format_double(pt.mean) << ','
                << format_double(pt.sd) << ',' << pt.replicates << '\n';
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << kSchemaHeader << '\n' << "method,tails,sparsity,tot,tr,fa\n";
    for (const auto& r : rows)
        out << r.method << ',' << to_string(r.tails) << ',' << format_double(r.sparsity) << ','
            << format_double(r.metrics.tot) << ',' << format_double(r.metrics.tr) << ','
            << format_double(r.metrics.fa) << '\n';
}

}  // namespace shrinkforge
