#include "shrinkforge/diagnostics.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include "shrinkforge/errors.hpp"
#include "shrinkforge/format.hpp"
#include "shrinkforge/methods.hpp"
#include "shrinkforge/parallel.hpp"
#include "shrinkforge/random.hpp"
#include "shrinkforge/solver.hpp"

namespace shrinkforge {

void OracleRateSchedule::validate() const {
    if (!(h_exponent > 0.0)) throw ConfigError("h_exponent must be positive");
    if (!(g_exponent > 0.0 && g_exponent < 0.5)) throw ConfigError("g_exponent must lie in (0, 1/2)");
    if (p0 < 1 || p0 >= p) throw ConfigError("need 0 < p0 < p");
}

double OracleRateSchedule::a_n(Index n) const { return std::pow(static_cast<double>(n), -0.5 - h_exponent); }

double OracleRateSchedule::b_n(Index n) const { return std::pow(static_cast<double>(n), g_exponent - 0.5); }

Eigen::VectorXd OracleRateSchedule::lambdas(Index n) const {
    Eigen::VectorXd v(p);
    v.head(p0).setConstant(a_n(n));
    v.tail(p - p0).setConstant(b_n(n));
    return v;
}

std::string to_string(PilotRule rule) {
    switch (rule) {
        case PilotRule::none: return "none";
        case PilotRule::truth: return "truth";
        case PilotRule::ols: return "ols";
        case PilotRule::scad2: return "scad2";
    }
    return "none";
}

PilotRule pilot_rule_from_string(const std::string& name) {
    for (auto r : {PilotRule::none, PilotRule::truth, PilotRule::ols, PilotRule::scad2})
        if (to_string(r) == name) return r;
    throw ConfigError("unknown pilot rule '" + name + "'");
}

namespace {

struct ReplicateOutcome {
    bool ok = false;
    bool recovered = false;
    int covered = 0;
    int head = 0;
};

Eigen::VectorXd pilot_shift(PilotRule rule, const Dataset& ds, std::uint64_t seed) {
    switch (rule) {
        case PilotRule::none: return Eigen::VectorXd::Zero(ds.p());
        case PilotRule::truth: return *ds.true_beta;
        case PilotRule::ols: return ols_fit(ds.x, ds.y).beta_hat;
        case PilotRule::scad2: {
            MethodConfig mc;
            mc.seed = seed;
            return fit_method(Method::SCAD2, ds, mc).beta_hat;
        }
    }
    return Eigen::VectorXd::Zero(ds.p());
}

ReplicateOutcome run_replicate(const OracleConfig& cfg, Index n, std::uint64_t seed, PilotRule pilot) {
    const auto& sch = cfg.schedule;
    SimConfig sim;
    sim.n = n;
    sim.p = sch.p;
    sim.sparsity = static_cast<double>(sch.p - sch.p0) / static_cast<double>(sch.p);
    sim.tails = Tails::light;
    sim.seed = seed;
    const Dataset ds = generate_dataset(sim);

    PenaltySpec pen = PenaltySpec::make(cfg.penalty, sch.p);
    pen.weights = sch.lambdas(n);
    pen.shifts = pilot_shift(pilot, ds, derive_seed(seed, {name_tag("pilot")}));

    // (1/n)||y/sqrt2 - (X/sqrt2) b||^2 is the (1/2n) Gaussian log-likelihood loss.
    const Eigen::MatrixXd xs = ds.x / std::sqrt(2.0);
    const Eigen::VectorXd ys = ds.y / std::sqrt(2.0);
    const Objective obj{Loss::squared, pen, 1.0, xs, ys};
    const SolverOptions inner{1e-12, 100000, 1e-10};
    FitResult fit;
    if (pen.folded_concave()) {
        fit = lla_fit(obj, std::nullopt, LlaOptions{10, 1e-6, inner});
    } else {
        fit = coordinate_fit(obj, std::nullopt, inner);
    }

    ReplicateOutcome out;
    out.ok = true;
    out.recovered = (fit.beta_hat.tail(sch.p - sch.p0).array() == 0.0).all();

    const Eigen::VectorXd r = ds.y - ds.x * fit.beta_hat;
    Index active = 0;
    for (Index j = 0; j < sch.p; ++j) active += fit.beta_hat(j) != 0.0;
    const double dof = static_cast<double>(n - active);
    if (dof <= 0.0) throw RankError("no residual degrees of freedom");
    const double s2 = r.squaredNorm() / dof;
    const Eigen::MatrixXd x1 = ds.x.leftCols(sch.p0);
    const Eigen::MatrixXd info = (x1.transpose() * x1) / static_cast<double>(n);
    const Eigen::MatrixXd inv = info.ldlt().solve(Eigen::MatrixXd::Identity(sch.p0, sch.p0));
    const double root_n = std::sqrt(static_cast<double>(n));
    for (Index j = 0; j < sch.p0; ++j) {
        const double z = root_n * (fit.beta_hat(j) - (*ds.true_beta)(j)) / std::sqrt(s2 * inv(j, j));
        out.covered += std::abs(z) <= 1.96;
        ++out.head;
    }
    return out;
}

OracleReport sweep(const OracleConfig& cfg, PilotRule pilot) {
    cfg.schedule.validate();
    if (cfg.replicates < 1) throw ConfigError("replicates must be at least 1");
    if (cfg.n_values.empty()) throw ConfigError("no sample sizes given");
    for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
        if (cfg.n_values[i] <= cfg.schedule.p) throw ConfigError("every n must exceed p");
        if (i > 0 && cfg.n_values[i] <= cfg.n_values[i - 1]) throw ConfigError("n values must increase");
    }
    if (cfg.penalty != PenaltyKind::scad && cfg.penalty != PenaltyKind::mcp && cfg.penalty != PenaltyKind::lasso)
        throw ConfigError("oracle sweeps support scad, mcp and lasso");

    OracleReport report;
    for (Index n : cfg.n_values) {
        std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.replicates));
        parallel_for(outcomes.size(), cfg.jobs, [&](std::size_t rep) {
            const std::uint64_t seed =
                derive_seed(cfg.seed, {name_tag("oracle"), static_cast<std::uint64_t>(n), rep});
            try {
                outcomes[rep] = run_replicate(cfg, n, seed, pilot);
            } catch (const Error&) {
                outcomes[rep] = ReplicateOutcome{};
            }
        });
        OracleRow row;
        row.n = n;
        row.penalty = to_string(cfg.penalty);
        int recovered = 0, covered = 0, head = 0;
        for (const auto& o : outcomes) {
            if (!o.ok) continue;
            ++row.replicates;
            recovered += o.recovered;
            covered += o.covered;
            head += o.head;
        }
        if (row.replicates > 0) row.zero_recovery_rate = static_cast<double>(recovered) / row.replicates;
        if (head > 0) row.coverage = static_cast<double>(covered) / head;
        report.rows.push_back(row);
    }

    std::ostringstream trend;
    const auto& first = report.rows.front();
    const auto& last = report.rows.back();
    trend << "recovery " << format_double(first.zero_recovery_rate) << " at n=" << first.n << " -> "
          << format_double(last.zero_recovery_rate) << " at n=" << last.n << ", inversions "
          << recovery_inversions(report);
    report.trend = trend.str();
    return report;
}

}  // namespace

OracleReport oracle_sweep(const OracleConfig& cfg) { return sweep(cfg, PilotRule::none); }

ShiftedOracleReport shifted_oracle_sweep(const OracleConfig& cfg, PilotRule pilot) {
    ShiftedOracleReport out;
    out.shifted = sweep(cfg, pilot);
    out.baseline = pilot == PilotRule::none ? out.shifted : sweep(cfg, PilotRule::none);
    return out;
}

int recovery_inversions(const OracleReport& report) {
    int count = 0;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        count += report.rows[i].zero_recovery_rate < report.rows[i - 1].zero_recovery_rate;
    return count;
}

void write_oracle_csv(std::ostream& out, const OracleReport& report) {
    out << kSchemaHeader << '\n'
        << "# lambda_j uses the true support: a_n on nonzero coordinates, b_n on the rest\n"
        << "n,penalty,zero_recovery_rate,coverage,replicates\n";
    for (const auto& r : report.rows)
        out << r.n << ',' << r.penalty << ',' << format_double(r.zero_recovery_rate) << ','
            << format_double(r.coverage) << ',' << r.replicates << '\n';
    out << "# trend: " << report.trend << '\n';
}

}  // namespace shrinkforge
