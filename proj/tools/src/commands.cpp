#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "shrinkforge/errors.hpp"
#include "shrinkforge/format.hpp"
#include "shrinkforge/io.hpp"
#include "shrinkforge/random.hpp"
#include "shrinkforge/stability.hpp"

namespace shrinkforge::cli {

namespace {

std::filesystem::path prepare_output(const ExperimentConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + config.output_dir.string() + ": " + ec.message());
    return config.output_dir;
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    std::ostringstream buffer;
    writer(buffer);
    write_text(path, buffer.str());
}

SimConfig cell_sim(const ExperimentConfig& config, Index n, double sparsity, Tails tails, CovarianceKind cov) {
    const auto& s = config.simulation;
    SimConfig sim;
    sim.n = n;
    sim.p = s.p;
    sim.sparsity = sparsity;
    sim.tails = tails;
    sim.covariance = CovarianceSpec{cov, s.off_diagonal};
    sim.beta_mean = s.beta_mean;
    sim.beta_sd = s.beta_sd;
    sim.seed = derive_seed(config.master_seed, {name_tag("dataset"), name_tag(cell_label(n, sparsity, tails, cov))});
    return sim;
}

template <class F>
void for_each_cell(const ExperimentConfig& config, F&& body) {
    const auto& s = config.simulation;
    for (Index n : s.n_values)
        for (double sp : s.sparsity)
            for (Tails t : s.tails)
                for (CovarianceKind cov : s.covariance) body(n, sp, t, cov);
}

// A method whose every point lost all its replicates.
bool all_failed(const InstabilityCurve& curve) {
    for (const auto& pt : curve.points)
        if (pt.replicates > 0) return false;
    return true;
}

void log_skips(std::ostream& log, const std::string& where, const InstabilityResult& res) {
    for (const auto& s : res.skipped) log << where << ": skipped " << s.method << " (" << s.reason << ")\n";
}

}  // namespace

std::string cell_label(Index n, double sparsity, Tails tails, CovarianceKind covariance) {
    return "n" + std::to_string(n) + "_s" + format_double(sparsity) + "_" + to_string(tails) + "_" +
           to_string(covariance);
}

int cmd_simulate(const ExperimentConfig& config, std::ostream& log) {
    const auto dir = prepare_output(config);
    for_each_cell(config, [&](Index n, double sp, Tails t, CovarianceKind cov) {
        const std::string label = cell_label(n, sp, t, cov);
        const Dataset ds = generate_dataset(cell_sim(config, n, sp, t, cov));
        write_csv(ds, dir / ("dataset_" + label + ".csv"));
        write_true_beta(ds, dir / ("true_beta_" + label + ".csv"));
        log << label << ": wrote " << ds.n() << " rows\n";
    });
    return kExitOk;
}

int cmd_instability(const ExperimentConfig& config, std::ostream& log) {
    const auto dir = prepare_output(config);
    const auto& ins = config.instability;
    int status = kExitOk;
    for_each_cell(config, [&](Index n, double sp, Tails t, CovarianceKind cov) {
        const std::string label = cell_label(n, sp, t, cov);
        const Dataset ds = generate_dataset(cell_sim(config, n, sp, t, cov));
        InstabilityConfig ic;
        ic.tau_values = ins.tau;
        ic.replicates = ins.replicates;
        ic.methods = ins.methods.empty() ? standard_methods() : ins.methods;
        ic.split = ins.n_train > 0 ? SplitSpec{ins.n_train, ins.n_test, 0, 0, 0, 0} : default_split(n);
        ic.seed = derive_seed(config.master_seed, {name_tag("instability"), name_tag(label)});
        ic.jobs = config.jobs;
        InstabilityResult res;
        try {
            res = instability_curves(ds, ic);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            log << label << ": failed: " << e.what() << '\n';
            status = kExitPartial;
            return;
        }
        log_skips(log, label, res);
        for (const auto& c : res.curves)
            if (all_failed(c)) {
                log << label << ": every " << c.method << " fit failed\n";
                status = kExitPartial;
            }
        write_file(dir / ("curves_" + label + ".csv"), [&](std::ostream& o) { write_curves_csv(o, res.curves); });
        std::vector<MetricsRow> rows;
        for (const auto& [method, m] : res.metrics) rows.push_back(MetricsRow{method, t, sp, m});
        write_file(dir / ("metrics_" + label + ".csv"), [&](std::ostream& o) { write_metrics_csv(o, rows); });
        log << label << ": done\n";
    });
    return status;
}

int cmd_ga(const ExperimentConfig& config, std::ostream& log) {
    const auto dir = prepare_output(config);
    const auto& g = config.ga;
    Dataset ds;
    if (g.data.empty()) {
        SimConfig sim;
        sim.n = g.n;
        sim.p = config.simulation.p;
        sim.sparsity = g.sparsity;
        sim.tails = g.tails;
        sim.covariance = CovarianceSpec{config.simulation.covariance.front(), config.simulation.off_diagonal};
        sim.beta_mean = config.simulation.beta_mean;
        sim.beta_sd = config.simulation.beta_sd;
        sim.seed = derive_seed(config.master_seed, {name_tag("ga-data")});
        ds = generate_dataset(sim);
    } else {
        ds = load_csv(g.data, g.response, config.real.standardize);
    }
    const Index used = g.n_train_lambda + g.n_train_beta + g.n_train_alpha + g.n_test;
    if (used != ds.n())
        throw ConfigError("ga split sizes add up to " + std::to_string(used) + " but the data have " +
                          std::to_string(ds.n()) + " rows");

    SplitSpec spec;
    spec.n_train = g.n_train_lambda + g.n_train_beta + g.n_train_alpha;
    spec.n_test = g.n_test;
    spec.n_train_lambda = g.n_train_lambda;
    spec.n_train_beta = g.n_train_beta;
    spec.n_train_alpha = g.n_train_alpha;
    spec.seed = derive_seed(config.master_seed, {name_tag("ga-split")});
    const SplitIndices idx = split(ds.n(), spec);

    GaConfig gc;
    gc.population = g.population;
    gc.max_generations = g.generations;
    gc.elite_fraction = g.elite_fraction;
    gc.mutation_rate = g.mutation_rate;
    gc.diversity_epsilon = g.diversity_epsilon;
    gc.grid_count = g.grid_count;
    gc.gamma_min = g.gamma_min;
    gc.seed = derive_seed(config.master_seed, {name_tag("ga")});
    gc.jobs = config.jobs;

    const GaMode mode = resolve_mode(g.n_train_beta, ds.p());
    log << "ga: mode " << to_string(mode) << " (n_train_beta = " << g.n_train_beta << ", p = " << ds.p() << ")\n";
    const GaRunResult res = run_ga(ds, idx, gc);
    log << "ga: " << res.generations_run << " generations, stopped on " << to_string(res.stop_reason)
        << ", best fitness " << format_double(res.best.fitness) << '\n';

    write_file(dir / "ga_log.jsonl", [&](std::ostream& o) { write_ga_log(o, res); });
    write_text(dir / "ga_penalty.json", penalty_to_json(res.final_penalty) + "\n");
    int status = kExitOk;
    if (res.final_fit.beta_hat.size() == ds.p()) {
        write_text(dir / "ga_fit.json", fit_to_json(res.final_fit) + "\n");
    } else {
        log << "ga: no genome produced a finite fit\n";
        status = kExitPartial;
    }

    MethodConfig mc;
    mc.seed = derive_seed(config.master_seed, {name_tag("ga-compare")});
    const auto rows = compare_methods(ds, idx, res, g.compare.empty() ? standard_methods() : g.compare, mc);
    for (const auto& r : rows)
        if (!r.ran) log << "ga: " << r.method << " not compared (" << r.note << ")\n";
    write_file(dir / "comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, rows); });
    return status;
}

int cmd_oracle(const ExperimentConfig& config, std::ostream& log) {
    const auto dir = prepare_output(config);
    const auto& o = config.oracle;
    OracleConfig oc;
    oc.penalty = o.penalty;
    oc.schedule = OracleRateSchedule{o.h_exponent, o.g_exponent, o.p, o.p0};
    oc.n_values = o.n_values;
    oc.replicates = o.replicates;
    oc.seed = derive_seed(config.master_seed, {name_tag("oracle")});
    oc.jobs = config.jobs;

    auto partial = [](const OracleReport& r) {
        for (const auto& row : r.rows)
            if (row.replicates == 0) return true;
        return false;
    };
    int status = kExitOk;
    if (o.pilot == PilotRule::none) {
        const OracleReport r = oracle_sweep(oc);
        write_file(dir / "oracle.csv", [&](std::ostream& out) { write_oracle_csv(out, r); });
        log << "oracle: " << r.trend << '\n';
        if (partial(r)) status = kExitPartial;
    } else {
        const ShiftedOracleReport r = shifted_oracle_sweep(oc, o.pilot);
        write_file(dir / "oracle.csv", [&](std::ostream& out) { write_oracle_csv(out, r.baseline); });
        write_file(dir / "oracle_shifted.csv", [&](std::ostream& out) { write_oracle_csv(out, r.shifted); });
        log << "oracle: unshifted " << r.baseline.trend << '\n'
            << "oracle: shifted (" << to_string(o.pilot) << ") " << r.shifted.trend << '\n';
        if (partial(r.baseline) || partial(r.shifted)) status = kExitPartial;
    }
    return status;
}

int cmd_real(const ExperimentConfig& config, std::ostream& log) {
    const auto& r = config.real;
    if (r.data.empty()) throw ConfigError("real.data must name a CSV file");
    Dataset ds = load_csv(r.data, r.response, r.standardize);
    if (!r.true_beta.empty()) {
        Eigen::VectorXd tb = read_true_beta(r.true_beta);
        if (tb.size() != ds.p()) throw ConfigError("real.true_beta length differs from the number of predictors");
        ds.true_beta = std::move(tb);
    }
    for (Index m : r.sizes)
        if (m > ds.n())
            throw ConfigError("subsample size " + std::to_string(m) + " exceeds the " + std::to_string(ds.n()) +
                              " available rows");
    log << "real: " << ds.n() << " rows, " << ds.p() << " predictors\n";

    const auto dir = prepare_output(config);
    int status = kExitOk;
    for (Index m : r.sizes) {
        const std::string label = "n" + std::to_string(m);
        const Dataset sub =
            subsample(ds, m, derive_seed(config.master_seed, {name_tag("subsample"), static_cast<std::uint64_t>(m)}));
        InstabilityConfig ic;
        ic.tau_values = r.tau;
        ic.replicates = r.replicates;
        ic.methods = r.methods.empty() ? standard_methods() : r.methods;
        ic.split = default_split(m);
        ic.seed = derive_seed(config.master_seed, {name_tag("real"), static_cast<std::uint64_t>(m)});
        ic.jobs = config.jobs;
        InstabilityResult res;
        try {
            res = instability_curves(sub, ic);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            log << label << ": failed: " << e.what() << '\n';
            status = kExitPartial;
            continue;
        }
        log_skips(log, label, res);
        for (const auto& c : res.curves)
            if (all_failed(c)) {
                log << label << ": every " << c.method << " fit failed\n";
                status = kExitPartial;
            }
        write_file(dir / ("curves_" + label + ".csv"), [&](std::ostream& o) { write_curves_csv(o, res.curves); });
        if (sub.true_beta) {
            std::vector<MetricsRow> rows;
            for (const auto& [method, mm] : res.metrics) rows.push_back(MetricsRow{method, Tails::light, 0.0, mm});
            write_file(dir / ("metrics_" + label + ".csv"), [&](std::ostream& o) { write_metrics_csv(o, rows); });
        }
        log << label << ": done\n";
    }
    return status;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& log) {
    CLI::App app{"Shrinkage method stability, penalty search and oracle diagnostics"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<unsigned> jobs;
    bool no_standardize = false;

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const ExperimentConfig&, std::ostream&);
    };
    const Sub subs[] = {
        {"instability", "Instability curves and selection metrics over the simulation grid", cmd_instability},
        {"ga", "Genetic search over polynomial penalties and an MSPE comparison", cmd_ga},
        {"oracle", "Zero recovery and interval coverage under a rate schedule", cmd_oracle},
        {"real", "Instability curves on subsamples of a CSV data set", cmd_real},
        {"simulate", "Write simulated data sets for every grid cell", cmd_simulate},
    };
    std::vector<CLI::App*> handles;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", config_path, "INI experiment file");
        sub->add_option("--seed", seed, "master seed (overrides the file)");
        sub->add_option("--out", out_dir, "output directory (overrides the file)");
        sub->add_option("--jobs", jobs, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
        sub->add_flag("--no-standardize", no_standardize, "keep CSV predictors on their original scale");
        handles.push_back(sub);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        log << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (seed) config.master_seed = *seed;
        if (out_dir) config.output_dir = *out_dir;
        if (jobs) config.jobs = *jobs;
        if (no_standardize) config.real.standardize = false;
        config.validate();
        for (std::size_t i = 0; i < handles.size(); ++i)
            if (handles[i]->parsed()) return subs[i].run(config, log);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParseError& e) {
        log << "input error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitPartial;
    }
    return kExitConfig;
}

}  // namespace shrinkforge::cli
