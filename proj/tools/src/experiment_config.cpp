#include "experiment_config.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "shrinkforge/errors.hpp"
#include "shrinkforge/format.hpp"
#include "shrinkforge/io.hpp"

namespace shrinkforge::cli {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kSections{"simulation", "instability", "ga", "oracle", "real"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    if (trim(text).empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("key '" + key + "': cannot parse '" + raw + "' as a number");
    return value;
}

bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + raw + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& raw, F&& one) {
    std::vector<T> out;
    for (const auto& item : split_list(raw)) out.push_back(one(item));
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& one) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += one(values[i]);
    }
    return out;
}

std::string num(double v) { return format_double(v); }
std::string num(Index v) { return std::to_string(v); }

// Reads the keys of one section, rejecting any it does not know.
class SectionReader {
public:
    SectionReader(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    template <class F>
    void get(const std::string& key, F&& assign) {
        known_.insert(key);
        if (!tree_) return;
        if (auto v = tree_->get_child_optional(pt::ptree::path_type(key, '\0'))) {
            const std::string qualified = name_.empty() ? key : name_ + "." + key;
            try {
                assign(qualified, v->data());
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError("key '" + qualified + "': " + e.what());
            }
        }
    }

    void finish(bool top_level) const {
        if (!tree_) return;
        for (const auto& [key, child] : *tree_) {
            if (top_level && (!child.empty() || kSections.contains(key))) continue;
            if (!known_.contains(key))
                throw ConfigError("unknown key '" + (name_.empty() ? key : name_ + "." + key) + "'");
        }
    }

private:
    const pt::ptree* tree_;
    std::string name_;
    std::set<std::string> known_;
};

Index parse_index(const std::string& k, const std::string& v) { return parse_number<Index>(k, v); }
double parse_double(const std::string& k, const std::string& v) { return parse_number<double>(k, v); }
int parse_int(const std::string& k, const std::string& v) { return parse_number<int>(k, v); }

std::vector<Method> parse_methods(const std::string& raw) {
    return parse_list<Method>(raw, [](const std::string& s) { return method_from_string(s); });
}

std::string methods_text(const std::vector<Method>& m) {
    return join(m, [](Method x) { return to_string(x); });
}

}  // namespace

void ExperimentConfig::validate() const {
    if (jobs < 1) throw ConfigError("jobs must be at least 1");

    const auto& s = simulation;
    if (s.n_values.empty() || s.sparsity.empty() || s.tails.empty() || s.covariance.empty())
        throw ConfigError("simulation grid lists must be nonempty");
    for (Index n : s.n_values)
        if (n < 2) throw ConfigError("simulation.n_values must be at least 2");
    if (s.p < 1) throw ConfigError("simulation.p must be positive");
    for (double v : s.sparsity)
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("simulation.sparsity must lie in [0, 1]");
    if (!(s.beta_sd >= 0.0)) throw ConfigError("simulation.beta_sd must be nonnegative");

    InstabilityConfig ic;
    ic.tau_values = instability.tau;
    ic.replicates = instability.replicates;
    ic.methods = {Method::RR};
    ic.validate();
    if ((instability.n_train == 0) != (instability.n_test == 0))
        throw ConfigError("instability.n_train and n_test must be given together");

    GaConfig gc;
    gc.population = ga.population;
    gc.max_generations = ga.generations;
    gc.elite_fraction = ga.elite_fraction;
    gc.mutation_rate = ga.mutation_rate;
    gc.diversity_epsilon = ga.diversity_epsilon;
    gc.grid_count = ga.grid_count;
    gc.gamma_min = ga.gamma_min;
    gc.validate();
    if (ga.n_train_lambda < 1 || ga.n_train_beta < 1 || ga.n_train_alpha < 1 || ga.n_test < 1)
        throw ConfigError("ga split blocks must all be positive");
    if (ga.data.empty() && ga.n_train_lambda + ga.n_train_beta + ga.n_train_alpha + ga.n_test != ga.n)
        throw ConfigError("ga split sizes must add up to ga.n");
    if (!(ga.sparsity >= 0.0 && ga.sparsity <= 1.0)) throw ConfigError("ga.sparsity must lie in [0, 1]");

    OracleRateSchedule sch{oracle.h_exponent, oracle.g_exponent, oracle.p, oracle.p0};
    sch.validate();
    if (oracle.replicates < 1) throw ConfigError("oracle.replicates must be at least 1");
    if (oracle.n_values.empty()) throw ConfigError("oracle.n_values must be nonempty");

    InstabilityConfig rc;
    rc.tau_values = real.tau;
    rc.replicates = real.replicates;
    rc.methods = {Method::RR};
    rc.validate();
    for (Index m : real.sizes)
        if (m < 2) throw ConfigError("real.sizes must be at least 2");
}

ExperimentConfig parse_config(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    for (const auto& [key, child] : tree)
        if (!child.empty() && !kSections.contains(key)) throw ConfigError("unknown section [" + key + "]");
    auto section = [&](const std::string& name) -> const pt::ptree* {
        auto c = tree.get_child_optional(name);
        return c ? &*c : nullptr;
    };

    ExperimentConfig c;
    SectionReader top(&tree, "");
    top.get("master_seed", [&](auto& k, auto& v) { c.master_seed = parse_number<std::uint64_t>(k, v); });
    top.get("output_dir", [&](auto&, auto& v) { c.output_dir = trim(v); });
    top.get("jobs", [&](auto& k, auto& v) { c.jobs = parse_number<unsigned>(k, v); });
    top.finish(true);

    auto& s = c.simulation;
    SectionReader sim(section("simulation"), "simulation");
    sim.get("n_values", [&](auto& k, auto& v) {
        s.n_values = parse_list<Index>(v, [&](const std::string& x) { return parse_index(k, x); });
    });
    sim.get("p", [&](auto& k, auto& v) { s.p = parse_index(k, v); });
    sim.get("sparsity", [&](auto& k, auto& v) {
        s.sparsity = parse_list<double>(v, [&](const std::string& x) { return parse_double(k, x); });
    });
    sim.get("tails", [&](auto&, auto& v) { s.tails = parse_list<Tails>(v, tails_from_string); });
    sim.get("covariance", [&](auto&, auto& v) {
        s.covariance = parse_list<CovarianceKind>(v, covariance_from_string);
    });
    sim.get("off_diagonal", [&](auto& k, auto& v) { s.off_diagonal = parse_double(k, v); });
    sim.get("beta_mean", [&](auto& k, auto& v) { s.beta_mean = parse_double(k, v); });
    sim.get("beta_sd", [&](auto& k, auto& v) { s.beta_sd = parse_double(k, v); });
    sim.finish(false);

    auto& in = c.instability;
    SectionReader ins(section("instability"), "instability");
    ins.get("methods", [&](auto&, auto& v) { in.methods = parse_methods(v); });
    ins.get("tau", [&](auto& k, auto& v) {
        in.tau = parse_list<double>(v, [&](const std::string& x) { return parse_double(k, x); });
    });
    ins.get("replicates", [&](auto& k, auto& v) { in.replicates = parse_int(k, v); });
    ins.get("n_train", [&](auto& k, auto& v) { in.n_train = parse_index(k, v); });
    ins.get("n_test", [&](auto& k, auto& v) { in.n_test = parse_index(k, v); });
    ins.finish(false);

    auto& g = c.ga;
    SectionReader gr(section("ga"), "ga");
    gr.get("population", [&](auto& k, auto& v) { g.population = parse_int(k, v); });
    gr.get("generations", [&](auto& k, auto& v) { g.generations = parse_int(k, v); });
    gr.get("elite_fraction", [&](auto& k, auto& v) { g.elite_fraction = parse_double(k, v); });
    gr.get("mutation_rate", [&](auto& k, auto& v) { g.mutation_rate = parse_double(k, v); });
    gr.get("diversity_epsilon", [&](auto& k, auto& v) { g.diversity_epsilon = parse_double(k, v); });
    gr.get("grid_count", [&](auto& k, auto& v) { g.grid_count = parse_int(k, v); });
    gr.get("gamma_min", [&](auto& k, auto& v) { g.gamma_min = parse_double(k, v); });
    gr.get("n", [&](auto& k, auto& v) { g.n = parse_index(k, v); });
    gr.get("sparsity", [&](auto& k, auto& v) { g.sparsity = parse_double(k, v); });
    gr.get("tails", [&](auto&, auto& v) { g.tails = tails_from_string(trim(v)); });
    gr.get("data", [&](auto&, auto& v) { g.data = trim(v); });
    gr.get("response", [&](auto&, auto& v) { g.response = trim(v); });
    gr.get("n_train_lambda", [&](auto& k, auto& v) { g.n_train_lambda = parse_index(k, v); });
    gr.get("n_train_beta", [&](auto& k, auto& v) { g.n_train_beta = parse_index(k, v); });
    gr.get("n_train_alpha", [&](auto& k, auto& v) { g.n_train_alpha = parse_index(k, v); });
    gr.get("n_test", [&](auto& k, auto& v) { g.n_test = parse_index(k, v); });
    gr.get("compare", [&](auto&, auto& v) { g.compare = parse_methods(v); });
    gr.finish(false);

    auto& o = c.oracle;
    SectionReader orr(section("oracle"), "oracle");
    orr.get("penalty", [&](auto&, auto& v) { o.penalty = penalty_kind_from_string(trim(v)); });
    orr.get("h_exponent", [&](auto& k, auto& v) { o.h_exponent = parse_double(k, v); });
    orr.get("g_exponent", [&](auto& k, auto& v) { o.g_exponent = parse_double(k, v); });
    orr.get("p", [&](auto& k, auto& v) { o.p = parse_index(k, v); });
    orr.get("p0", [&](auto& k, auto& v) { o.p0 = parse_index(k, v); });
    orr.get("n_values", [&](auto& k, auto& v) {
        o.n_values = parse_list<Index>(v, [&](const std::string& x) { return parse_index(k, x); });
    });
    orr.get("replicates", [&](auto& k, auto& v) { o.replicates = parse_int(k, v); });
    orr.get("pilot", [&](auto&, auto& v) { o.pilot = pilot_rule_from_string(trim(v)); });
    orr.finish(false);

    auto& r = c.real;
    SectionReader rr(section("real"), "real");
    rr.get("data", [&](auto&, auto& v) { r.data = trim(v); });
    rr.get("response", [&](auto&, auto& v) { r.response = trim(v); });
    rr.get("true_beta", [&](auto&, auto& v) { r.true_beta = trim(v); });
    rr.get("standardize", [&](auto& k, auto& v) { r.standardize = parse_bool(k, v); });
    rr.get("sizes", [&](auto& k, auto& v) {
        r.sizes = parse_list<Index>(v, [&](const std::string& x) { return parse_index(k, x); });
    });
    rr.get("methods", [&](auto&, auto& v) { r.methods = parse_methods(v); });
    rr.get("tau", [&](auto& k, auto& v) {
        r.tau = parse_list<double>(v, [&](const std::string& x) { return parse_double(k, x); });
    });
    rr.get("replicates", [&](auto& k, auto& v) { r.replicates = parse_int(k, v); });
    rr.finish(false);

    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text);
}

std::string to_ini(const ExperimentConfig& c) {
    std::ostringstream out;
    auto dbl = [](double v) { return num(v); };
    auto idx = [](Index v) { return num(v); };
    out << "master_seed = " << c.master_seed << '\n'
        << "output_dir = " << c.output_dir.string() << '\n'
        << "jobs = " << c.jobs << "\n\n";

    const auto& s = c.simulation;
    out << "[simulation]\n"
        << "n_values = " << join(s.n_values, idx) << '\n'
        << "p = " << s.p << '\n'
        << "sparsity = " << join(s.sparsity, dbl) << '\n'
        << "tails = " << join(s.tails, [](Tails t) { return to_string(t); }) << '\n'
        << "covariance = " << join(s.covariance, [](CovarianceKind k) { return to_string(k); }) << '\n'
        << "off_diagonal = " << num(s.off_diagonal) << '\n'
        << "beta_mean = " << num(s.beta_mean) << '\n'
        << "beta_sd = " << num(s.beta_sd) << "\n\n";

    const auto& in = c.instability;
    out << "[instability]\n"
        << "methods = " << methods_text(in.methods) << '\n'
        << "tau = " << join(in.tau, dbl) << '\n'
        << "replicates = " << in.replicates << '\n'
        << "n_train = " << in.n_train << '\n'
        << "n_test = " << in.n_test << "\n\n";

    const auto& g = c.ga;
    out << "[ga]\n"
        << "population = " << g.population << '\n'
        << "generations = " << g.generations << '\n'
        << "elite_fraction = " << num(g.elite_fraction) << '\n'
        << "mutation_rate = " << num(g.mutation_rate) << '\n'
        << "diversity_epsilon = " << num(g.diversity_epsilon) << '\n'
        << "grid_count = " << g.grid_count << '\n'
        << "gamma_min = " << num(g.gamma_min) << '\n'
        << "n = " << g.n << '\n'
        << "sparsity = " << num(g.sparsity) << '\n'
        << "tails = " << to_string(g.tails) << '\n'
        << "data = " << g.data.string() << '\n'
        << "response = " << g.response << '\n'
        << "n_train_lambda = " << g.n_train_lambda << '\n'
        << "n_train_beta = " << g.n_train_beta << '\n'
        << "n_train_alpha = " << g.n_train_alpha << '\n'
        << "n_test = " << g.n_test << '\n'
        << "compare = " << methods_text(g.compare) << "\n\n";

    const auto& o = c.oracle;
    out << "[oracle]\n"
        << "penalty = " << to_string(o.penalty) << '\n'
        << "h_exponent = " << num(o.h_exponent) << '\n'
        << "g_exponent = " << num(o.g_exponent) << '\n'
        << "p = " << o.p << '\n'
        << "p0 = " << o.p0 << '\n'
        << "n_values = " << join(o.n_values, idx) << '\n'
        << "replicates = " << o.replicates << '\n'
        << "pilot = " << to_string(o.pilot) << "\n\n";

    const auto& r = c.real;
    out << "[real]\n"
        << "data = " << r.data.string() << '\n'
        << "response = " << r.response << '\n'
        << "true_beta = " << r.true_beta.string() << '\n'
        << "standardize = " << (r.standardize ? "true" : "false") << '\n'
        << "sizes = " << join(r.sizes, idx) << '\n'
        << "methods = " << methods_text(r.methods) << '\n'
        << "tau = " << join(r.tau, dbl) << '\n'
        << "replicates = " << r.replicates << '\n';
    return out.str();
}

}  // namespace shrinkforge::cli
