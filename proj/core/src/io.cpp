#include "shrinkforge/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shrinkforge/errors.hpp"
#include "shrinkforge/format.hpp"

namespace shrinkforge {

using json = nlohmann::json;

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string to_string(Tails tails) { return tails == Tails::light ? "light" : "heavy"; }

Tails tails_from_string(const std::string& name) {
    if (name == "light") return Tails::light;
    if (name == "heavy") return Tails::heavy;
    throw ConfigError("unknown tails '" + name + "'");
}

std::string to_string(CovarianceKind kind) {
    switch (kind) {
        case CovarianceKind::identity: return "identity";
        case CovarianceKind::tridiagonal: return "tridiagonal";
        case CovarianceKind::toeplitz: return "toeplitz";
    }
    return "identity";
}

CovarianceKind covariance_from_string(const std::string& name) {
    for (auto k : {CovarianceKind::identity, CovarianceKind::tridiagonal, CovarianceKind::toeplitz})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown covariance '" + name + "'");
}

namespace {

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
}

json genome_array(const Genome& g) { return json(std::vector<double>(g.alpha.begin(), g.alpha.end())); }

Genome genome_of(const json& j) {
    if (!j.is_array() || j.size() != Genome::kTerms) throw ConfigError("genome must have six coefficients");
    Genome g;
    for (int k = 0; k < Genome::kTerms; ++k) g.alpha[static_cast<std::size_t>(k)] = j.at(k).get<double>();
    if (!g.valid()) throw ConfigError("genome coefficients must lie in [0, 20]");
    return g;
}

Eigen::VectorXd vector_of(const json& j, bool allow_exclude) {
    if (!j.is_array()) throw ConfigError("expected an array");
    Eigen::VectorXd v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (allow_exclude && j[i].is_string() && j[i].get<std::string>() == "exclude")
            v(static_cast<Index>(i)) = kExclude;
        else
            v(static_cast<Index>(i)) = j[i].get<double>();
    }
    return v;
}

}  // namespace

std::string penalty_to_json(const PenaltySpec& spec) {
    json weights = json::array();
    for (Index j = 0; j < spec.weights.size(); ++j) {
        if (is_excluded(spec.weights(j)))
            weights.push_back("exclude");
        else
            weights.push_back(spec.weights(j));
    }
    json out{{"kind", to_string(spec.kind)},
             {"params",
              {{"mix", spec.mix}, {"scad_a", spec.scad_a}, {"mcp_g", spec.mcp_g}, {"genome", genome_array(spec.genome)}}},
             {"weights", weights},
             {"shifts", std::vector<double>(spec.shifts.data(), spec.shifts.data() + spec.shifts.size())}};
    return out.dump();
}

PenaltySpec penalty_from_json(const std::string& text) {
    const json j = parse(text);
    try {
        PenaltySpec spec;
        spec.kind = penalty_kind_from_string(j.at("kind").get<std::string>());
        const json& params = j.at("params");
        spec.mix = params.value("mix", 0.5);
        spec.scad_a = params.value("scad_a", 3.7);
        spec.mcp_g = params.value("mcp_g", 3.0);
        if (params.contains("genome")) spec.genome = genome_of(params.at("genome"));
        spec.weights = vector_of(j.at("weights"), true);
        spec.shifts = vector_of(j.at("shifts"), false);
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad penalty JSON: ") + e.what());
    }
}

std::string genome_to_json(const Genome& genome) { return genome_array(genome).dump(); }

Genome genome_from_json(const std::string& text) {
    try {
        return genome_of(parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad genome JSON: ") + e.what());
    }
}

std::string fit_to_json(const FitResult& fit) {
    json out{{"method", fit.method},
             {"lambda_hat", fit.lambda_hat},
             {"beta_hat", std::vector<double>(fit.beta_hat.data(), fit.beta_hat.data() + fit.beta_hat.size())},
             {"zero_set", std::vector<long long>(fit.zero_set.begin(), fit.zero_set.end())},
             {"converged", fit.converged},
             {"iterations", fit.iterations}};
    return out.dump();
}

FitResult fit_from_json(const std::string& text) {
    const json j = parse(text);
    try {
        FitResult fit;
        fit.method = j.at("method").get<std::string>();
        fit.lambda_hat = j.at("lambda_hat").get<double>();
        fit.beta_hat = vector_of(j.at("beta_hat"), false);
        for (const auto& z : j.at("zero_set")) fit.zero_set.push_back(z.get<Index>());
        fit.converged = j.at("converged").get<bool>();
        fit.iterations = j.at("iterations").get<int>();
        return fit;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad fit JSON: ") + e.what());
    }
}

Eigen::VectorXd read_true_beta(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    std::vector<double> values;
    bool header_seen = false;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        double v = 0.0;
        const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
        if (res.ec != std::errc{} || res.ptr != line.data() + line.size())
            throw ParseError("not a number: '" + line + "'", row, 1);
        values.push_back(v);
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Index>(values.size()));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace shrinkforge
