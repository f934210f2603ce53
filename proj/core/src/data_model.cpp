#include "shrinkforge/data_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "shrinkforge/errors.hpp"
#include "shrinkforge/format.hpp"
#include "shrinkforge/random.hpp"

namespace shrinkforge {

void Dataset::validate() const {
    if (x.rows() < 1 || x.cols() < 1) throw ConfigError("dataset needs n >= 1 and p >= 1");
    if (x.rows() != y.size()) throw ConfigError("design row count differs from response length");
    if (true_beta && true_beta->size() != x.cols()) throw ConfigError("true_beta length differs from p");
    if (true_sigma && !(*true_sigma > 0.0)) throw ConfigError("true_sigma must be positive");
}

Eigen::MatrixXd CovarianceSpec::matrix(Index p) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p);
    switch (kind) {
        case CovarianceKind::identity:
            break;
        case CovarianceKind::tridiagonal:
            for (Index i = 0; i + 1 < p; ++i) {
                m(i, i + 1) = off_diagonal;
                m(i + 1, i) = off_diagonal;
            }
            break;
        case CovarianceKind::toeplitz:
            for (Index i = 0; i < p; ++i)
                for (Index j = 0; j < p; ++j)
                    m(i, j) = std::pow(off_diagonal, static_cast<double>(std::abs(i - j)));
            break;
    }
    return m;
}

void SimConfig::validate() const {
    if (n < 1 || p < 1) throw ConfigError("simulation needs n >= 1 and p >= 1");
    if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw ConfigError("sparsity must lie in [0, 1]");
    if (!(beta_sd > 0.0)) throw ConfigError("beta_sd must be positive");
    if (!(covariance.off_diagonal > -1.0 && covariance.off_diagonal < 1.0))
        throw ConfigError("off_diagonal must lie in (-1, 1)");
    if (tails == Tails::heavy && covariance.kind != CovarianceKind::identity)
        throw ConfigError("heavy tails are only defined with identity covariance");
}

Index SimConfig::zero_count() const {
    return static_cast<Index>(std::lround(sparsity * static_cast<double>(p)));
}

Dataset generate_dataset(const SimConfig& cfg) {
    cfg.validate();
    Rng rng = make_rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::student_t_distribution<double> t3(3.0);

    Dataset ds;
    ds.x.resize(cfg.n, cfg.p);
    if (cfg.tails == Tails::heavy) {
        for (Index i = 0; i < cfg.n; ++i)
            for (Index j = 0; j < cfg.p; ++j) ds.x(i, j) = t3(rng);
    } else {
        Eigen::MatrixXd cov = cfg.covariance.matrix(cfg.p);
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) throw FactorizationError("covariance is not positive definite");
        Eigen::MatrixXd lower = llt.matrixL();
        Eigen::VectorXd z(cfg.p);
        for (Index i = 0; i < cfg.n; ++i) {
            for (Index j = 0; j < cfg.p; ++j) z(j) = normal(rng);
            ds.x.row(i) = (lower * z).transpose();
        }
    }

    const Index nonzero = cfg.nonzero_count();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(cfg.p);
    for (Index j = 0; j < nonzero; ++j) beta(j) = cfg.beta_mean + cfg.beta_sd * normal(rng);

    Eigen::VectorXd eps(cfg.n);
    for (Index i = 0; i < cfg.n; ++i) eps(i) = cfg.tails == Tails::heavy ? t3(rng) : normal(rng);

    ds.y = ds.x * beta + eps;
    ds.true_beta = beta;
    ds.true_sigma = cfg.tails == Tails::heavy ? std::sqrt(3.0) : 1.0;
    return ds;
}

Dataset perturb_response(const Dataset& ds, double tau, std::uint64_t seed) {
    if (!(tau >= 0.0)) throw DomainError("perturbation scale tau must be nonnegative");
    Dataset out = ds;
    if (tau == 0.0) return out;
    Rng rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, tau);
    for (Index i = 0; i < out.y.size(); ++i) out.y(i) += noise(rng);
    return out;
}

SplitIndices split(Index n, const SplitSpec& spec) {
    if (spec.n_train < 0 || spec.n_test < 0 || spec.n_train_lambda < 0 || spec.n_train_beta < 0 ||
        spec.n_train_alpha < 0)
        throw ConfigError("split counts must be nonnegative");
    if (spec.n_train + spec.n_test != n) throw ConfigError("n_train + n_test must equal n");
    if (spec.has_subsplit() && spec.n_train_lambda + spec.n_train_beta + spec.n_train_alpha != spec.n_train)
        throw ConfigError("training sub-split counts must sum to n_train");

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng = make_rng(spec.seed);
    std::shuffle(order.begin(), order.end(), rng);

    SplitIndices out;
    auto first = order.begin();
    out.train.assign(first, first + spec.n_train);
    out.test.assign(first + spec.n_train, order.end());
    if (spec.has_subsplit()) {
        auto at = out.train.begin();
        out.train_lambda.assign(at, at + spec.n_train_lambda);
        at += spec.n_train_lambda;
        out.train_beta.assign(at, at + spec.n_train_beta);
        at += spec.n_train_beta;
        out.train_alpha.assign(at, out.train.end());
    }
    return out;
}

void standardize_columns(Eigen::MatrixXd& x) {
    const Index n = x.rows();
    for (Index j = 0; j < x.cols(); ++j) {
        auto col = x.col(j);
        const double mean = col.mean();
        col.array() -= mean;
        const double ss = col.squaredNorm();
        const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        if (sd > 0.0) col /= sd;
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double parse_cell(const std::string& raw, long row, long column) {
    std::string cell = trim(raw);
    if (!cell.empty() && cell.front() == '+') cell.erase(0, 1);
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (cell.empty() || ec != std::errc() || ptr != end)
        throw ParseError("non-numeric cell '" + raw + "'", row, column);
    return value;
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& response, bool standardize) {
    std::istringstream in(text);
    std::string line;
    long row_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++row_no;
        if (row_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line.front() == '#') continue;  // schema/comment lines
        have_header = true;
        break;
    }
    if (!have_header) throw ParseError("missing header row", 1, 1);
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);

    auto it = std::find(header.begin(), header.end(), response);
    if (it == header.end()) throw ConfigError("response column '" + response + "' not found");
    const auto response_col = static_cast<std::size_t>(it - header.begin());
    if (header.size() < 2) throw ConfigError("need at least one design column");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()),
                             row_no, static_cast<long>(std::min(cells.size(), header.size())) + 1);
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            values[c] = parse_cell(cells[c], row_no, static_cast<long>(c) + 1);
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ConfigError("no data rows");

    const Index n = static_cast<Index>(rows.size());
    const Index p = static_cast<Index>(header.size()) - 1;
    Dataset ds;
    ds.y.resize(n);
    ds.x.resize(n, p);
    for (Index i = 0; i < n; ++i) {
        Index j = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == response_col)
                ds.y(i) = rows[static_cast<std::size_t>(i)][c];
            else
                ds.x(i, j++) = rows[static_cast<std::size_t>(i)][c];
        }
    }
    if (standardize) standardize_columns(ds.x);
    ds.validate();
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& response, bool standardize) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), response, standardize);
}

Dataset take_rows(const Dataset& ds, std::span<const Index> rows) {
    Dataset out;
    const auto m = static_cast<Index>(rows.size());
    out.y.resize(m);
    out.x.resize(m, ds.p());
    for (Index i = 0; i < m; ++i) {
        const Index r = rows[static_cast<std::size_t>(i)];
        out.y(i) = ds.y(r);
        out.x.row(i) = ds.x.row(r);
    }
    out.true_beta = ds.true_beta;
    out.true_sigma = ds.true_sigma;
    return out;
}

Dataset subsample(const Dataset& ds, Index m, std::uint64_t seed) {
    if (m < 1 || m > ds.n()) throw DomainError("subsample size must lie in [1, n]");
    std::vector<Index> order(static_cast<std::size_t>(ds.n()));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng = make_rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(static_cast<std::size_t>(m));
    return take_rows(ds, order);
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << kSchemaHeader << '\n' << "y";
    for (Index j = 0; j < ds.p(); ++j) out << ",x" << (j + 1);
    out << '\n';
    for (Index i = 0; i < ds.n(); ++i) {
        out << format_double(ds.y(i));
        for (Index j = 0; j < ds.p(); ++j) out << ',' << format_double(ds.x(i, j));
        out << '\n';
    }
}

void write_true_beta(const Dataset& ds, const std::filesystem::path& path) {
    if (!ds.true_beta) throw ConfigError("dataset carries no true_beta");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << kSchemaHeader << '\n' << "true_beta\n";
    for (Index j = 0; j < ds.true_beta->size(); ++j) out << format_double((*ds.true_beta)(j)) << '\n';
}

}  // namespace shrinkforge
