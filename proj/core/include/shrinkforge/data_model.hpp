#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shrinkforge {

using Index = Eigen::Index;

/// Response vector, design matrix and, for simulated data, the generating
/// coefficients and error scale.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    std::optional<Eigen::VectorXd> true_beta;
    std::optional<double> true_sigma;

    Index n() const { return x.rows(); }
    Index p() const { return x.cols(); }

    /// Throws ConfigError when shapes disagree or the set is empty.
    void validate() const;
};

enum class CovarianceKind { identity, tridiagonal, toeplitz };
enum class Tails { light, heavy };

struct CovarianceSpec {
    CovarianceKind kind = CovarianceKind::identity;
    double off_diagonal = 0.5;

    /// Tridiagonal: 1 on the diagonal, off_diagonal on the first
    /// off-diagonals. Toeplitz: off_diagonal^|i-j|.
    Eigen::MatrixXd matrix(Index p) const;
};

struct SimConfig {
    Index n = 100;
    Index p = 10;
    double sparsity = 0.5;  // fraction of zero coefficients
    Tails tails = Tails::light;
    CovarianceSpec covariance;
    double beta_mean = 4.0;
    double beta_sd = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    Index zero_count() const;
    Index nonzero_count() const { return p - zero_count(); }
};

/// Sizes of the train/test partition and, optionally, of the three-way
/// sub-split of the training part (lambda / beta / alpha).
struct SplitSpec {
    Index n_train = 0;
    Index n_test = 0;
    Index n_train_lambda = 0;
    Index n_train_beta = 0;
    Index n_train_alpha = 0;
    std::uint64_t seed = 0;

    bool has_subsplit() const { return n_train_lambda + n_train_beta + n_train_alpha > 0; }
};

/// Zero-based row indices. Sub-split sets are empty unless requested.
struct SplitIndices {
    std::vector<Index> train;
    std::vector<Index> test;
    std::vector<Index> train_lambda;
    std::vector<Index> train_beta;
    std::vector<Index> train_alpha;
};

Dataset generate_dataset(const SimConfig& cfg);

/// Adds N(0, tau^2) noise to every response; design and ground truth are
/// copied unchanged.
Dataset perturb_response(const Dataset& ds, double tau, std::uint64_t seed);

SplitIndices split(Index n, const SplitSpec& spec);

/// Reads a comma-separated file with one header row. `response` names the
/// response column; every other column enters the design in header order.
Dataset load_csv(const std::filesystem::path& path, const std::string& response, bool standardize);

/// Parses CSV text; the path-based overload reads the file and forwards here.
Dataset parse_csv(const std::string& text, const std::string& response, bool standardize);

/// Centers every design column and scales it to unit sample SD; constant
/// columns are only centered.
void standardize_columns(Eigen::MatrixXd& x);

Dataset subsample(const Dataset& ds, Index m, std::uint64_t seed);

Dataset take_rows(const Dataset& ds, std::span<const Index> rows);

/// Writes columns y,x1..xp with round-trip precision.
void write_csv(const Dataset& ds, const std::filesystem::path& path);
void write_true_beta(const Dataset& ds, const std::filesystem::path& path);

}  // namespace shrinkforge
