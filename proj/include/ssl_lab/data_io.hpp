#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ssl_lab/estimators.hpp"
#include "ssl_lab/experiments.hpp"
#include "ssl_lab/gmm.hpp"

namespace ssllab {

/// Feature table with +-1 labels read from a user CSV.
struct TabularDataset {
    Matrix x;
    Vector y;
    std::vector<std::string> columns;  // feature names, in column order
    std::string provenance;

    Eigen::Index size() const noexcept { return x.rows(); }
    Eigen::Index dim() const noexcept { return x.cols(); }
    LabeledDataset labeled() const { return {x, y}; }
};

/// Reads a comma-separated file with a header row. `label_column` names the
/// label; rows whose label equals `positive_label` map to +1, the other label
/// value to -1. Every other column must be a finite real.
TabularDataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                        const std::string& positive_label);

/// Writes features and a trailing label column holding +1 / -1 at full
/// round-trip precision; load with positive_label "1".
void save_csv(const TabularDataset& data, const std::filesystem::path& path,
              const std::string& label_column = "label");

/// Per-column affine map recorded by standardize.
struct ColumnScaling {
    Vector mean;
    Vector scale;                // population std, 1 for constant columns
    std::vector<bool> constant;  // zero-variance columns (centered only)

    Matrix apply(const Matrix& x) const;
    Matrix invert(const Matrix& z) const;
};

/// Centers every column and divides by its population standard deviation.
/// Needs at least 2 rows.
std::pair<TabularDataset, ColumnScaling> standardize(const TabularDataset& data);

/// Top principal directions of the centered sample covariance. Unlike the
/// estimators' uncentered second moment, PCA subtracts the column means.
struct PcaModel {
    Vector mean;
    Matrix components;  // d x k, orthonormal columns
    Vector variances;   // eigenvalues, nonincreasing

    Matrix project(const Matrix& x) const;
    Matrix reconstruct(const Matrix& scores) const;
};

/// Power iteration with deflation, followed by Gram-Schmidt.
PcaModel pca_fit(const Matrix& x, Eigen::Index k, const SolverParams& params);

/// n x k score matrix of the top-k components; columns renamed pc1..pck.
TabularDataset pca_project(const TabularDataset& data, Eigen::Index k, double tol, std::size_t max_iter,
                           std::uint64_t seed);

struct SplitSpec {
    Eigen::Index n_l = 20;
    Eigen::Index n_val = 1000;
    Eigen::Index n_test = 1000;
    std::uint64_t seed = 0;
};

/// Disjoint parts of a seeded permutation: the first n_l rows are labeled,
/// then validation, then test; the remainder is the unlabeled pool.
struct DataSplit {
    LabeledDataset labeled;
    UnlabeledDataset unlabeled;
    UnlabeledDataset validation;
    LabeledDataset test;
    std::vector<Eigen::Index> labeled_rows;
    std::vector<Eigen::Index> unlabeled_rows;
    std::vector<Eigen::Index> validation_rows;
    std::vector<Eigen::Index> test_rows;
};

DataSplit split(const TabularDataset& data, const SplitSpec& spec);

inline constexpr const char* kResultsSchema = "ssl_lab.sweep/1";

/// CSV with a `# schema=... axis=...` line, a fixed header and one row per
/// (cell, method). Floats use the shortest round-trip decimal form.
void write_results(const SweepResult& sweep, const std::filesystem::path& path);
SweepResult read_results(const std::filesystem::path& path);

std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace ssllab
