#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssl_lab/estimators.hpp"
#include "ssl_lab/gmm.hpp"
#include "ssl_lab/theory.hpp"

namespace ssllab {

/// Ridge values {1e-4, ..., 10}, 7 points evenly spaced in log10.
std::vector<double> default_ridge_grid();

/// Quantile levels k/7, k = 0..6, of the stage-one unlabeled margins used as
/// self-training confidence thresholds.
std::vector<double> default_threshold_quantiles();

struct TrialConfig {
    MixtureModel model = MixtureModel::along_first_axis(1.0, 2);
    Eigen::Index n_l = 20;
    Eigen::Index n_u = 2000;
    Eigen::Index n_val = 1000;
    Eigen::Index n_test = 1000;
    std::vector<Method> methods{Method::SL, Method::ULplus, Method::SSLW};
    std::vector<double> t_grid = default_t_grid();
    std::vector<double> threshold_quantiles = default_threshold_quantiles();
    std::vector<double> ridge_grid = default_ridge_grid();
    std::uint64_t base_seed = 0;

    SolverParams eigen{};  // seed is replaced per trial
    double logistic_tol = 1e-6;
    std::size_t logistic_max_iter = 20000;
    double em_tol = 1e-8;
    std::size_t em_max_iter = 10000;
    /// Feed the switching rule the plug-in SNR estimate instead of the true s.
    bool ssls_plugin_snr = false;
    /// Use the EM estimate (started from the spectral one) as the UL component
    /// of UL, UL+, SSL-S and SSL-W.
    bool em_for_ul = false;

    void validate() const;
};

struct MethodOutcome {
    bool ok = false;
    std::string error;
    Vector theta;
    double excess = 0.0;
    double estimation = 0.0;
    double test_error = 0.0;

    bool operator==(const MethodOutcome& o) const {
        return ok == o.ok && error == o.error && theta.size() == o.theta.size() && theta == o.theta &&
               excess == o.excess && estimation == o.estimation && test_error == o.test_error;
    }
};

struct TrialResult {
    std::size_t trial_index = 0;
    std::uint64_t seed = 0;
    std::map<Method, MethodOutcome> outcomes;
    std::optional<bool> wrong_sign;          // UL+ picked the sign opposite to theta*
    std::optional<SslsBranch> branch;        // SSL-S
    std::optional<double> selected_t;        // SSL-W
    std::optional<double> logistic_ridge;    // Logistic
    std::optional<double> selftrain_ridge;   // SelfTrain
    std::optional<double> selftrain_threshold;

    bool operator==(const TrialResult&) const = default;
};

/// Per-trial seed: derive_seed(base_seed, trial_index).
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial_index);

/// The four data sets a trial works on.
struct TrialData {
    LabeledDataset labeled;
    UnlabeledDataset unlabeled;
    UnlabeledDataset validation;
    LabeledDataset test;
};

/// Fits every method in cfg.methods on `data`. With theta_star the closed-form
/// metrics are filled in and the UL row takes the sign closer to theta*;
/// without it (ingested data) they are NaN, UL takes the sign with the lower
/// test error and SSL-S runs on the plug-in SNR. `eigen_seed` seeds the
/// power iteration.
TrialResult evaluate_methods(const TrialConfig& cfg, const TrialData& data, const Vector* theta_star,
                             std::uint64_t eigen_seed);

/// Samples labeled, unlabeled, validation and test sets for one trial and fits
/// every requested method. Hyperparameters are chosen by average margin on the
/// unlabeled validation set. Closed-form metrics use the true theta*; the UL
/// row reports the closer of +-theta_UL. Estimator failures are recorded per
/// method and never abort the trial.
TrialResult run_trial(const TrialConfig& cfg, std::size_t trial_index);

enum class SweepAxis { SNR, NuOverNl, Nl, Nu };

std::string_view axis_name(SweepAxis axis) noexcept;
SweepAxis parse_axis(std::string_view name);

/// Config for one grid cell: SNR rescales theta*, NuOverNl sets
/// n_l = round(n_u / value), Nl and Nu set the counts directly.
TrialConfig cell_config(const TrialConfig& base, SweepAxis axis, double value);

struct MethodStats {
    Method method = Method::SL;
    std::size_t replicates = 0;  // successful fits
    double mean_excess = 0.0;
    double std_excess = 0.0;
    double mean_estimation = 0.0;
    double std_estimation = 0.0;
    double mean_test_error = 0.0;
    double std_test_error = 0.0;
    std::map<std::string, double> extra;

    bool operator==(const MethodStats&) const = default;
};

struct SweepCell {
    double axis_value = 0.0;
    std::vector<MethodStats> methods;

    bool operator==(const SweepCell&) const = default;
};

struct SweepResult {
    std::string axis;
    std::vector<SweepCell> cells;

    const MethodStats& stats(std::size_t cell, Method m) const;
    bool has_method(Method m) const;
    std::vector<double> grid() const;

    bool operator==(const SweepResult&) const = default;
};

/// Runs replicates x grid trials on `threads` workers (0 = hardware
/// concurrency). Trial (cell c, replicate r) has index c * replicates + r, so
/// the result is bit-identical for any worker count.
SweepResult run_sweep(const TrialConfig& cfg, SweepAxis axis, const std::vector<double>& grid,
                      std::size_t replicates, unsigned threads = 0);

/// Folds trial results into per-method statistics for one cell.
SweepCell aggregate_cell(double axis_value, const std::vector<Method>& methods,
                         const std::vector<TrialResult>& trials);

enum class Metric { Excess, Estimation, TestError };

double cell_mean(const MethodStats& stats, Metric metric);

/// Per cell: mean(error_a) - mean(error_b). Positive where b is better.
std::vector<double> error_gap(const SweepResult& sweep, Method a, Method b, Metric metric = Metric::Excess);

/// Per cell: min over `baseline` of the mean error, minus mean(error_b).
std::vector<double> error_gap(const SweepResult& sweep, const std::vector<Method>& baseline, Method b,
                              Metric metric = Metric::Excess);

struct SwitchPoint {
    std::size_t index = 0;
    double value = 0.0;
    bool crossed = false;
};

/// First grid cell at which the better of SL and UL+ (by mean error) differs
/// from the better one at the first cell; equal means count for SL. Without a
/// crossing the last cell is returned with crossed = false.
SwitchPoint switching_point_oracle(const SweepResult& sweep, Metric metric = Metric::Excess);

/// Errors of the switching estimator that uses the first-cell winner before
/// `point` and the other estimator from `point` on.
std::vector<double> switched_errors(const SweepResult& sweep, const SwitchPoint& point,
                                    Metric metric = Metric::Excess);

struct CompatibilityScore {
    double rho = 0.0;
    double inverse = 0.0;
    double err_bayes = 0.0;
    double err_ul = 0.0;
    bool separable_fallback = false;
};

/// rho = (m + err_bayes) / (2 sqrt(d)) with m = (err_ul - err_bayes) / err_bayes,
/// or rho = err_bayes when err_bayes <= 0.01.
CompatibilityScore compatibility_from_errors(double err_bayes, double err_ul, long long d);

/// Training errors of a ridge logistic fit (linear Bayes proxy) and of
/// spherical LDA with the better sign, plugged into compatibility_from_errors.
CompatibilityScore compatibility_score(const LabeledDataset& full, double ridge = 1e-4, double tol = 1e-6,
                                       std::size_t max_iter = 100000);

/// Least-squares slope of log(y) against log(x).
double scaling_fit(const std::vector<double>& x, const std::vector<double>& y);
double scaling_fit(const SweepResult& sweep, Method method, Metric metric = Metric::Excess);

struct OracleGapCell {
    double axis_value = 0.0;
    double mse_sl = 0.0;
    double mse_ul = 0.0;
    double t_star = 0.0;
    double combined_mse = 0.0;
    double gap = 0.0;
};

/// Oracle-weight gap from the per-cell MSEs of SL and sign-oracle UL.
std::vector<OracleGapCell> oracle_gap_series(const SweepResult& sweep);

struct PairSimulation {
    double mse_first = 0.0;
    double mse_second = 0.0;
    double mse_combined = 0.0;
    double t_star = 0.0;
};

/// Monte Carlo of the optimally weighted combination of two independent
/// unbiased Gaussian estimators of theta* with the given MSEs.
PairSimulation simulate_weighted_pair(const Vector& theta_star, double mse_first, double mse_second,
                                      std::size_t trials, std::uint64_t seed);

struct SweepPlan {
    std::string name;
    TrialConfig config;
    SweepAxis axis = SweepAxis::SNR;
    std::vector<double> grid;
    std::size_t replicates = 20;
};

/// Compiled-in presets "fig1a", "fig1b" and "fig3".
SweepPlan preset(std::string_view name);

}  // namespace ssllab
