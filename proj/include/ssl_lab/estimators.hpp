#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssl_lab/gmm.hpp"

namespace ssllab {

/// Raised by iterative solvers that exhaust their iteration budget.
/// Carries the iterate reached so callers can inspect or reuse it.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, Vector last_iterate, std::size_t iterations)
        : std::runtime_error(what), last_iterate_(std::move(last_iterate)), iterations_(iterations) {}

    const Vector& last_iterate() const noexcept { return last_iterate_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    Vector last_iterate_;
    std::size_t iterations_;
};

struct SolverParams {
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Spectral machinery

/// Uncentered second moment (1/n) sum x_j x_j^T.
struct SecondMoment {
    Matrix m;
    Eigen::Index n = 0;
};

struct EigenPair {
    double lambda = 0.0;
    Vector v;
};

SecondMoment second_moment(const UnlabeledDataset& data);

/// Leading eigenpair of a symmetric positive semidefinite matrix by power
/// iteration from a seeded random unit vector.
///
/// Iterates v <- Mv / ||Mv|| and stops once ||Mv|| * ||v_next - v|| < tol,
/// which bounds the returned residual ||Mv - lambda v|| by tol (lambda is the
/// Rayleigh quotient of the returned v). The eigenvector sign is canonical:
/// its largest-magnitude entry (first one on ties) is positive.
///
/// Throws ConvergenceError after max_iter iterations.
EigenPair leading_eigenpair(const Matrix& m, const SolverParams& params);

// ---------------------------------------------------------------------------
// Supervised / unsupervised building blocks

/// Label-weighted sample mean (1/n) sum y_i x_i.
EstimatorOutput fit_sl(const LabeledDataset& data);

/// sqrt((lambda - 1)_+) v for the leading eigenpair of the second moment.
EstimatorOutput fit_ul(const UnlabeledDataset& data, const SolverParams& params);
EstimatorOutput fit_ul(const SecondMoment& moment, const SolverParams& params);

/// Plug-in SNR estimate sqrt((lambda - 1)_+) from unlabeled data.
double estimate_snr(const UnlabeledDataset& data, const SolverParams& params);

/// sign(theta_sl . theta_ul) theta_ul with sign(0) = +1.
EstimatorOutput fix_sign(const EstimatorOutput& theta_ul, const EstimatorOutput& theta_sl);

// ---------------------------------------------------------------------------
// Switching estimator

enum class SslsBranch { Zero, Supervised, UnsupervisedPlus };

std::string_view branch_name(SslsBranch b) noexcept;

/// Branch chosen by the switching rule from (s, d, n_l, n_u) alone.
SslsBranch ssls_branch(double s, Eigen::Index d, Eigen::Index n_l, Eigen::Index n_u);

struct SslsResult {
    EstimatorOutput estimate;
    SslsBranch branch;
};

/// Switches between 0, theta_SL and theta_UL+ on thresholds of s, d, n_l, n_u.
/// `s` is supplied by the caller (true SNR, or estimate_snr for plug-in use).
/// Only the estimators needed by the taken branch are fitted.
SslsResult fit_ssl_s(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled, double s,
                     const SolverParams& params);

// ---------------------------------------------------------------------------
// Weighted estimator

struct WeightSelection {
    double t = 0.0;
    double criterion_value = 0.0;
};

/// t theta_sl + (1 - t) theta_ulp, t in [0, 1].
EstimatorOutput weighted(const EstimatorOutput& theta_sl, const EstimatorOutput& theta_ulp, double t);

/// Mean absolute normalized margin |<theta, x>| / ||theta|| over the rows.
double avg_margin(const Vector& theta, const UnlabeledDataset& validation);

/// Default weight grid {0, 0.05, ..., 1}.
std::vector<double> default_t_grid();

/// Picks t in the grid maximizing avg_margin on the validation rows.
/// Ties go to the smallest t; candidates equal to the zero vector are skipped.
std::pair<EstimatorOutput, WeightSelection> select_weight(const EstimatorOutput& theta_sl,
                                                          const EstimatorOutput& theta_ulp,
                                                          const UnlabeledDataset& validation,
                                                          std::span<const double> t_grid);

std::pair<EstimatorOutput, WeightSelection> fit_ssl_w(const LabeledDataset& labeled,
                                                      const UnlabeledDataset& unlabeled,
                                                      const UnlabeledDataset& validation,
                                                      std::span<const double> t_grid,
                                                      const SolverParams& params);

/// MSE-optimal weight on the supervised estimator, mse_ul / (mse_sl + mse_ul),
/// for independent estimators one of which is unbiased. criterion_value holds
/// the resulting combined MSE.
WeightSelection oracle_weight(double mse_sl, double mse_ul);

// ---------------------------------------------------------------------------
// EM for the symmetric identity-covariance mixture

/// Average log-likelihood (1/n) sum log(0.5 phi(x - theta) + 0.5 phi(x + theta)).
double mixture_log_likelihood(const Vector& theta, const UnlabeledDataset& data);

/// One EM update theta <- (1/n) sum tanh(<theta, x_i>) x_i.
Vector em_step(const Vector& theta, const UnlabeledDataset& data);

/// Iterates em_step until ||theta_next - theta|| < tol.
EstimatorOutput fit_em(const UnlabeledDataset& data, const Vector& theta_init, double tol,
                       std::size_t max_iter);

// ---------------------------------------------------------------------------
// Ridge logistic regression (no intercept)

/// (1/n) sum log(1 + exp(-y_i <theta, x_i>)) + ridge ||theta||^2.
double logistic_objective(const Vector& theta, const LabeledDataset& data, double ridge);
Vector logistic_gradient(const Vector& theta, const LabeledDataset& data, double ridge);

/// Full-batch gradient descent with Armijo backtracking. Each trial step
/// starts from the Barzilai-Borwein length. Returns once the gradient norm is
/// at most tol; throws ConvergenceError otherwise.
EstimatorOutput fit_logistic(const LabeledDataset& data, double ridge, double tol,
                             std::size_t max_iter);

struct SelfTrainParams {
    double threshold = 0.0;
    double ridge = 1e-2;
    double tol = 1e-8;
    std::size_t max_iter = 20000;
};

/// Logistic fit on labeled rows, pseudolabels for unlabeled rows whose
/// normalized margin reaches the threshold, then a refit on the union.
EstimatorOutput self_train(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                           const SelfTrainParams& params);

/// Half the difference of class-conditional means.
EstimatorOutput fit_spherical_lda(const LabeledDataset& data);

}  // namespace ssllab
