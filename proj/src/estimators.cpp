#include "ssl_lab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ssllab {

namespace {

void require_same_dim(const Vector& a, const Vector& b, const char* where) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
}

}  // namespace

EstimatorOutput fit_sl(const LabeledDataset& data) {
    if (data.size() == 0) throw std::invalid_argument("fit_sl: empty labeled dataset");
    Vector theta = data.x.transpose() * data.y;
    theta /= static_cast<double>(data.size());
    return {std::move(theta), Method::SL};
}

SecondMoment second_moment(const UnlabeledDataset& data) {
    if (data.size() == 0) throw std::invalid_argument("second_moment: empty unlabeled dataset");
    const Eigen::Index d = data.dim();
    Matrix m = Matrix::Zero(d, d);
    m.selfadjointView<Eigen::Lower>().rankUpdate(data.x.transpose());
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
    m /= static_cast<double>(data.size());
    return {std::move(m), data.size()};
}

EstimatorOutput fit_ul(const SecondMoment& moment, const SolverParams& params) {
    const EigenPair pair = leading_eigenpair(moment.m, params);
    const double magnitude = std::sqrt(std::max(0.0, pair.lambda - 1.0));
    return {magnitude * pair.v, Method::UL};
}

EstimatorOutput fit_ul(const UnlabeledDataset& data, const SolverParams& params) {
    return fit_ul(second_moment(data), params);
}

double estimate_snr(const UnlabeledDataset& data, const SolverParams& params) {
    const EigenPair pair = leading_eigenpair(second_moment(data).m, params);
    return std::sqrt(std::max(0.0, pair.lambda - 1.0));
}

EstimatorOutput fix_sign(const EstimatorOutput& theta_ul, const EstimatorOutput& theta_sl) {
    require_same_dim(theta_ul.theta, theta_sl.theta, "fix_sign");
    const double sign = theta_sl.theta.dot(theta_ul.theta) < 0.0 ? -1.0 : 1.0;
    return {sign * theta_ul.theta, Method::ULplus};
}

std::string_view branch_name(SslsBranch b) noexcept {
    switch (b) {
        case SslsBranch::Zero: return "zero";
        case SslsBranch::Supervised: return "sl";
        case SslsBranch::UnsupervisedPlus: return "ulp";
    }
    return "?";
}

SslsBranch ssls_branch(double s, Eigen::Index d, Eigen::Index n_l, Eigen::Index n_u) {
    if (!(s >= 0.0)) throw std::invalid_argument("ssls_branch: s must be nonnegative");
    if (n_l < 1 || n_u < 0) throw std::invalid_argument("ssls_branch: need n_l >= 1 and n_u >= 0");
    // n_u = 0 follows the limit: both n_u thresholds become +inf.
    const double dd = static_cast<double>(d);
    const double nl = static_cast<double>(n_l);
    const double nu = static_cast<double>(n_u);
    const double low_snr = std::min(std::sqrt(dd / nl), std::pow(dd / nu, 0.25));
    if (s <= low_snr) return SslsBranch::Zero;
    if (s <= std::sqrt(nl / nu)) return SslsBranch::Supervised;
    return SslsBranch::UnsupervisedPlus;
}

SslsResult fit_ssl_s(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled, double s,
                     const SolverParams& params) {
    if (labeled.dim() != unlabeled.dim()) {
        throw std::invalid_argument("fit_ssl_s: labeled and unlabeled dimensions differ");
    }
    if (unlabeled.size() < 1) throw std::invalid_argument("fit_ssl_s: need at least one unlabeled row");
    const SslsBranch branch = ssls_branch(s, labeled.dim(), labeled.size(), unlabeled.size());
    switch (branch) {
        case SslsBranch::Zero:
            return {{Vector::Zero(labeled.dim()), Method::SSLS}, branch};
        case SslsBranch::Supervised:
            return {{fit_sl(labeled).theta, Method::SSLS}, branch};
        case SslsBranch::UnsupervisedPlus:
            break;
    }
    const EstimatorOutput ulp = fix_sign(fit_ul(unlabeled, params), fit_sl(labeled));
    return {{ulp.theta, Method::SSLS}, branch};
}

EstimatorOutput weighted(const EstimatorOutput& theta_sl, const EstimatorOutput& theta_ulp, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("weighted: t must lie in [0, 1], got " + std::to_string(t));
    }
    require_same_dim(theta_sl.theta, theta_ulp.theta, "weighted");
    return {t * theta_sl.theta + (1.0 - t) * theta_ulp.theta, Method::SSLW};
}

double avg_margin(const Vector& theta, const UnlabeledDataset& validation) {
    if (validation.size() == 0) throw std::invalid_argument("avg_margin: empty validation set");
    if (theta.size() != validation.dim()) throw std::invalid_argument("avg_margin: dimension mismatch");
    const double norm = theta.norm();
    if (norm == 0.0) throw std::invalid_argument("avg_margin: zero direction");
    return (validation.x * theta).cwiseAbs().mean() / norm;
}

std::vector<double> default_t_grid() {
    std::vector<double> grid(21);
    for (int i = 0; i <= 20; ++i) grid[static_cast<std::size_t>(i)] = i / 20.0;
    return grid;
}

std::pair<EstimatorOutput, WeightSelection> select_weight(const EstimatorOutput& theta_sl,
                                                          const EstimatorOutput& theta_ulp,
                                                          const UnlabeledDataset& validation,
                                                          std::span<const double> t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("select_weight: empty t grid");
    for (double t : t_grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("select_weight: t outside [0, 1]");
    }
    bool found = false;
    EstimatorOutput best{Vector(), Method::SSLW};
    WeightSelection selection;
    for (double t : t_grid) {
        EstimatorOutput candidate = weighted(theta_sl, theta_ulp, t);
        if (candidate.theta.isZero(0.0)) continue;
        const double margin = avg_margin(candidate.theta, validation);
        if (!found || margin > selection.criterion_value ||
            (margin == selection.criterion_value && t < selection.t)) {
            found = true;
            selection = {t, margin};
            best = std::move(candidate);
        }
    }
    if (!found) throw std::runtime_error("select_weight: every weighted candidate is the zero vector");
    return {std::move(best), selection};
}

std::pair<EstimatorOutput, WeightSelection> fit_ssl_w(const LabeledDataset& labeled,
                                                      const UnlabeledDataset& unlabeled,
                                                      const UnlabeledDataset& validation,
                                                      std::span<const double> t_grid,
                                                      const SolverParams& params) {
    const EstimatorOutput sl = fit_sl(labeled);
    const EstimatorOutput ulp = fix_sign(fit_ul(unlabeled, params), sl);
    return select_weight(sl, ulp, validation, t_grid);
}

WeightSelection oracle_weight(double mse_sl, double mse_ul) {
    if (!(mse_sl >= 0.0) || !(mse_ul >= 0.0)) {
        throw std::invalid_argument("oracle_weight: MSEs must be nonnegative");
    }
    if (mse_sl == 0.0 && mse_ul == 0.0) throw std::invalid_argument("oracle_weight: both MSEs are zero");
    const double t = mse_ul / (mse_sl + mse_ul);
    return {t, mse_sl * mse_ul / (mse_sl + mse_ul)};
}

double mixture_log_likelihood(const Vector& theta, const UnlabeledDataset& data) {
    if (data.size() == 0) throw std::invalid_argument("mixture_log_likelihood: empty dataset");
    const double d = static_cast<double>(data.dim());
    const double half_theta_sq = 0.5 * theta.squaredNorm();
    const Vector proj = data.x * theta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        const double half_x_sq = 0.5 * data.x.row(i).squaredNorm();
        // log(0.5 e^{a} + 0.5 e^{-a}) = log cosh(a), evaluated stably.
        const double a = std::abs(proj(i));
        const double log_cosh = a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
        total += -half_x_sq - half_theta_sq + log_cosh;
    }
    return total / static_cast<double>(data.size()) - 0.5 * d * std::log(2.0 * std::numbers::pi);
}

Vector em_step(const Vector& theta, const UnlabeledDataset& data) {
    if (data.size() == 0) throw std::invalid_argument("em_step: empty dataset");
    const Vector weights = (data.x * theta).array().tanh().matrix();
    return data.x.transpose() * weights / static_cast<double>(data.size());
}

EstimatorOutput fit_em(const UnlabeledDataset& data, const Vector& theta_init, double tol,
                       std::size_t max_iter) {
    if (!theta_init.allFinite()) throw std::invalid_argument("fit_em: non-finite initial point");
    if (theta_init.size() != data.dim()) throw std::invalid_argument("fit_em: dimension mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("fit_em: tol must be positive");
    Vector theta = theta_init;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        Vector next = em_step(theta, data);
        const double change = (next - theta).norm();
        theta = std::move(next);
        if (change < tol) return {std::move(theta), Method::EM};
    }
    throw ConvergenceError("fit_em: no convergence after " + std::to_string(max_iter) + " iterations",
                           theta, max_iter);
}

EstimatorOutput fit_spherical_lda(const LabeledDataset& data) {
    const Eigen::Index d = data.dim();
    Vector sum_pos = Vector::Zero(d);
    Vector sum_neg = Vector::Zero(d);
    Eigen::Index n_pos = 0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        if (data.y(i) > 0.0) {
            sum_pos += data.x.row(i).transpose();
            ++n_pos;
        } else {
            sum_neg += data.x.row(i).transpose();
        }
    }
    const Eigen::Index n_neg = data.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("fit_spherical_lda: both classes must be present");
    }
    Vector theta = 0.5 * (sum_pos / static_cast<double>(n_pos) - sum_neg / static_cast<double>(n_neg));
    return {std::move(theta), Method::SphericalLDA};
}

}  // namespace ssllab
