#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ssl_lab/estimators.hpp"

namespace ssllab {

namespace {

// log(1 + e^{-z})
double softplus_neg(double z) {
    return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

// 1 / (1 + e^{z})
double sigmoid_neg(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

void check_logistic_inputs(const Vector& theta, const LabeledDataset& data, double ridge) {
    if (data.size() == 0) throw std::invalid_argument("logistic: empty labeled dataset");
    if (theta.size() != data.dim()) throw std::invalid_argument("logistic: dimension mismatch");
    if (!(ridge >= 0.0)) throw std::invalid_argument("logistic: ridge must be nonnegative");
}

}  // namespace

double logistic_objective(const Vector& theta, const LabeledDataset& data, double ridge) {
    check_logistic_inputs(theta, data, ridge);
    const Vector margins = (data.x * theta).cwiseProduct(data.y);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i) loss += softplus_neg(margins(i));
    return loss / static_cast<double>(data.size()) + ridge * theta.squaredNorm();
}

Vector logistic_gradient(const Vector& theta, const LabeledDataset& data, double ridge) {
    check_logistic_inputs(theta, data, ridge);
    const Vector margins = (data.x * theta).cwiseProduct(data.y);
    Vector coeff(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
        coeff(i) = -data.y(i) * sigmoid_neg(margins(i));
    }
    Vector grad = data.x.transpose() * coeff / static_cast<double>(data.size());
    grad += 2.0 * ridge * theta;
    return grad;
}

EstimatorOutput fit_logistic(const LabeledDataset& data, double ridge, double tol,
                             std::size_t max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("fit_logistic: tol must be positive");
    constexpr double kArmijo = 1e-4;
    constexpr double kEps = std::numeric_limits<double>::epsilon();

    Vector theta = Vector::Zero(data.dim());
    double f = logistic_objective(theta, data, ridge);
    Vector grad = logistic_gradient(theta, data, ridge);
    double step = 1.0;
    Vector prev_theta;
    Vector prev_grad;

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        const double grad_sq = grad.squaredNorm();
        if (std::sqrt(grad_sq) <= tol) return {std::move(theta), Method::Logistic};

        if (iter > 0) {
            const Vector ds = theta - prev_theta;
            const Vector dg = grad - prev_grad;
            const double curvature = ds.dot(dg);
            if (curvature > 0.0) step = std::clamp(ds.squaredNorm() / curvature, 1e-10, 1e10);
        }

        Vector candidate;
        double f_candidate = f;
        bool accepted = false;
        for (int halvings = 0; halvings < 80; ++halvings) {
            candidate = theta - step * grad;
            f_candidate = logistic_objective(candidate, data, ridge);
            // Slack of a few ulps of f lets the search finish in flat regions
            // where the exact decrease is below rounding.
            if (f_candidate <= f - kArmijo * step * grad_sq + 8.0 * kEps * std::abs(f)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        prev_theta = std::move(theta);
        prev_grad = std::move(grad);
        theta = std::move(candidate);
        f = f_candidate;
        grad = logistic_gradient(theta, data, ridge);
    }
    if (grad.norm() <= tol) return {std::move(theta), Method::Logistic};
    throw ConvergenceError("fit_logistic: gradient norm " + std::to_string(grad.norm()) +
                               " above tolerance after " + std::to_string(max_iter) + " iterations",
                           theta, max_iter);
}

EstimatorOutput self_train(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                           const SelfTrainParams& params) {
    if (!(params.threshold >= 0.0)) throw std::invalid_argument("self_train: threshold must be >= 0");
    if (unlabeled.size() > 0 && unlabeled.dim() != labeled.dim()) {
        throw std::invalid_argument("self_train: labeled and unlabeled dimensions differ");
    }
    const EstimatorOutput stage_one = fit_logistic(labeled, params.ridge, params.tol, params.max_iter);
    const double norm = stage_one.theta.norm();
    if (norm == 0.0 || unlabeled.size() == 0) return {stage_one.theta, Method::SelfTrain};

    const Vector scores = unlabeled.x * stage_one.theta;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (std::abs(scores(i)) / norm >= params.threshold) keep.push_back(i);
    }
    if (keep.empty()) return {stage_one.theta, Method::SelfTrain};

    const auto n_pseudo = static_cast<Eigen::Index>(keep.size());
    Matrix x(labeled.size() + n_pseudo, labeled.dim());
    Vector y(labeled.size() + n_pseudo);
    x.topRows(labeled.size()) = labeled.x;
    y.head(labeled.size()) = labeled.y;
    for (Eigen::Index k = 0; k < n_pseudo; ++k) {
        const Eigen::Index row = keep[static_cast<std::size_t>(k)];
        x.row(labeled.size() + k) = unlabeled.x.row(row);
        y(labeled.size() + k) = scores(row) >= 0.0 ? 1.0 : -1.0;
    }
    const EstimatorOutput refit =
        fit_logistic(LabeledDataset(std::move(x), std::move(y)), params.ridge, params.tol, params.max_iter);
    return {refit.theta, Method::SelfTrain};
}

}  // namespace ssllab
