#include "ssl_lab/gmm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ssl_lab/rng.hpp"

namespace ssllab {

namespace {

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) {
        throw std::invalid_argument(std::string(what) + " has non-finite entries");
    }
}

void require_same_length(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
    }
}

}  // namespace

MixtureModel::MixtureModel(Vector theta_star) : theta_star_(std::move(theta_star)) {
    if (theta_star_.size() < 1) {
        throw std::invalid_argument("mixture dimension must be at least 1");
    }
    require_finite(theta_star_, "theta_star");
    s_ = theta_star_.norm();
}

MixtureModel MixtureModel::along_first_axis(double snr, Eigen::Index d) {
    if (!(snr >= 0.0) || !std::isfinite(snr)) {
        throw std::invalid_argument("snr must be finite and nonnegative");
    }
    if (d < 1) {
        throw std::invalid_argument("mixture dimension must be at least 1");
    }
    Vector theta = Vector::Zero(d);
    theta(0) = snr;
    return MixtureModel(std::move(theta));
}

LabeledDataset::LabeledDataset(Matrix features, Vector labels)
    : x(std::move(features)), y(std::move(labels)) {
    if (x.rows() != y.size()) {
        throw std::invalid_argument("labeled dataset: " + std::to_string(x.rows()) + " rows but " +
                                    std::to_string(y.size()) + " labels");
    }
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) != 1.0 && y(i) != -1.0) {
            throw std::invalid_argument("labeled dataset: label at row " + std::to_string(i) +
                                        " is not +1 or -1");
        }
    }
    if (!x.allFinite()) {
        throw std::invalid_argument("labeled dataset has non-finite features");
    }
}

UnlabeledDataset::UnlabeledDataset(Matrix features) : x(std::move(features)) {
    if (!x.allFinite()) {
        throw std::invalid_argument("unlabeled dataset has non-finite features");
    }
}

std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::SL: return "SL";
        case Method::UL: return "UL";
        case Method::ULplus: return "ULplus";
        case Method::SSLS: return "SSLS";
        case Method::SSLW: return "SSLW";
        case Method::EM: return "EM";
        case Method::Logistic: return "Logistic";
        case Method::SelfTrain: return "SelfTrain";
        case Method::SphericalLDA: return "SphericalLDA";
        case Method::Zero: return "Zero";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    std::string key(name);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    key.erase(std::remove_if(key.begin(), key.end(), [](char c) { return c == '-' || c == '_'; }),
              key.end());
    if (key == "sl") return Method::SL;
    if (key == "ul") return Method::UL;
    if (key == "ulplus" || key == "ulp" || key == "ul+") return Method::ULplus;
    if (key == "ssls") return Method::SSLS;
    if (key == "sslw") return Method::SSLW;
    if (key == "em") return Method::EM;
    if (key == "logistic" || key == "logreg") return Method::Logistic;
    if (key == "selftrain" || key == "st") return Method::SelfTrain;
    if (key == "sphericallda" || key == "lda") return Method::SphericalLDA;
    if (key == "zero") return Method::Zero;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

LabeledDataset sample_labeled(const MixtureModel& model, Eigen::Index n, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("sample size must be nonnegative");
    const Eigen::Index d = model.d();
    const Vector& theta = model.theta_star();
    Rng rng(seed);
    Matrix x(n, d);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double label = rng.rademacher();
        y(i) = label;
        for (Eigen::Index j = 0; j < d; ++j) {
            x(i, j) = label * theta(j) + rng.normal();
        }
    }
    return LabeledDataset(std::move(x), std::move(y));
}

UnlabeledDataset sample_unlabeled(const MixtureModel& model, Eigen::Index n, std::uint64_t seed) {
    return UnlabeledDataset(sample_labeled(model, n, seed).x);
}

double std_normal_cdf(double x) {
    if (std::isnan(x)) throw std::invalid_argument("std_normal_cdf of NaN");
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double prediction_error(const Vector& theta_hat, const Vector& theta_star) {
    require_same_length(theta_hat, theta_star);
    require_finite(theta_hat, "theta_hat");
    require_finite(theta_star, "theta_star");
    const double norm = theta_hat.norm();
    if (norm == 0.0) return 0.5;
    return std_normal_cdf(-theta_hat.dot(theta_star) / norm);
}

double excess_risk(const Vector& theta_hat, const Vector& theta_star) {
    const double err = prediction_error(theta_hat, theta_star);
    return std::max(0.0, err - std_normal_cdf(-theta_star.norm()));
}

double estimation_error(const Vector& theta_hat, const Vector& theta_star) {
    require_same_length(theta_hat, theta_star);
    return (theta_hat - theta_star).norm();
}

double empirical_error(const Vector& theta, const LabeledDataset& data) {
    if (theta.size() != data.dim()) {
        throw std::invalid_argument("empirical_error: dimension mismatch");
    }
    if (data.size() == 0) throw std::invalid_argument("empirical_error: empty dataset");
    if (theta.isZero(0.0)) return 0.5;
    const Vector scores = data.x * theta;
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        const double predicted = scores(i) >= 0.0 ? 1.0 : -1.0;
        if (predicted != data.y(i)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

}  // namespace ssllab
