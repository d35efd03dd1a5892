#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace ssllab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric spherical two-component mixture: Y uniform on {-1,+1},
/// X | Y ~ N(Y theta*, I_d).
class MixtureModel {
public:
    explicit MixtureModel(Vector theta_star);

    /// theta* = snr * e_1 in R^d.
    static MixtureModel along_first_axis(double snr, Eigen::Index d);

    const Vector& theta_star() const noexcept { return theta_star_; }
    Eigen::Index d() const noexcept { return theta_star_.size(); }
    /// Signal-to-noise ratio ||theta*||.
    double s() const noexcept { return s_; }

private:
    Vector theta_star_;
    double s_;
};

/// n x d features with labels in {-1, +1}.
struct LabeledDataset {
    Matrix x;
    Vector y;

    LabeledDataset() = default;
    LabeledDataset(Matrix features, Vector labels);

    Eigen::Index size() const noexcept { return x.rows(); }
    Eigen::Index dim() const noexcept { return x.cols(); }
};

struct UnlabeledDataset {
    Matrix x;

    UnlabeledDataset() = default;
    explicit UnlabeledDataset(Matrix features);

    Eigen::Index size() const noexcept { return x.rows(); }
    Eigen::Index dim() const noexcept { return x.cols(); }
};

enum class Method { SL, UL, ULplus, SSLS, SSLW, EM, Logistic, SelfTrain, SphericalLDA, Zero };

std::string_view method_name(Method m) noexcept;
/// Accepts the canonical names and lowercase short forms ("sl", "ulp", "sslw", ...).
Method parse_method(std::string_view name);

struct EstimatorOutput {
    Vector theta;
    Method method;
};

LabeledDataset sample_labeled(const MixtureModel& model, Eigen::Index n, std::uint64_t seed);
UnlabeledDataset sample_unlabeled(const MixtureModel& model, Eigen::Index n, std::uint64_t seed);

/// Standard normal CDF.
double std_normal_cdf(double x);

/// Misclassification probability of x -> sign(<theta_hat, x>) under the model
/// with mean theta_star. The zero vector is a chance-level classifier (0.5).
double prediction_error(const Vector& theta_hat, const Vector& theta_star);

/// prediction_error minus the Bayes risk Phi(-||theta_star||); never negative.
double excess_risk(const Vector& theta_hat, const Vector& theta_star);

/// ||theta_hat - theta_star||_2.
double estimation_error(const Vector& theta_hat, const Vector& theta_star);

/// Fraction of rows misclassified by sign(<theta, x>), with sign(0) = +1.
/// A zero theta scores 0.5.
double empirical_error(const Vector& theta, const LabeledDataset& data);

}  // namespace ssllab
