#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"
#include "ssl_lab/gmm.hpp"
#include "ssl_lab/rng.hpp"

using namespace ssllab;

using testutil::vec;

TEST_CASE("mixture model caches s = ||theta*||") {
    const MixtureModel m(vec({3.0, 4.0}));
    CHECK(m.d() == 2);
    CHECK(m.s() == doctest::Approx(5.0).epsilon(1e-12));
    const auto a = MixtureModel::along_first_axis(1.5, 4);
    CHECK(a.theta_star()(0) == 1.5);
    CHECK(a.theta_star().tail(3).isZero(0.0));
    CHECK_THROWS(MixtureModel(Vector()));
}

TEST_CASE("dataset invariants are enforced") {
    Matrix x(2, 2);
    x << 1, 2, 3, 4;
    CHECK_THROWS_AS(LabeledDataset(x, vec({1.0, 0.0})), std::invalid_argument);
    CHECK_THROWS_AS(LabeledDataset(x, vec({1.0})), std::invalid_argument);
    Matrix nan_x = x;
    nan_x(0, 0) = std::nan("");
    CHECK_THROWS_AS(UnlabeledDataset{nan_x}, std::invalid_argument);
}

TEST_CASE("sample_labeled") {
    SUBCASE("s = 0 rows are pure noise with the right shape") {
        const auto data = sample_labeled(MixtureModel(vec({0.0, 0.0})), 3, 7);
        CHECK(data.size() == 3);
        CHECK(data.dim() == 2);
        for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(data.y(i)) == 1.0);
    }
    SUBCASE("label-weighted mean converges to theta*") {
        const auto data = sample_labeled(MixtureModel(vec({1.0, 0.0})), 1000000, 1);
        const Vector mean = (data.x.array().colwise() * data.y.array()).colwise().mean();
        CHECK(std::abs(mean(0) - 1.0) < 0.005);
        CHECK(std::abs(mean(1)) < 0.005);
        CHECK(std::abs(data.y.mean()) < 0.005);
    }
    SUBCASE("deterministic in the seed") {
        const auto model = MixtureModel::along_first_axis(1.0, 3);
        const auto a = sample_labeled(model, 5, 42);
        const auto b = sample_labeled(model, 5, 42);
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
        const auto c = sample_labeled(model, 5, 43);
        CHECK(a.x != c.x);
    }
    CHECK_THROWS(sample_labeled(MixtureModel::along_first_axis(1.0, 2), -1, 0));
}

TEST_CASE("sample_unlabeled") {
    SUBCASE("second moment approaches I + theta* theta*^T") {
        const auto data = sample_unlabeled(MixtureModel(vec({1.0, 0.0})), 1000000, 2);
        const Matrix m = data.x.transpose() * data.x / static_cast<double>(data.size());
        CHECK(std::abs(m(0, 0) - 2.0) < 0.01);
        CHECK(std::abs(m(1, 1) - 1.0) < 0.01);
        CHECK(std::abs(m(0, 1)) < 0.01);
    }
    SUBCASE("n = 0 gives an empty dataset") {
        const auto data = sample_unlabeled(MixtureModel(vec({3.0, 4.0})), 0, 0);
        CHECK(data.size() == 0);
        CHECK(data.dim() == 2);
    }
    SUBCASE("deterministic in the seed") {
        const auto model = MixtureModel(vec({0.5, -0.5}));
        CHECK(sample_unlabeled(model, 7, 9).x == sample_unlabeled(model, 7, 9).x);
    }
}

TEST_CASE("std_normal_cdf matches the integration oracle") {
    CHECK(std_normal_cdf(0.0) == 0.5);
    CHECK(std::abs(std_normal_cdf(1.0) - 0.841345) < 1e-6);
    CHECK(std::abs(std_normal_cdf(1.0) - oracle::normal_cdf(1.0)) < 1e-10);
    CHECK(std_normal_cdf(-8.0) < 1e-14);
    CHECK(std_normal_cdf(-8.0) <= oracle::normal_tail_bound(8.0));
    double prev = 0.0;
    for (double x = -6.0; x <= 6.0; x += 0.05) {
        const double p = std_normal_cdf(x);
        CHECK(std::abs(p - oracle::normal_cdf(x)) < 1e-10);
        CHECK(std::abs(std_normal_cdf(-x) - (1.0 - p)) < 1e-15);
        CHECK(p >= prev);
        prev = p;
    }
    CHECK_THROWS(std_normal_cdf(std::nan("")));
}

TEST_CASE("prediction_error") {
    const Vector ts = vec({1.0, 0.0});
    CHECK(std::abs(prediction_error(ts, ts) - oracle::normal_cdf(-1.0)) < 1e-10);
    CHECK(std::abs(prediction_error(ts, ts) - 0.158655) < 1e-6);
    CHECK(prediction_error(vec({0.0, 2.0}), ts) == 0.5);
    CHECK(prediction_error(vec({0.0, 0.0}), ts) == 0.5);
    for (double c : {1e-3, 0.5, 2.0, 1e4}) CHECK(prediction_error(c * ts, ts) == prediction_error(ts, ts));
    CHECK_THROWS(prediction_error(vec({std::nan(""), 0.0}), ts));
    CHECK_THROWS(prediction_error(vec({1.0}), ts));
}

TEST_CASE("excess_risk") {
    const Vector ts = vec({1.0, 0.0});
    CHECK(excess_risk(ts, ts) == 0.0);
    // Zero estimator: Phi(1) - Phi(0).
    CHECK(std::abs(excess_risk(vec({0.0, 0.0}), ts) - (oracle::normal_cdf(1.0) - 0.5)) < 1e-10);
    CHECK(std::abs(excess_risk(vec({0.0, 0.0}), ts) - 0.341345) < 1e-6);
    CHECK(std::abs(excess_risk(-ts, ts) - (oracle::normal_cdf(1.0) - oracle::normal_cdf(-1.0))) < 1e-10);
    CHECK(std::abs(excess_risk(-ts, ts) - 0.682689) < 1e-6);
    CHECK(excess_risk(vec({1.0, 1.0}), vec({0.0, 0.0})) == 0.0);
}

TEST_CASE("estimation_error") {
    CHECK(estimation_error(vec({1.0, 0.0}), vec({0.0, 1.0})) == doctest::Approx(std::sqrt(2.0)));
    CHECK(estimation_error(vec({0.3, 0.1}), vec({0.3, 0.1})) == 0.0);
    CHECK(estimation_error(vec({3.0, 4.0}), vec({0.0, 0.0})) == 5.0);
    CHECK_THROWS_AS(estimation_error(vec({1.0}), vec({1.0, 0.0})), std::invalid_argument);
}

TEST_CASE("empirical_error conventions") {
    Matrix x(4, 1);
    x << 1, -1, 0, 2;
    const LabeledDataset data(x, vec({1, -1, 1, -1}));
    CHECK(empirical_error(vec({1.0}), data) == 0.25);  // sign(0) = +1
    CHECK(empirical_error(vec({-1.0}), data) == 0.5);
    CHECK(empirical_error(vec({0.0}), data) == 0.5);
}

TEST_CASE("properties over random draws") {
    Rng rng(11);
    for (int k = 0; k < 200; ++k) {
        Vector th(4), ts(4);
        for (int j = 0; j < 4; ++j) {
            th(j) = rng.normal();
            ts(j) = rng.normal();
        }
        // Powers of two scale exactly, so the error is bitwise unchanged; other
        // factors round c * theta itself and agree to the last few bits.
        const double pow2 = std::ldexp(1.0, static_cast<int>(rng.below(40)) - 20);
        CHECK(prediction_error(pow2 * th, ts) == prediction_error(th, ts));
        const double c = 0.01 + 10.0 * rng.uniform();
        const double p = prediction_error(th, ts);
        CHECK(std::abs(prediction_error(c * th, ts) - p) <= 1e-15);
        CHECK(std::abs(prediction_error(-th, ts) - (1.0 - p)) < 1e-15);
        CHECK(excess_risk(th, ts) >= 0.0);
        CHECK(excess_risk(ts, ts) <= 1e-15);
    }
}

TEST_CASE("method names round-trip") {
    for (Method m : {Method::SL, Method::UL, Method::ULplus, Method::SSLS, Method::SSLW, Method::EM,
                     Method::Logistic, Method::SelfTrain, Method::SphericalLDA, Method::Zero}) {
        CHECK(parse_method(method_name(m)) == m);
    }
    CHECK(parse_method("ulp") == Method::ULplus);
    CHECK(parse_method("UL+") == Method::ULplus);
    CHECK_THROWS(parse_method("svm"));
}

TEST_CASE("rng streams are fixed by the seed") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    Rng r(3);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.below(7) < 7);
    }
}

TEST_CASE("closed-form error matches Monte Carlo misclassification") {
    Rng rng(21);
    for (int k = 0; k < 3; ++k) {
        Vector th(3), ts(3);
        for (int j = 0; j < 3; ++j) {
            th(j) = rng.normal();
            ts(j) = rng.normal();
        }
        const auto data = sample_labeled(MixtureModel(ts), 1000000, 100 + static_cast<std::uint64_t>(k));
        const double p = prediction_error(th, ts);
        const double se = std::sqrt(p * (1.0 - p) / 1e6);
        CHECK(std::abs(empirical_error(th, data) - p) <= 3.0 * se);
    }
}
