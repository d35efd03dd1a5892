#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "test_util.hpp"
#include "ssl_lab/estimators.hpp"
#include "ssl_lab/rng.hpp"

using namespace ssllab;
using testutil::rows;
using testutil::vec;

namespace {

Vector random_unit(Rng& rng, Eigen::Index d) {
    Vector v(d);
    for (Eigen::Index j = 0; j < d; ++j) v(j) = rng.normal();
    return v / v.norm();
}

Matrix random_psd(Rng& rng, Eigen::Index d) {
    Matrix a(d + 2, d);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
    return a.transpose() * a / static_cast<double>(a.rows());
}

bool bitwise_equal(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(a(i)) != std::bit_cast<std::uint64_t>(b(i))) return false;
    }
    return true;
}

// Unlabeled rows whose uncentered second moment is diag(a, b).
UnlabeledDataset with_moment(double a, double b) {
    const double ra = std::sqrt(2.0 * a), rb = std::sqrt(2.0 * b);
    return UnlabeledDataset(rows({{ra, 0}, {-ra, 0}, {0, rb}, {0, -rb}}));
}

}  // namespace

TEST_CASE("fit_sl") {
    const LabeledDataset two(rows({{2, 0}, {-4, 0}}), vec({1, -1}));
    CHECK(fit_sl(two).theta == vec({3, 0}));
    CHECK(fit_sl(two).method == Method::SL);
    const LabeledDataset one(rows({{0.7, -1.3}}), vec({1}));
    CHECK(fit_sl(one).theta == vec({0.7, -1.3}));
    CHECK_THROWS_AS(fit_sl(LabeledDataset()), std::invalid_argument);

    const auto big = sample_labeled(MixtureModel(vec({1, 0, 0})), 100000, 3);
    CHECK(estimation_error(fit_sl(big).theta, vec({1, 0, 0})) <= 2.0 * std::sqrt(3.0 / 1e5));
}

TEST_CASE("second_moment") {
    const auto m1 = second_moment(UnlabeledDataset(rows({{1, 0}, {-1, 0}})));
    CHECK(m1.m == rows({{1, 0}, {0, 0}}));
    CHECK(m1.n == 2);
    CHECK(second_moment(UnlabeledDataset(rows({{1, 1}}))).m == rows({{1, 1}, {1, 1}}));
    CHECK_THROWS_AS(second_moment(UnlabeledDataset()), std::invalid_argument);

    const auto big = second_moment(sample_unlabeled(MixtureModel(vec({1, 0})), 1000000, 4));
    CHECK((big.m - rows({{2, 0}, {0, 1}})).cwiseAbs().maxCoeff() < 0.01);
    CHECK((big.m - big.m.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Rng rng(8);
    for (int k = 0; k < 100; ++k) {
        const Vector v = random_unit(rng, 2);
        CHECK(v.dot(big.m * v) >= -1e-9);
    }
}

TEST_CASE("leading_eigenpair examples") {
    const SolverParams p{1e-12, 100000, 1};
    const auto diag = leading_eigenpair(rows({{2, 0}, {0, 1}}), p);
    CHECK(std::abs(diag.lambda - 2.0) < 1e-10);
    CHECK((diag.v - vec({1, 0})).norm() < 1e-6);

    const auto full = leading_eigenpair(rows({{2, 1}, {1, 2}}), p);
    CHECK(std::abs(full.lambda - 3.0) < 1e-10);
    CHECK((full.v - vec({1 / std::sqrt(2.0), 1 / std::sqrt(2.0)})).norm() < 1e-6);

    for (Eigen::Index d : {1, 3, 6}) {
        const Matrix id = Matrix::Identity(d, d);
        const auto e = leading_eigenpair(id, p);
        CHECK(std::abs(e.lambda - 1.0) < 1e-12);
        CHECK(std::abs(e.v.norm() - 1.0) < 1e-10);
        CHECK((id * e.v - e.lambda * e.v).norm() <= p.tol);
    }
}

TEST_CASE("leading_eigenpair errors") {
    CHECK_THROWS_AS(leading_eigenpair(rows({{1, 0}, {0, 1}}), SolverParams{0.0, 10, 0}), std::invalid_argument);
    CHECK_THROWS_AS(leading_eigenpair(rows({{1, 0}, {0, 1}}), SolverParams{1e-10, 0, 0}), std::invalid_argument);
    // Nearly equal top eigenvalues: one iteration cannot converge.
    try {
        leading_eigenpair(rows({{1.0, 0}, {0, 0.999999}}), SolverParams{1e-14, 1, 5});
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations() == 1);
        CHECK(e.last_iterate().size() == 2);
        CHECK(std::abs(e.last_iterate().norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("leading_eigenpair residual, probes and Jacobi agreement") {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Index d = 2 + trial % 3;
        const Matrix m = random_psd(rng, d);
        const SolverParams p{1e-11, 1000000, static_cast<std::uint64_t>(trial)};
        const auto e = leading_eigenpair(m, p);
        CHECK(std::abs(e.v.norm() - 1.0) <= 1e-10);
        CHECK((m * e.v - e.lambda * e.v).norm() <= p.tol);
        for (int k = 0; k < 100; ++k) {
            const Vector v = random_unit(rng, d);
            CHECK(e.lambda >= v.dot(m * v) - 1e-9);
        }
        const auto ref = oracle::jacobi(m);
        if (ref.values[0] - ref.values[1] < 1e-2) continue;  // sign test needs a gap
        CHECK(std::abs(e.lambda - ref.values[0]) < 1e-8);
        CHECK(std::abs(std::abs(e.v.dot(ref.vectors[0])) - 1.0) < 1e-8);
        Eigen::Index big = 0;
        e.v.cwiseAbs().maxCoeff(&big);
        CHECK(e.v(big) > 0.0);
    }
}

TEST_CASE("fit_ul") {
    const SolverParams p{1e-12, 100000, 2};
    const auto half = fit_ul(with_moment(1.25, 1.0), p);
    CHECK(half.method == Method::UL);
    CHECK((half.theta - vec({0.5, 0})).norm() < 1e-6);
    CHECK(fit_ul(with_moment(0.9, 0.8), p).theta.isZero(0.0));
    CHECK_THROWS(fit_ul(UnlabeledDataset(), p));

    const Vector ts = vec({1, 0, 0, 0, 0});
    const auto data = sample_unlabeled(MixtureModel(ts), 100000, 5);
    const Vector th = fit_ul(data, SolverParams{1e-10, 100000, 6}).theta;
    const double bound = 3.0 * std::sqrt(5.0 / 1e5);
    CHECK(std::min((th - ts).norm(), (th + ts).norm()) <= bound);
    CHECK(std::abs(estimate_snr(data, SolverParams{1e-10, 100000, 6}) - th.norm()) < 1e-12);
}

TEST_CASE("fix_sign") {
    const auto sl = [](Vector v) { return EstimatorOutput{std::move(v), Method::SL}; };
    const auto ul = [](Vector v) { return EstimatorOutput{std::move(v), Method::UL}; };
    CHECK(fix_sign(ul(vec({-1, 0})), sl(vec({1, 0}))).theta == vec({1, 0}));
    CHECK(fix_sign(ul(vec({1, 0})), sl(vec({1, 0}))).theta == vec({1, 0}));
    CHECK(fix_sign(ul(vec({1, 0})), sl(vec({0, 1}))).theta == vec({1, 0}));
    CHECK(fix_sign(ul(vec({1, 0})), sl(vec({0, 1}))).method == Method::ULplus);
    CHECK_THROWS_AS(fix_sign(ul(vec({1, 0})), sl(vec({1}))), std::invalid_argument);

    Rng rng(9);
    for (int k = 0; k < 200; ++k) {
        const auto u = ul(random_unit(rng, 3) * (0.1 + rng.uniform()));
        const auto s = sl(random_unit(rng, 3));
        const auto once = fix_sign(u, s);
        const auto twice = fix_sign(once, s);
        CHECK(twice.theta == once.theta);
        CHECK(once.theta.norm() == u.theta.norm());
        CHECK(once.theta.dot(s.theta) >= 0.0);
    }
}

TEST_CASE("ssls_branch thresholds") {
    CHECK(ssls_branch(0.05, 4, 100, 10000) == SslsBranch::Zero);
    CHECK(ssls_branch(0.12, 4, 100, 10000) == SslsBranch::Zero);
    CHECK(ssls_branch(0.15, 4, 100, 10000) == SslsBranch::UnsupervisedPlus);
    CHECK(ssls_branch(0.5, 4, 10000, 100) == SslsBranch::Supervised);
    // n_u = 0: both unlabeled thresholds are +inf, so the rule reduces to 0 vs SL.
    CHECK(ssls_branch(0.19, 4, 100, 0) == SslsBranch::Zero);
    CHECK(ssls_branch(0.21, 4, 100, 0) == SslsBranch::Supervised);
    CHECK(ssls_branch(0.5, 4, 100, 0) == SslsBranch::Supervised);
    CHECK_THROWS(ssls_branch(-1.0, 4, 100, 100));
    CHECK_THROWS(ssls_branch(1.0, 4, 0, 100));
}

TEST_CASE("fit_ssl_s returns one of the three candidates bitwise") {
    Rng rng(23);
    for (int k = 0; k < 60; ++k) {
        const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.below(3));
        const Eigen::Index n_l = 1 + static_cast<Eigen::Index>(rng.below(200));
        const Eigen::Index n_u = 1 + static_cast<Eigen::Index>(rng.below(400));
        const double s = 2.0 * rng.uniform();
        const auto model = MixtureModel::along_first_axis(s, d);
        const auto lab = sample_labeled(model, n_l, rng.next_u64());
        const auto unl = sample_unlabeled(model, n_u, rng.next_u64());
        const SolverParams p{1e-10, 1000000, 3};
        const auto out = fit_ssl_s(lab, unl, s, p);
        const Vector sl = fit_sl(lab).theta;
        const Vector ulp = fix_sign(fit_ul(unl, p), fit_sl(lab)).theta;
        CHECK(out.estimate.method == Method::SSLS);
        CHECK(out.branch == ssls_branch(s, d, n_l, n_u));
        switch (out.branch) {
            case SslsBranch::Zero: CHECK(bitwise_equal(out.estimate.theta, Vector::Zero(d))); break;
            case SslsBranch::Supervised: CHECK(bitwise_equal(out.estimate.theta, sl)); break;
            case SslsBranch::UnsupervisedPlus: CHECK(bitwise_equal(out.estimate.theta, ulp)); break;
        }
    }
}

TEST_CASE("weighted") {
    const EstimatorOutput sl{vec({1, 0}), Method::SL};
    const EstimatorOutput ulp{vec({0, 1}), Method::ULplus};
    CHECK(weighted(sl, ulp, 1.0).theta == sl.theta);
    CHECK(weighted(sl, ulp, 0.0).theta == ulp.theta);
    CHECK(weighted(sl, ulp, 0.5).theta == vec({0.5, 0.5}));
    CHECK(weighted(sl, ulp, 0.5).method == Method::SSLW);
    CHECK_THROWS_AS(weighted(sl, ulp, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(weighted(sl, ulp, -0.1), std::invalid_argument);

    Rng rng(31);
    for (int k = 0; k < 100; ++k) {
        const EstimatorOutput a{random_unit(rng, 4) * 3.0, Method::SL};
        const EstimatorOutput b{random_unit(rng, 4), Method::ULplus};
        const double ta = rng.uniform(), tb = rng.uniform();
        const Vector mid = weighted(a, b, 0.5 * (ta + tb)).theta;
        const Vector avg = 0.5 * (weighted(a, b, ta).theta + weighted(a, b, tb).theta);
        CHECK((mid - avg).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("avg_margin") {
    const UnlabeledDataset v(rows({{2, 0}, {-4, 0}}));
    CHECK(avg_margin(vec({1, 0}), v) == 3.0);
    CHECK(avg_margin(vec({2, 0}), v) == 3.0);
    CHECK(avg_margin(vec({0, 1}), v) == 0.0);
    CHECK_THROWS_AS(avg_margin(vec({0, 0}), v), std::invalid_argument);

    Rng rng(12);
    const auto val = sample_unlabeled(MixtureModel(vec({1, 1, 0})), 200, 4);
    for (int k = 0; k < 50; ++k) {
        const Vector th = random_unit(rng, 3);
        const double c = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.01 + 100.0 * rng.uniform());
        CHECK(std::abs(avg_margin(c * th, val) - avg_margin(th, val)) <= 1e-12 * avg_margin(th, val));
    }
}

TEST_CASE("select_weight and fit_ssl_w") {
    SUBCASE("margin dominance selects the supervised end") {
        const EstimatorOutput sl{vec({1, 0}), Method::SL};
        const EstimatorOutput ulp{vec({0, 1}), Method::ULplus};
        const UnlabeledDataset val(rows({{5, 0.1}, {-6, 0}, {7, -0.1}}));
        const std::vector<double> grid{0.0, 1.0};
        CHECK(select_weight(sl, ulp, val, grid).second.t == 1.0);
    }
    SUBCASE("singleton grid") {
        const auto model = MixtureModel::along_first_axis(1.0, 2);
        const auto lab = sample_labeled(model, 20, 1);
        const auto unl = sample_unlabeled(model, 200, 2);
        const auto val = sample_unlabeled(model, 100, 3);
        const std::vector<double> grid{0.3};
        const auto [out, sel] = fit_ssl_w(lab, unl, val, grid, SolverParams{1e-10, 100000, 4});
        CHECK(sel.t == 0.3);
        CHECK(std::isfinite(sel.criterion_value));
        CHECK(out.method == Method::SSLW);
    }
    SUBCASE("ties go to the smallest t") {
        const EstimatorOutput a{vec({1, 0}), Method::SL};
        const UnlabeledDataset val(rows({{1, 2}, {-3, 1}}));
        const std::vector<double> grid{0.8, 0.2, 0.5};
        CHECK(select_weight(a, EstimatorOutput{vec({2, 0}), Method::ULplus}, val, grid).second.t == 0.2);
    }
    SUBCASE("zero candidates are skipped") {
        const EstimatorOutput sl{vec({1, 0}), Method::SL};
        const EstimatorOutput zero{vec({0, 0}), Method::ULplus};
        const UnlabeledDataset val(rows({{1, 0}}));
        const std::vector<double> grid{0.0, 0.4};
        CHECK(select_weight(sl, zero, val, grid).second.t == 0.4);
        const std::vector<double> only_zero{0.0};
        CHECK_THROWS(select_weight(sl, zero, val, only_zero));
    }
    SUBCASE("argmax is invariant to a common rescaling") {
        const auto model = MixtureModel::along_first_axis(1.0, 3);
        const auto val = sample_unlabeled(model, 300, 9);
        Rng rng(44);
        const auto grid = default_t_grid();
        for (int k = 0; k < 20; ++k) {
            const EstimatorOutput sl{random_unit(rng, 3), Method::SL};
            const EstimatorOutput ulp{random_unit(rng, 3) * 2.0, Method::ULplus};
            const double c = 0.1 + 10.0 * rng.uniform();
            const EstimatorOutput sl_c{c * sl.theta, Method::SL};
            const EstimatorOutput ulp_c{c * ulp.theta, Method::ULplus};
            CHECK(select_weight(sl, ulp, val, grid).second.t == select_weight(sl_c, ulp_c, val, grid).second.t);
        }
    }
    CHECK(default_t_grid().size() == 21);
    CHECK(default_t_grid().front() == 0.0);
    CHECK(default_t_grid().back() == 1.0);
}

TEST_CASE("oracle_weight") {
    CHECK(oracle_weight(1, 1).t == 0.5);
    CHECK(oracle_weight(3, 0).t == 0.0);
    CHECK(oracle_weight(2, 6).t == 0.75);
    CHECK(oracle_weight(2, 6).criterion_value == doctest::Approx(1.5));
    CHECK_THROWS_AS(oracle_weight(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(oracle_weight(-1, 1), std::invalid_argument);
}

TEST_CASE("EM") {
    const UnlabeledDataset sym(rows({{1, 0}, {-1, 0}}));
    const Vector one = em_step(vec({1, 0}), sym);
    CHECK(std::abs(one(0) - std::tanh(1.0)) < 1e-15);
    CHECK(std::abs(one(0) - 0.76159) < 1e-5);
    CHECK(one(1) == 0.0);
    // The scalar map t -> tanh(t) approaches 0 like 1/sqrt(k), so use a loose tol.
    const auto fit = fit_em(sym, vec({1, 0}), 1e-8, 1000000);
    CHECK(fit.theta.norm() < 1e-2);
    CHECK(fit.method == Method::EM);
    CHECK(fit_em(sym, vec({0, 0}), 1e-10, 10).theta.isZero(0.0));
    CHECK_THROWS_AS(fit_em(sym, vec({1, 0}), 1e-14, 2), ConvergenceError);

    SUBCASE("log-likelihood is nondecreasing along the iterates") {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto data = sample_unlabeled(MixtureModel(vec({0.8, -0.6, 0.3})), 500, seed);
            Rng rng(seed);
            Vector th = random_unit(rng, 3) * 0.5;
            double prev = mixture_log_likelihood(th, data);
            for (int it = 0; it < 200; ++it) {
                th = em_step(th, data);
                const double cur = mixture_log_likelihood(th, data);
                CHECK(cur >= prev - 1e-10);
                prev = cur;
            }
        }
    }
    SUBCASE("log-likelihood matches the direct formula") {
        const auto data = sample_unlabeled(MixtureModel(vec({1, 0})), 50, 8);
        const Vector th = vec({0.3, -0.2});
        double ref = 0.0;
        for (Eigen::Index i = 0; i < data.size(); ++i) {
            const Vector x = data.x.row(i).transpose();
            const double pp = std::exp(-0.5 * (x - th).squaredNorm()) / (2.0 * std::numbers::pi);
            const double pm = std::exp(-0.5 * (x + th).squaredNorm()) / (2.0 * std::numbers::pi);
            ref += std::log(0.5 * pp + 0.5 * pm);
        }
        CHECK(std::abs(mixture_log_likelihood(th, data) - ref / 50.0) < 1e-12);
    }
}

TEST_CASE("logistic objective and gradient") {
    Rng rng(77);
    const auto data = sample_labeled(MixtureModel(vec({0.7, -0.2, 0.4})), 40, 5);
    for (int k = 0; k < 20; ++k) {
        Vector th(3);
        for (int j = 0; j < 3; ++j) th(j) = 2.0 * rng.normal();
        const double ridge = 0.05 * rng.uniform();
        CHECK(std::abs(logistic_objective(th, data, ridge) - oracle::logistic_objective(th, data.x, data.y, ridge)) <
              1e-12);
        const Vector g = logistic_gradient(th, data, ridge);
        Vector fd(3);
        for (int j = 0; j < 3; ++j) {
            Vector a = th, b = th;
            a(j) += 1e-5;
            b(j) -= 1e-5;
            fd(j) = (logistic_objective(a, data, ridge) - logistic_objective(b, data, ridge)) / 2e-5;
        }
        CHECK((g - fd).norm() <= 1e-4 * std::max(g.norm(), 1e-8));
    }
}

TEST_CASE("fit_logistic") {
    const auto data = sample_labeled(MixtureModel(vec({1, 0})), 30, 2);
    const auto heavy = fit_logistic(data, 1e6, 1e-12, 10000);
    CHECK(heavy.theta.norm() <= 1e-3);
    CHECK(heavy.method == Method::Logistic);

    const LabeledDataset sym(rows({{1, 0}, {-1, 0}}), vec({1, -1}));
    const auto s = fit_logistic(sym, 0.1, 1e-10, 10000);
    CHECK(s.theta(0) > 0.0);
    CHECK(std::abs(s.theta(1)) <= 1e-8);

    const auto small = sample_labeled(MixtureModel(vec({0.5, 0.5, -0.5})), 50, 12);
    const auto fit = fit_logistic(small, 0.1, 1e-10, 100000);
    CHECK(logistic_gradient(fit.theta, small, 0.1).norm() <= 1e-10);
    const Vector ref = oracle::logistic_projected_gradient(small.x, small.y, 0.1);
    const double f_fit = logistic_objective(fit.theta, small, 0.1);
    const double f_ref = oracle::logistic_objective(ref, small.x, small.y, 0.1);
    CHECK(std::abs(f_fit - f_ref) <= 1e-6);

    // Separable data without a penalty: the budget runs out and the iterate is reported.
    CHECK_THROWS_AS(fit_logistic(sym, 0.0, 1e-12, 50), ConvergenceError);
    CHECK_THROWS_AS(fit_logistic(sym, -1.0, 1e-8, 50), std::invalid_argument);
}

TEST_CASE("self_train") {
    const auto model = MixtureModel::along_first_axis(1.0, 2);
    const auto lab = sample_labeled(model, 20, 3);
    const auto unl = sample_unlabeled(model, 200, 4);
    const SelfTrainParams never{std::numeric_limits<double>::infinity(), 1e-2, 1e-10, 100000};
    const Vector plain = fit_logistic(lab, 1e-2, 1e-10, 100000).theta;
    CHECK(self_train(lab, unl, never).theta == plain);
    CHECK(self_train(lab, UnlabeledDataset(Matrix(0, 2)), SelfTrainParams{0.0, 1e-2, 1e-10, 100000}).theta == plain);
    CHECK(self_train(lab, unl, never).method == Method::SelfTrain);
    CHECK_THROWS_AS(self_train(lab, unl, SelfTrainParams{-1.0, 1e-2, 1e-10, 100}), std::invalid_argument);

    SUBCASE("beats the labeled-only fit on average at s = 1, n_l = 20, n_u = 2000") {
        double err_st = 0.0, err_lr = 0.0;
        for (std::uint64_t r = 0; r < 20; ++r) {
            const auto l = sample_labeled(model, 20, derive_seed(500, r));
            const auto u = sample_unlabeled(model, 2000, derive_seed(600, r));
            const SelfTrainParams p{0.0, 1e-2, 1e-8, 100000};
            err_st += prediction_error(self_train(l, u, p).theta, model.theta_star());
            err_lr += prediction_error(fit_logistic(l, 1e-2, 1e-8, 100000).theta, model.theta_star());
        }
        CHECK(err_st <= err_lr);
    }
}

TEST_CASE("fit_spherical_lda") {
    const LabeledDataset two(rows({{2, 0}, {-4, 0}}), vec({1, -1}));
    CHECK(fit_spherical_lda(two).theta == vec({3, 0}));
    CHECK(fit_spherical_lda(two).method == Method::SphericalLDA);

    const LabeledDataset balanced(rows({{1, 2}, {3, -1}, {-2, 0}, {0, 1}}), vec({1, 1, -1, -1}));
    CHECK((fit_spherical_lda(balanced).theta - fit_sl(balanced).theta).norm() < 1e-15);

    // Three positives (1,0),(2,0),(3,0) and one negative (-1,0):
    // LDA = ((2,0) - (-1,0)) / 2 = (1.5, 0); SL = (1 + 2 + 3 + 1) / 4 = (1.75, 0).
    const LabeledDataset skew(rows({{1, 0}, {2, 0}, {3, 0}, {-1, 0}}), vec({1, 1, 1, -1}));
    CHECK(fit_spherical_lda(skew).theta == vec({1.5, 0}));
    CHECK(fit_sl(skew).theta == vec({1.75, 0}));

    const LabeledDataset single(rows({{1, 0}, {2, 0}}), vec({1, 1}));
    CHECK_THROWS_AS(fit_spherical_lda(single), std::invalid_argument);
}
