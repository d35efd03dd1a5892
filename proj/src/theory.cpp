#include "ssl_lab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

#include "ssl_lab/gmm.hpp"

namespace ssllab::theory {

namespace {

void check_problem(const ProblemSize& p) {
    if (!(p.s >= 0.0) || !std::isfinite(p.s)) throw std::invalid_argument("s must be finite and >= 0");
    if (p.d < 2) throw std::invalid_argument("d must be at least 2");
    if (p.n_l < 0 || p.n_u < 0) throw std::invalid_argument("sample counts must be nonnegative");
}

void check_constants(const BoundConstants& c) {
    if (!(c.c0 > 0 && c.C1 > 0 && c.C2 > 0 && c.C3 > 0 && c.C4 > 0 && c.C_l > 0)) {
        throw std::invalid_argument("bound constants must be positive");
    }
}

void check_ulplus_domain(const ProblemSize& p) {
    check_problem(p);
    if (!(p.s > 0.0)) throw std::invalid_argument("UL+ bounds need s > 0");
    const double needed = ulplus_min_unlabeled(p);
    if (static_cast<double>(p.n_u) < needed) {
        throw std::domain_error("UL+ bounds need n_u >= (160/s)^2 d = " + std::to_string(needed) +
                                ", got n_u = " + std::to_string(p.n_u));
    }
}

// exp(-s^2 n_l (1 - A)^2 / 2) with the (1 - A) factor clamped to [0, 1].
double sign_error_term(const ProblemSize& p, const BoundConstants& c) {
    const double s = p.s;
    const double d = static_cast<double>(p.d);
    const double nu = static_cast<double>(p.n_u);
    const double a = c.c0 / std::min(s, s * s) * std::sqrt(d * std::log(nu) / (s * s * nu));
    const double factor = std::clamp(1.0 - a, 0.0, 1.0);
    return std::exp(-0.5 * s * s * static_cast<double>(p.n_l) * factor * factor);
}

}  // namespace

std::string_view regime_name(Regime r) noexcept {
    switch (r) {
        case Regime::SLDominant: return "SL-dominant";
        case Regime::ULDominant: return "UL-dominant";
        case Regime::Balanced: return "Balanced";
        case Regime::LowSNR: return "LowSNR";
    }
    return "?";
}

double minimax_excess_rate(const ProblemSize& p) {
    check_problem(p);
    if (p.s == 0.0) return 0.0;
    if (p.n_l + p.n_u < 1) throw std::invalid_argument("need n_l + n_u >= 1");
    const double s = p.s;
    const double info = s * static_cast<double>(p.n_l) + s * s * s * static_cast<double>(p.n_u);
    return std::exp(-0.5 * s * s) * std::min(s, static_cast<double>(p.d) / info);
}

double minimax_estimation_rate(const ProblemSize& p, const BoundConstants& c) {
    check_problem(p);
    check_constants(c);
    if (p.s > 1.0) throw std::domain_error("estimation rate is stated for s in [0, 1]");
    if (p.n_l + p.n_u < 1) throw std::invalid_argument("need n_l + n_u >= 1");
    if (p.s == 0.0) return 0.0;
    const double info = c.C_l * static_cast<double>(p.n_l) + p.s * p.s * static_cast<double>(p.n_u);
    return std::min(p.s, std::sqrt(static_cast<double>(p.d) / info));
}

double ulplus_min_unlabeled(const ProblemSize& p) {
    const double ratio = 160.0 / p.s;
    return ratio * ratio * static_cast<double>(p.d);
}

double ulplus_excess_upper(const ProblemSize& p, const BoundConstants& c) {
    check_constants(c);
    check_ulplus_domain(p);
    if (p.s > 1.0) throw std::domain_error("UL+ excess bound is stated for s in (0, 1]");
    const double s = p.s;
    const double d = static_cast<double>(p.d);
    const double nu = static_cast<double>(p.n_u);
    const double estimation_part = c.C3 * std::exp(-0.5 * s * s) * d * std::log(d * nu) / (s * s * s * nu);
    return estimation_part + c.C4 * sign_error_term(p, c);
}

double ulplus_estimation_upper(const ProblemSize& p, const BoundConstants& c) {
    check_constants(c);
    check_ulplus_domain(p);
    const double s = p.s;
    const double d = static_cast<double>(p.d);
    const double nu = static_cast<double>(p.n_u);
    return c.C1 * std::sqrt(d / (s * s * nu)) + c.C2 * s * sign_error_term(p, c);
}

std::pair<double, double> rate_improvement(const ProblemSize& p) {
    check_problem(p);
    const double labeled = static_cast<double>(p.n_l);
    const double unlabeled = p.s * p.s * static_cast<double>(p.n_u);
    const double total = labeled + unlabeled;
    if (!(total > 0.0)) throw std::invalid_argument("rate_improvement: n_l + s^2 n_u must be positive");
    const double h_l = labeled / total;
    return {h_l, 1.0 - h_l};
}

Regime classify_regime(const ProblemSize& p, double ratio_threshold) {
    check_problem(p);
    if (!(ratio_threshold > 1.0)) throw std::invalid_argument("ratio_threshold must exceed 1");
    if (p.n_u > 0 && p.s <= 1.0 / std::sqrt(static_cast<double>(p.n_u))) return Regime::LowSNR;
    const double labeled = static_cast<double>(p.n_l);
    const double unlabeled = p.s * p.s * static_cast<double>(p.n_u);
    if (labeled > ratio_threshold * unlabeled) return Regime::SLDominant;
    if (unlabeled > ratio_threshold * labeled) return Regime::ULDominant;
    return Regime::Balanced;
}

double trivial_excess(double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("trivial_excess: s must be >= 0");
    return std_normal_cdf(s) - 0.5;
}

OracleGap oracle_gap(double mse_sl, double mse_ul) {
    if (!(mse_sl > 0.0) || !(mse_ul > 0.0)) throw std::invalid_argument("oracle_gap: MSEs must be positive");
    const double combined = mse_sl * mse_ul / (mse_sl + mse_ul);
    return {std::min(mse_sl, mse_ul) - combined, combined};
}

RateReport rate_report(const ProblemSize& p, const BoundConstants& c, double ratio_threshold) {
    check_problem(p);
    check_constants(c);
    RateReport report;
    report.problem = p;
    report.excess_rate = minimax_excess_rate(p);
    if (p.s <= 1.0) report.estimation_rate = minimax_estimation_rate(p, c);
    if (p.s > 0.0 && static_cast<double>(p.n_u) >= ulplus_min_unlabeled(p)) {
        report.ulp_estimation_upper = ulplus_estimation_upper(p, c);
        if (p.s <= 1.0) report.ulp_excess_upper = ulplus_excess_upper(p, c);
    }
    if (p.n_l > 0 || (p.s > 0.0 && p.n_u > 0)) {
        std::tie(report.h_l, report.h_u) = rate_improvement(p);
    }
    report.trivial_excess = trivial_excess(p.s);
    report.regime = classify_regime(p, ratio_threshold);
    return report;
}

}  // namespace ssllab::theory
