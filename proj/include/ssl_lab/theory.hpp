#pragma once

#include <optional>
#include <string_view>
#include <utility>

namespace ssllab::theory {

struct ProblemSize {
    double s = 0.0;
    long long d = 2;
    long long n_l = 0;
    long long n_u = 0;
};

/// Unspecified universal constants of the rate statements. Every rate is
/// reported with these set to 1 unless overridden.
struct BoundConstants {
    double c0 = 1.0;
    double C1 = 1.0;
    double C2 = 1.0;
    double C3 = 1.0;
    double C4 = 1.0;
    double C_l = 1.0;
};

enum class Regime { SLDominant, ULDominant, Balanced, LowSNR };

std::string_view regime_name(Regime r) noexcept;

/// e^{-s^2/2} min{s, d / (s n_l + s^3 n_u)}; zero at s = 0.
double minimax_excess_rate(const ProblemSize& p);

/// min{s, sqrt(d / (C_l n_l + s^2 n_u))}; only defined for s in [0, 1].
double minimax_estimation_rate(const ProblemSize& p, const BoundConstants& c = {});

/// Smallest n_u for which the UL+ upper bounds are stated: (160/s)^2 d.
double ulplus_min_unlabeled(const ProblemSize& p);

/// C3 e^{-s^2/2} d log(d n_u) / (s^3 n_u)
///   + C4 exp(-s^2 n_l (1 - A)^2 / 2),
/// A = c0 / min{s, s^2} sqrt(d log n_u / (s^2 n_u)), (1 - A) clamped to [0, 1].
/// Requires s in (0, 1] and n_u >= (160/s)^2 d.
double ulplus_excess_upper(const ProblemSize& p, const BoundConstants& c = {});

/// C1 sqrt(d / (s^2 n_u)) + C2 s exp(-s^2 n_l (1 - A)^2 / 2), same A and
/// validity condition on n_u; any s > 0.
double ulplus_estimation_upper(const ProblemSize& p, const BoundConstants& c = {});

/// Rate improvement of SSL over SL (h_l) and over UL+ (h_u); they sum to 1.
std::pair<double, double> rate_improvement(const ProblemSize& p);

/// Finite-sample reading of the asymptotic regimes. LowSNR when
/// s <= 1/sqrt(n_u) (n_u > 0); otherwise dominance is declared when one of
/// n_l and s^2 n_u exceeds the other by more than ratio_threshold.
Regime classify_regime(const ProblemSize& p, double ratio_threshold = 10.0);

/// Excess risk of the zero classifier, Phi(s) - 1/2.
double trivial_excess(double s);

struct OracleGap {
    double gap;
    double combined_mse;
};

/// Combined MSE (1/a + 1/b)^{-1} of the optimally weighted pair and its
/// improvement min(a, b) - combined = min{r, 1/r} combined, r = a / b.
OracleGap oracle_gap(double mse_sl, double mse_ul);

struct RateReport {
    ProblemSize problem;
    double excess_rate = 0.0;
    std::optional<double> estimation_rate;
    std::optional<double> ulp_excess_upper;
    std::optional<double> ulp_estimation_upper;
    double h_l = 0.0;
    double h_u = 0.0;
    double trivial_excess = 0.0;
    Regime regime = Regime::Balanced;
};

/// Evaluates every quantity above; those outside their domain are left empty.
RateReport rate_report(const ProblemSize& p, const BoundConstants& c = {}, double ratio_threshold = 10.0);

}  // namespace ssllab::theory
