#include "ssl_lab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "ssl_lab/rng.hpp"

namespace ssllab {

namespace {

// Streaming mean / variance (Welford).
class RunningStats {
public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double stddev() const { return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Computes an estimator at most once and replays its failure on every access.
class Cached {
public:
    explicit Cached(std::function<EstimatorOutput()> fn) : fn_(std::move(fn)) {}

    const EstimatorOutput& get() {
        if (!done_) {
            done_ = true;
            try {
                value_ = fn_();
            } catch (...) {
                error_ = std::current_exception();
            }
        }
        if (error_) std::rethrow_exception(error_);
        return *value_;
    }

private:
    std::function<EstimatorOutput()> fn_;
    std::optional<EstimatorOutput> value_;
    std::exception_ptr error_;
    bool done_ = false;
};

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Linear-interpolation sample quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double level) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct MarginChoice {
    EstimatorOutput estimate;
    double margin = -1.0;
    bool found = false;
};

void consider(MarginChoice& best, EstimatorOutput candidate, const UnlabeledDataset& validation) {
    if (candidate.theta.isZero(0.0)) return;
    const double margin = avg_margin(candidate.theta, validation);
    if (!best.found || margin > best.margin) {
        best = {std::move(candidate), margin, true};
    }
}

std::vector<Method> unique_methods(std::vector<Method> methods) {
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
    return methods;
}

}  // namespace

std::vector<double> default_ridge_grid() {
    std::vector<double> grid(7);
    for (int i = 0; i < 7; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, -4.0 + 5.0 * i / 6.0);
    return grid;
}

std::vector<double> default_threshold_quantiles() {
    std::vector<double> levels(7);
    for (int k = 0; k < 7; ++k) levels[static_cast<std::size_t>(k)] = k / 7.0;
    return levels;
}

void TrialConfig::validate() const {
    if (n_l < 1) throw std::invalid_argument("n_l must be at least 1");
    if (n_u < 0) throw std::invalid_argument("n_u must be nonnegative");
    if (n_val < 1) throw std::invalid_argument("n_val must be at least 1");
    if (n_test < 1) throw std::invalid_argument("n_test must be at least 1");
    if (methods.empty()) throw std::invalid_argument("at least one method is required");
    if (t_grid.empty()) throw std::invalid_argument("t_grid must be nonempty");
    for (double t : t_grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t_grid values must lie in [0, 1]");
    }
    if (ridge_grid.empty()) throw std::invalid_argument("ridge_grid must be nonempty");
    for (double r : ridge_grid) {
        if (!(r >= 0.0)) throw std::invalid_argument("ridge values must be nonnegative");
    }
    for (double q : threshold_quantiles) {
        if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("threshold quantiles must lie in [0, 1]");
    }
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial_index) {
    return derive_seed(base_seed, trial_index);
}

TrialResult run_trial(const TrialConfig& cfg, std::size_t trial_index) {
    cfg.validate();
    const std::uint64_t seed = trial_seed(cfg.base_seed, trial_index);
    const MixtureModel& model = cfg.model;
    const TrialData data{sample_labeled(model, cfg.n_l, derive_seed(seed, 0)),
                         sample_unlabeled(model, cfg.n_u, derive_seed(seed, 1)),
                         sample_unlabeled(model, cfg.n_val, derive_seed(seed, 2)),
                         sample_labeled(model, cfg.n_test, derive_seed(seed, 3))};
    TrialResult result = evaluate_methods(cfg, data, &model.theta_star(), derive_seed(seed, 4));
    result.trial_index = trial_index;
    result.seed = seed;
    return result;
}

TrialResult evaluate_methods(const TrialConfig& cfg, const TrialData& data, const Vector* theta_star,
                             std::uint64_t eigen_seed) {
    const LabeledDataset& labeled = data.labeled;
    const UnlabeledDataset& unlabeled = data.unlabeled;
    const UnlabeledDataset& validation = data.validation;
    const LabeledDataset& test = data.test;
    const Eigen::Index d = labeled.dim();
    if (unlabeled.dim() != d || validation.dim() != d || test.dim() != d) {
        throw std::invalid_argument("trial data sets differ in dimension");
    }
    if (theta_star && theta_star->size() != d) throw std::invalid_argument("theta* has the wrong dimension");
    if (labeled.size() < 1 || validation.size() < 1 || test.size() < 1) {
        throw std::invalid_argument("trial needs labeled, validation and test rows");
    }
    TrialResult result;
    SolverParams eigen = cfg.eigen;
    eigen.seed = eigen_seed;

    Cached sl([&] { return fit_sl(labeled); });
    Cached spectral([&] { return fit_ul(unlabeled, eigen); });
    Cached em([&] {
        Vector init = spectral.get().theta;
        if (init.isZero(0.0)) init = leading_eigenpair(second_moment(unlabeled).m, eigen).v;
        return fit_em(unlabeled, init, cfg.em_tol, cfg.em_max_iter);
    });
    Cached ul([&] { return cfg.em_for_ul ? em.get() : spectral.get(); });
    Cached ulp([&] { return fix_sign(ul.get(), sl.get()); });

    for (Method method : unique_methods(cfg.methods)) {
        MethodOutcome outcome;
        try {
            Vector theta;
            switch (method) {
                case Method::SL:
                    theta = sl.get().theta;
                    break;
                case Method::UL: {
                    const Vector& raw = ul.get().theta;
                    const bool keep = theta_star ? (raw - *theta_star).norm() <= (raw + *theta_star).norm()
                                                 : empirical_error(raw, test) <= empirical_error(-raw, test);
                    theta = keep ? raw : Vector(-raw);
                    break;
                }
                case Method::ULplus: {
                    const Vector& raw = ul.get().theta;
                    theta = ulp.get().theta;
                    if (theta_star) {
                        result.wrong_sign =
                            sign_of(sl.get().theta.dot(raw)) != sign_of(theta_star->dot(raw));
                    }
                    break;
                }
                case Method::SSLS: {
                    const double s = (cfg.ssls_plugin_snr || !theta_star) ? spectral.get().theta.norm()
                                                                          : theta_star->norm();
                    const SslsBranch branch = ssls_branch(s, d, labeled.size(), unlabeled.size());
                    result.branch = branch;
                    if (branch == SslsBranch::Zero) {
                        theta = Vector::Zero(d);
                    } else if (branch == SslsBranch::Supervised) {
                        theta = sl.get().theta;
                    } else {
                        theta = ulp.get().theta;
                    }
                    break;
                }
                case Method::SSLW: {
                    auto [estimate, selection] = select_weight(sl.get(), ulp.get(), validation, cfg.t_grid);
                    theta = std::move(estimate.theta);
                    result.selected_t = selection.t;
                    break;
                }
                case Method::EM:
                    theta = fix_sign(em.get(), sl.get()).theta;
                    break;
                case Method::Logistic: {
                    MarginChoice best;
                    double chosen_ridge = 0.0;
                    std::string last_error = "no ridge value produced a nonzero fit";
                    for (double ridge : cfg.ridge_grid) {
                        try {
                            const bool before = best.found;
                            const double before_margin = best.margin;
                            consider(best, fit_logistic(labeled, ridge, cfg.logistic_tol, cfg.logistic_max_iter),
                                     validation);
                            if (best.found && (!before || best.margin != before_margin)) chosen_ridge = ridge;
                        } catch (const std::exception& e) {
                            last_error = e.what();
                        }
                    }
                    if (!best.found) throw std::runtime_error(last_error);
                    theta = std::move(best.estimate.theta);
                    result.logistic_ridge = chosen_ridge;
                    break;
                }
                case Method::SelfTrain: {
                    MarginChoice best;
                    double chosen_ridge = 0.0;
                    double chosen_threshold = 0.0;
                    std::string last_error = "no self-training candidate produced a nonzero fit";
                    for (double ridge : cfg.ridge_grid) {
                        try {
                            const EstimatorOutput stage_one =
                                fit_logistic(labeled, ridge, cfg.logistic_tol, cfg.logistic_max_iter);
                            std::vector<double> thresholds{std::numeric_limits<double>::infinity()};
                            const double norm = stage_one.theta.norm();
                            if (norm > 0.0 && unlabeled.size() > 0 && !cfg.threshold_quantiles.empty()) {
                                const Vector margins = (unlabeled.x * stage_one.theta).cwiseAbs() / norm;
                                std::vector<double> sorted(margins.data(), margins.data() + margins.size());
                                std::sort(sorted.begin(), sorted.end());
                                thresholds.clear();
                                for (double q : cfg.threshold_quantiles) {
                                    thresholds.push_back(quantile_sorted(sorted, q));
                                }
                            }
                            for (double threshold : thresholds) {
                                const SelfTrainParams params{threshold, ridge, cfg.logistic_tol,
                                                             cfg.logistic_max_iter};
                                const bool before = best.found;
                                const double before_margin = best.margin;
                                consider(best, self_train(labeled, unlabeled, params), validation);
                                if (best.found && (!before || best.margin != before_margin)) {
                                    chosen_ridge = ridge;
                                    chosen_threshold = threshold;
                                }
                            }
                        } catch (const std::exception& e) {
                            last_error = e.what();
                        }
                    }
                    if (!best.found) throw std::runtime_error(last_error);
                    theta = std::move(best.estimate.theta);
                    result.selftrain_ridge = chosen_ridge;
                    result.selftrain_threshold = chosen_threshold;
                    break;
                }
                case Method::SphericalLDA:
                    theta = fit_spherical_lda(labeled).theta;
                    break;
                case Method::Zero:
                    theta = Vector::Zero(d);
                    break;
            }
            const double nan = std::numeric_limits<double>::quiet_NaN();
            outcome.excess = theta_star ? excess_risk(theta, *theta_star) : nan;
            outcome.estimation = theta_star ? estimation_error(theta, *theta_star) : nan;
            outcome.test_error = empirical_error(theta, test);
            outcome.theta = std::move(theta);
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.ok = false;
            outcome.error = e.what();
        }
        result.outcomes.emplace(method, std::move(outcome));
    }
    return result;
}

std::string_view axis_name(SweepAxis axis) noexcept {
    switch (axis) {
        case SweepAxis::SNR: return "snr";
        case SweepAxis::NuOverNl: return "nu_over_nl";
        case SweepAxis::Nl: return "n_l";
        case SweepAxis::Nu: return "n_u";
    }
    return "?";
}

SweepAxis parse_axis(std::string_view name) {
    if (name == "snr" || name == "s") return SweepAxis::SNR;
    if (name == "nu_over_nl" || name == "ratio" || name == "nu/nl") return SweepAxis::NuOverNl;
    if (name == "n_l" || name == "nl") return SweepAxis::Nl;
    if (name == "n_u" || name == "nu") return SweepAxis::Nu;
    throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "'");
}

TrialConfig cell_config(const TrialConfig& base, SweepAxis axis, double value) {
    TrialConfig cfg = base;
    switch (axis) {
        case SweepAxis::SNR: {
            if (!(value >= 0.0)) throw std::invalid_argument("SNR grid values must be nonnegative");
            const Vector& dir = base.model.theta_star();
            if (base.model.s() > 0.0) {
                cfg.model = MixtureModel(dir * (value / base.model.s()));
            } else {
                cfg.model = MixtureModel::along_first_axis(value, base.model.d());
            }
            break;
        }
        case SweepAxis::NuOverNl:
            if (!(value > 0.0)) throw std::invalid_argument("n_u/n_l grid values must be positive");
            cfg.n_l = std::max<Eigen::Index>(1, std::llround(static_cast<double>(base.n_u) / value));
            break;
        case SweepAxis::Nl:
            cfg.n_l = static_cast<Eigen::Index>(std::llround(value));
            break;
        case SweepAxis::Nu:
            cfg.n_u = static_cast<Eigen::Index>(std::llround(value));
            break;
    }
    cfg.validate();
    return cfg;
}

const MethodStats& SweepResult::stats(std::size_t cell, Method m) const {
    for (const auto& s : cells.at(cell).methods) {
        if (s.method == m) return s;
    }
    throw std::invalid_argument("sweep has no results for method " + std::string(method_name(m)));
}

bool SweepResult::has_method(Method m) const {
    if (cells.empty()) return false;
    return std::any_of(cells.front().methods.begin(), cells.front().methods.end(),
                       [m](const MethodStats& s) { return s.method == m; });
}

std::vector<double> SweepResult::grid() const {
    std::vector<double> values;
    values.reserve(cells.size());
    for (const auto& c : cells) values.push_back(c.axis_value);
    return values;
}

SweepCell aggregate_cell(double axis_value, const std::vector<Method>& methods,
                         const std::vector<TrialResult>& trials) {
    SweepCell cell;
    cell.axis_value = axis_value;
    for (Method m : unique_methods(methods)) {
        RunningStats excess, estimation, test, squared;
        RunningStats wrong_sign, selected_t, ridge, threshold;
        std::size_t failures = 0;
        std::size_t branch_counts[3] = {0, 0, 0};
        for (const TrialResult& trial : trials) {
            const auto it = trial.outcomes.find(m);
            if (it == trial.outcomes.end() || !it->second.ok) {
                ++failures;
                continue;
            }
            const MethodOutcome& o = it->second;
            excess.add(o.excess);
            estimation.add(o.estimation);
            test.add(o.test_error);
            squared.add(o.estimation * o.estimation);
            if (m == Method::ULplus && trial.wrong_sign) wrong_sign.add(*trial.wrong_sign ? 1.0 : 0.0);
            if (m == Method::SSLS && trial.branch) ++branch_counts[static_cast<int>(*trial.branch)];
            if (m == Method::SSLW && trial.selected_t) selected_t.add(*trial.selected_t);
            if (m == Method::Logistic && trial.logistic_ridge) ridge.add(*trial.logistic_ridge);
            if (m == Method::SelfTrain && trial.selftrain_ridge) ridge.add(*trial.selftrain_ridge);
            if (m == Method::SelfTrain && trial.selftrain_threshold) threshold.add(*trial.selftrain_threshold);
        }
        MethodStats stats;
        stats.method = m;
        stats.replicates = excess.count();
        stats.mean_excess = excess.mean();
        stats.std_excess = excess.stddev();
        stats.mean_estimation = estimation.mean();
        stats.std_estimation = estimation.stddev();
        stats.mean_test_error = test.mean();
        stats.std_test_error = test.stddev();
        stats.extra["failures"] = static_cast<double>(failures);
        stats.extra["mse"] = squared.mean();
        if (wrong_sign.count() > 0) stats.extra["wrong_sign_rate"] = wrong_sign.mean();
        if (m == Method::SSLS && stats.replicates > 0) {
            const double n = static_cast<double>(stats.replicates);
            stats.extra["branch_zero"] = static_cast<double>(branch_counts[0]) / n;
            stats.extra["branch_sl"] = static_cast<double>(branch_counts[1]) / n;
            stats.extra["branch_ulp"] = static_cast<double>(branch_counts[2]) / n;
        }
        if (selected_t.count() > 0) stats.extra["mean_t"] = selected_t.mean();
        if (ridge.count() > 0) stats.extra["mean_ridge"] = ridge.mean();
        if (threshold.count() > 0) stats.extra["mean_threshold"] = threshold.mean();
        cell.methods.push_back(std::move(stats));
    }
    return cell;
}

SweepResult run_sweep(const TrialConfig& cfg, SweepAxis axis, const std::vector<double>& grid,
                      std::size_t replicates, unsigned threads) {
    if (grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
    if (replicates < 1) throw std::invalid_argument("run_sweep: replicates must be >= 1");
    cfg.validate();

    std::vector<TrialConfig> cell_cfgs;
    cell_cfgs.reserve(grid.size());
    for (double value : grid) cell_cfgs.push_back(cell_config(cfg, axis, value));

    const std::size_t total = grid.size() * replicates;
    std::vector<TrialResult> trials(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
            const TrialConfig& cell_cfg = cell_cfgs[k / replicates];
            try {
                trials[k] = run_trial(cell_cfg, k);
            } catch (const std::exception& e) {
                TrialResult failed;
                failed.trial_index = k;
                failed.seed = trial_seed(cell_cfg.base_seed, k);
                for (Method m : cell_cfg.methods) failed.outcomes[m] = MethodOutcome{false, e.what(), {}, 0, 0, 0};
                trials[k] = std::move(failed);
            }
        }
    };

    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    }

    SweepResult sweep;
    sweep.axis = std::string(axis_name(axis));
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const std::vector<TrialResult> cell_trials(trials.begin() + static_cast<std::ptrdiff_t>(c * replicates),
                                                   trials.begin() + static_cast<std::ptrdiff_t>((c + 1) * replicates));
        sweep.cells.push_back(aggregate_cell(grid[c], cfg.methods, cell_trials));
    }
    return sweep;
}

double cell_mean(const MethodStats& stats, Metric metric) {
    switch (metric) {
        case Metric::Excess: return stats.mean_excess;
        case Metric::Estimation: return stats.mean_estimation;
        case Metric::TestError: return stats.mean_test_error;
    }
    return 0.0;
}

std::vector<double> error_gap(const SweepResult& sweep, Method a, Method b, Metric metric) {
    return error_gap(sweep, std::vector<Method>{a}, b, metric);
}

std::vector<double> error_gap(const SweepResult& sweep, const std::vector<Method>& baseline, Method b,
                              Metric metric) {
    if (baseline.empty()) throw std::invalid_argument("error_gap: empty baseline");
    std::vector<double> gaps;
    gaps.reserve(sweep.cells.size());
    for (std::size_t c = 0; c < sweep.cells.size(); ++c) {
        double best = std::numeric_limits<double>::infinity();
        for (Method m : baseline) best = std::min(best, cell_mean(sweep.stats(c, m), metric));
        gaps.push_back(best - cell_mean(sweep.stats(c, b), metric));
    }
    return gaps;
}

SwitchPoint switching_point_oracle(const SweepResult& sweep, Metric metric) {
    if (sweep.cells.empty()) throw std::invalid_argument("switching_point_oracle: empty sweep");
    auto sl_wins = [&](std::size_t c) {
        return cell_mean(sweep.stats(c, Method::SL), metric) <= cell_mean(sweep.stats(c, Method::ULplus), metric);
    };
    const bool first = sl_wins(0);
    for (std::size_t c = 1; c < sweep.cells.size(); ++c) {
        if (sl_wins(c) != first) return {c, sweep.cells[c].axis_value, true};
    }
    const std::size_t last = sweep.cells.size() - 1;
    return {last, sweep.cells[last].axis_value, false};
}

std::vector<double> switched_errors(const SweepResult& sweep, const SwitchPoint& point, Metric metric) {
    if (sweep.cells.empty()) return {};
    const bool sl_first = cell_mean(sweep.stats(0, Method::SL), metric) <=
                          cell_mean(sweep.stats(0, Method::ULplus), metric);
    const Method before = sl_first ? Method::SL : Method::ULplus;
    const Method after = sl_first ? Method::ULplus : Method::SL;
    std::vector<double> errors;
    for (std::size_t c = 0; c < sweep.cells.size(); ++c) {
        const Method m = (point.crossed && c >= point.index) ? after : before;
        errors.push_back(cell_mean(sweep.stats(c, m), metric));
    }
    return errors;
}

CompatibilityScore compatibility_from_errors(double err_bayes, double err_ul, long long d) {
    if (!(err_bayes >= 0.0 && err_bayes <= 1.0) || !(err_ul >= 0.0 && err_ul <= 1.0)) {
        throw std::invalid_argument("compatibility: errors must lie in [0, 1]");
    }
    if (d < 1) throw std::invalid_argument("compatibility: d must be positive");
    CompatibilityScore score;
    score.err_bayes = err_bayes;
    score.err_ul = err_ul;
    if (err_bayes <= 0.01) {
        score.separable_fallback = true;
        score.rho = err_bayes;
    } else {
        const double misspecification = (err_ul - err_bayes) / err_bayes;
        score.rho = (misspecification + err_bayes) / (2.0 * std::sqrt(static_cast<double>(d)));
    }
    score.inverse = score.rho > 0.0 ? 1.0 / score.rho : std::numeric_limits<double>::infinity();
    return score;
}

CompatibilityScore compatibility_score(const LabeledDataset& full, double ridge, double tol,
                                       std::size_t max_iter) {
    const EstimatorOutput bayes = fit_logistic(full, ridge, tol, max_iter);
    const double err_bayes = empirical_error(bayes.theta, full);
    const double err_lda = empirical_error(fit_spherical_lda(full).theta, full);
    return compatibility_from_errors(err_bayes, std::min(err_lda, 1.0 - err_lda), full.dim());
}

double scaling_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("scaling_fit: length mismatch");
    if (x.size() < 3) throw std::invalid_argument("scaling_fit: need at least 3 cells");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("scaling_fit: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw std::invalid_argument("scaling_fit: axis values are all equal");
    return sxy / sxx;
}

double scaling_fit(const SweepResult& sweep, Method method, Metric metric) {
    std::vector<double> x, y;
    for (std::size_t c = 0; c < sweep.cells.size(); ++c) {
        x.push_back(sweep.cells[c].axis_value);
        y.push_back(cell_mean(sweep.stats(c, method), metric));
    }
    return scaling_fit(x, y);
}

std::vector<OracleGapCell> oracle_gap_series(const SweepResult& sweep) {
    std::vector<OracleGapCell> series;
    for (std::size_t c = 0; c < sweep.cells.size(); ++c) {
        OracleGapCell cell;
        cell.axis_value = sweep.cells[c].axis_value;
        cell.mse_sl = sweep.stats(c, Method::SL).extra.at("mse");
        cell.mse_ul = sweep.stats(c, Method::UL).extra.at("mse");
        cell.t_star = oracle_weight(cell.mse_sl, cell.mse_ul).t;
        const theory::OracleGap gap = theory::oracle_gap(cell.mse_sl, cell.mse_ul);
        cell.combined_mse = gap.combined_mse;
        cell.gap = gap.gap;
        series.push_back(cell);
    }
    return series;
}

PairSimulation simulate_weighted_pair(const Vector& theta_star, double mse_first, double mse_second,
                                      std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("simulate_weighted_pair: trials must be >= 1");
    const Eigen::Index d = theta_star.size();
    const double scale_first = std::sqrt(mse_first / static_cast<double>(d));
    const double scale_second = std::sqrt(mse_second / static_cast<double>(d));
    const double t = oracle_weight(mse_first, mse_second).t;
    Rng rng(seed);
    Vector first(d), second(d);
    RunningStats e1, e2, combined;
    for (std::size_t k = 0; k < trials; ++k) {
        for (Eigen::Index j = 0; j < d; ++j) first(j) = theta_star(j) + scale_first * rng.normal();
        for (Eigen::Index j = 0; j < d; ++j) second(j) = theta_star(j) + scale_second * rng.normal();
        e1.add((first - theta_star).squaredNorm());
        e2.add((second - theta_star).squaredNorm());
        combined.add((t * first + (1.0 - t) * second - theta_star).squaredNorm());
    }
    return {e1.mean(), e2.mean(), combined.mean(), t};
}

SweepPlan preset(std::string_view name) {
    SweepPlan plan;
    plan.name = std::string(name);
    plan.replicates = 20;
    if (name == "fig1a") {
        plan.config.model = MixtureModel::along_first_axis(1.0, 2);
        plan.config.n_l = 20;
        plan.config.n_u = 2000;
        plan.config.methods = {Method::SL, Method::ULplus, Method::SSLS, Method::SSLW, Method::SelfTrain};
        plan.axis = SweepAxis::SNR;
        plan.grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    } else if (name == "fig1b") {
        plan.config.model = MixtureModel::along_first_axis(0.5, 2);
        plan.config.n_u = 7000;
        plan.config.methods = {Method::SL, Method::ULplus, Method::SSLS, Method::SSLW, Method::SelfTrain};
        plan.axis = SweepAxis::NuOverNl;
        plan.grid = {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 350.0};
    } else if (name == "fig3") {
        plan.config.model = MixtureModel::along_first_axis(0.5, 2);
        plan.config.n_u = 10000;
        plan.config.methods = {Method::SL, Method::UL, Method::ULplus, Method::SSLS, Method::SSLW};
        plan.axis = SweepAxis::Nl;
        plan.grid = {10, 30, 100, 300, 1000, 3000, 10000};
    } else {
        throw std::invalid_argument("unknown preset '" + std::string(name) + "' (expected fig1a, fig1b, fig3)");
    }
    return plan;
}

}  // namespace ssllab
