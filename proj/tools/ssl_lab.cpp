// ssl_lab command-line tool: simulate, theory, fit, report.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssl_lab/config.hpp"
#include "ssl_lab/data_io.hpp"
#include "ssl_lab/experiments.hpp"
#include "ssl_lab/report.hpp"
#include "ssl_lab/rng.hpp"
#include "ssl_lab/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssllab;

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 3;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> config;
    unsigned threads = 0;
    bool quiet = false;
};

struct SimulateArgs {
    std::optional<std::string> preset;
    std::optional<std::string> axis;
    std::optional<std::vector<double>> grid;
    std::optional<std::size_t> replicates;
    std::optional<double> s;
    std::optional<Eigen::Index> d;
    std::optional<Eigen::Index> n_l, n_u, n_val, n_test;
    std::optional<std::vector<std::string>> methods;
    std::optional<std::vector<double>> t_grid, ridge_grid, threshold_quantiles;
    bool ssls_plugin_snr = false;
    bool em_for_ul = false;
};

struct TheoryArgs {
    double s = 0.0;
    long long d = 0, n_l = 0, n_u = 0;
    theory::BoundConstants constants;
    double ratio_threshold = 10.0;
};

struct FitArgs {
    std::string csv;
    std::string label = "label";
    std::string positive = "1";
    Eigen::Index n_l = 20;
    std::optional<Eigen::Index> n_val, n_test;
    std::optional<Eigen::Index> pca;
    std::size_t replicates = 1;
    std::vector<std::string> methods{"SL", "ULplus", "SSLS", "SSLW", "Logistic", "SelfTrain", "SphericalLDA"};
    bool no_standardize = false;
};

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string metric = "excess";
    bool log_x = false;
    bool log_y = false;
    std::vector<std::pair<std::string, std::string>> gaps;
};

fs::path output_dir(const Globals& g, const fs::path& fallback) {
    if (g.out) return *g.out;
    if (const char* env = std::getenv("SSL_LAB_OUT_DIR"); env && *env) return env;
    return fallback;
}

void note(const Globals& g, const std::string& msg) {
    if (!g.quiet) std::cerr << msg << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw std::runtime_error("cannot write '" + path.string() + "'");
}

RunConfig resolve_simulate(const Globals& g, const SimulateArgs& a) {
    RunConfig run;
    if (a.preset) run = from_preset(preset(*a.preset));
    if (g.config) run = run_from_json(read_json_file(*g.config), std::move(run));
    TrialConfig& t = run.trial;
    if (a.s || a.d) {
        json model;
        if (a.s) model["s"] = *a.s;
        if (a.d) model["d"] = *a.d;
        t = trial_from_json(json{{"model", model}}, std::move(t));
    }
    if (a.n_l) t.n_l = *a.n_l;
    if (a.n_u) t.n_u = *a.n_u;
    if (a.n_val) t.n_val = *a.n_val;
    if (a.n_test) t.n_test = *a.n_test;
    if (a.methods) {
        t.methods.clear();
        for (const auto& m : *a.methods) t.methods.push_back(parse_method(m));
    }
    if (a.t_grid) t.t_grid = *a.t_grid;
    if (a.ridge_grid) t.ridge_grid = *a.ridge_grid;
    if (a.threshold_quantiles) t.threshold_quantiles = *a.threshold_quantiles;
    if (a.ssls_plugin_snr) t.ssls_plugin_snr = true;
    if (a.em_for_ul) t.em_for_ul = true;
    if (g.seed) t.base_seed = *g.seed;
    if (a.axis) run.axis = parse_axis(*a.axis);
    if (a.grid) run.grid = *a.grid;
    if (a.replicates) run.replicates = *a.replicates;
    if (run.grid.empty()) throw std::invalid_argument("grid must be nonempty");
    if (run.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    t.validate();
    for (double v : run.grid) cell_config(t, run.axis, v);
    return run;
}

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
    const RunConfig run = resolve_simulate(g, a);
    const fs::path dir = output_dir(g, "results");
    RunManifest manifest;
    manifest.command = "simulate";
    manifest.config = to_json(run);
    manifest.config_path = g.config.value_or("");
    manifest.out_dir = dir.string();
    manifest.base_seed = run.trial.base_seed;
    manifest.extra["seed_rule"] = "trial seed = mix64(base_seed ^ 0x9E3779B97F4A7C15 * (cell * replicates + r + 1))";
    write_manifest(manifest, dir / "manifest.json");

    const std::size_t trials = run.grid.size() * run.replicates;
    note(g, "simulate: " + std::to_string(trials) + " trials over " + std::string(axis_name(run.axis)) + " -> " +
                dir.string());
    const auto start = std::chrono::steady_clock::now();
    const SweepResult sweep = run_sweep(run.trial, run.axis, run.grid, run.replicates, g.threads);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    write_results(sweep, dir / "results.csv");
    if (sweep.has_method(Method::SL) && sweep.has_method(Method::UL)) {
        std::string csv = "axis_value,mse_sl,mse_ul,t_star,combined_mse,gap\n";
        try {
            for (const OracleGapCell& c : oracle_gap_series(sweep)) {
                csv += format_double(c.axis_value) + ',' + format_double(c.mse_sl) + ',' + format_double(c.mse_ul) +
                       ',' + format_double(c.t_star) + ',' + format_double(c.combined_mse) + ',' +
                       format_double(c.gap) + '\n';
            }
            write_text(dir / "oracle_gap.csv", csv);
        } catch (const std::invalid_argument& e) {
            note(g, std::string("oracle gap skipped: ") + e.what());
        }
    }
    manifest.wall_clock_seconds = seconds;
    write_manifest(manifest, dir / "manifest.json");
    note(g, "wrote " + (dir / "results.csv").string() + " in " + std::to_string(seconds) + " s");
    return 0;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

int cmd_theory(const Globals& g, const TheoryArgs& a) {
    const theory::ProblemSize p{a.s, a.d, a.n_l, a.n_u};
    const theory::RateReport r = theory::rate_report(p, a.constants, a.ratio_threshold);
    json j;
    j["s"] = p.s;
    j["d"] = p.d;
    j["n_l"] = p.n_l;
    j["n_u"] = p.n_u;
    j["excess_rate"] = r.excess_rate;
    j["estimation_rate"] = optional_json(r.estimation_rate);
    j["ulp_excess_upper"] = optional_json(r.ulp_excess_upper);
    j["ulp_estimation_upper"] = optional_json(r.ulp_estimation_upper);
    j["h_l"] = r.h_l;
    j["h_u"] = r.h_u;
    j["trivial_excess"] = r.trivial_excess;
    j["regime"] = std::string(theory::regime_name(r.regime));
    std::cout << j.dump(2) << '\n';
    if (g.out) {
        RunManifest manifest{"theory", j, g.config.value_or(""), *g.out, g.seed.value_or(0), 0.0, {}};
        write_manifest(manifest, fs::path(*g.out) / "manifest.json");
    }
    return 0;
}

int cmd_fit(const Globals& g, const FitArgs& a) {
    if (!fs::is_regular_file(a.csv)) throw std::invalid_argument("no such file: '" + a.csv + "'");
    const std::uint64_t seed = g.seed.value_or(0);
    TrialConfig cfg;
    if (g.config) cfg = trial_from_json(read_json_file(*g.config), cfg);
    cfg.methods.clear();
    for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
    cfg.base_seed = seed;
    if (a.replicates < 1) throw std::invalid_argument("replicates must be >= 1");

    TabularDataset data = load_csv(a.csv, a.label, a.positive);
    if (!a.no_standardize) data = standardize(data).first;
    if (a.pca) data = pca_project(data, *a.pca, 1e-12, 1000000, derive_seed(seed, 0));
    const Eigen::Index quarter = data.size() / 4;
    SplitSpec outer;
    outer.n_l = 0;
    outer.n_val = a.n_val.value_or(std::min<Eigen::Index>(1000, quarter));
    outer.n_test = a.n_test.value_or(std::min<Eigen::Index>(1000, quarter));
    outer.seed = seed;
    const DataSplit held_out = split(data, outer);
    if (a.n_l < 1 || a.n_l > static_cast<Eigen::Index>(held_out.unlabeled_rows.size())) {
        throw std::invalid_argument("n_l must lie in [1, " + std::to_string(held_out.unlabeled_rows.size()) + "]");
    }
    TabularDataset pool;
    pool.x = held_out.unlabeled.x;
    pool.y.resize(pool.x.rows());
    for (std::size_t i = 0; i < held_out.unlabeled_rows.size(); ++i) {
        pool.y(static_cast<Eigen::Index>(i)) = data.y(held_out.unlabeled_rows[i]);
    }

    const fs::path dir = output_dir(g, "results");
    json resolved = to_json(cfg);
    resolved["csv"] = a.csv;
    resolved["label"] = a.label;
    resolved["positive"] = a.positive;
    resolved["n_l"] = a.n_l;
    resolved["n_val"] = outer.n_val;
    resolved["n_test"] = outer.n_test;
    resolved["pca"] = a.pca ? json(*a.pca) : json(nullptr);
    resolved["standardize"] = !a.no_standardize;
    resolved["replicates"] = a.replicates;
    RunManifest manifest{"fit", resolved, g.config.value_or(""), dir.string(), seed, std::nullopt, {}};
    write_manifest(manifest, dir / "manifest.json");
    const auto start = std::chrono::steady_clock::now();

    std::vector<TrialResult> trials;
    for (std::size_t r = 0; r < a.replicates; ++r) {
        const DataSplit inner = split(pool, SplitSpec{a.n_l, 0, 0, derive_seed(seed, r + 1)});
        const TrialData trial{inner.labeled, inner.unlabeled, held_out.validation, held_out.test};
        trials.push_back(evaluate_methods(cfg, trial, nullptr, derive_seed(derive_seed(seed, r + 1), 4)));
    }
    SweepResult sweep;
    sweep.axis = "n_l";
    sweep.cells.push_back(aggregate_cell(static_cast<double>(a.n_l), cfg.methods, trials));
    write_results(sweep, dir / "fit_results.csv");

    json summary;
    summary["n"] = data.size();
    summary["d"] = data.dim();
    summary["n_l"] = a.n_l;
    summary["n_u"] = pool.size() - a.n_l;
    summary["n_val"] = outer.n_val;
    summary["n_test"] = outer.n_test;
    for (const MethodStats& m : sweep.cells.front().methods) {
        json entry{{"replicates", m.replicates},
                   {"mean_test_error", m.mean_test_error},
                   {"std_test_error", m.std_test_error}};
        for (const TrialResult& t : trials) {
            const MethodOutcome& o = t.outcomes.at(m.method);
            if (!o.ok) entry["errors"].push_back(o.error);
        }
        summary["methods"][std::string(method_name(m.method))] = entry;
    }
    try {
        const CompatibilityScore c = compatibility_score(data.labeled());
        summary["compatibility"] = {{"rho", c.rho},
                                    {"inverse", c.inverse},
                                    {"err_bayes", c.err_bayes},
                                    {"err_ul", c.err_ul},
                                    {"separable_fallback", c.separable_fallback}};
    } catch (const std::exception& e) {
        summary["compatibility"] = {{"error", e.what()}};
    }
    write_text(dir / "fit.json", summary.dump(2) + "\n");
    manifest.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(manifest, dir / "manifest.json");
    std::cout << summary.dump(2) << '\n';
    note(g, "wrote " + (dir / "fit_results.csv").string());
    return 0;
}

Metric parse_metric(const std::string& name) {
    if (name == "excess") return Metric::Excess;
    if (name == "estimation") return Metric::Estimation;
    if (name == "test" || name == "test_error") return Metric::TestError;
    throw std::invalid_argument("unknown metric '" + name + "' (expected excess, estimation or test)");
}

int cmd_report(const Globals& g, const ReportArgs& a) {
    const Metric metric = parse_metric(a.metric);
    std::vector<std::pair<Method, Method>> gaps;
    for (const auto& [x, y] : a.gaps) gaps.emplace_back(parse_method(x), parse_method(y));
    for (const auto& input : a.inputs) {
        if (!fs::is_regular_file(input)) throw std::invalid_argument("no such file: '" + input + "'");
    }
    const fs::path dir = output_dir(g, fs::path(a.inputs.front()).parent_path());
    for (const auto& input : a.inputs) {
        const SweepResult sweep = read_results(input);
        if (sweep.cells.empty()) throw std::runtime_error("'" + input + "' contains no results");
        const std::string stem = fs::path(input).stem().string();
        ChartSpec spec;
        spec.x_label = sweep.axis;
        spec.log_x = a.log_x;
        spec.log_y = a.log_y;
        spec.title = stem + ": " + std::string(metric_label(metric));
        spec.y_label = std::string(metric_label(metric));
        const fs::path chart = dir / (stem + "_" + a.metric + ".svg");
        write_text(chart, render_line_chart(sweep_series(sweep, metric), spec));
        std::cout << chart.string() << '\n';
        for (const auto& [x, y] : gaps) {
            const Series gap = gap_series(sweep, x, y, metric);
            ChartSpec gspec = spec;
            gspec.log_y = false;
            gspec.title = stem + ": error gap";
            gspec.y_label = "error gap (" + std::string(metric_label(metric)) + ")";
            const fs::path path =
                dir / (stem + "_gap_" + std::string(method_name(x)) + "_" + std::string(method_name(y)) + ".svg");
            write_text(path, render_line_chart({gap}, gspec));
            std::cout << path.string() << '\n';
        }
    }
    note(g, "report: done");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-supervised learning on the symmetric two-component Gaussian mixture", "ssl_lab"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Base seed");
    app.add_option("--out", g.out, "Output directory (default: $SSL_LAB_OUT_DIR or ./results)");
    app.add_option("--config", g.config, "JSON config file or run manifest");
    app.add_option("--threads", g.threads, "Worker threads (0 = available parallelism)");
    app.add_flag("--quiet,-q", g.quiet, "Suppress progress messages");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run a preset or custom Monte Carlo sweep");
    simulate->add_option("--preset", sim.preset, "fig1a, fig1b or fig3");
    simulate->add_option("--axis", sim.axis, "snr, nu_over_nl, n_l or n_u");
    simulate->add_option("--grid", sim.grid, "Axis values")->delimiter(',');
    simulate->add_option("--replicates", sim.replicates);
    simulate->add_option("--s", sim.s, "SNR ||theta*||");
    simulate->add_option("--d", sim.d, "Dimension");
    simulate->add_option("--n-l,--nl", sim.n_l);
    simulate->add_option("--n-u,--nu", sim.n_u);
    simulate->add_option("--n-val", sim.n_val);
    simulate->add_option("--n-test", sim.n_test);
    simulate->add_option("--methods", sim.methods, "e.g. sl,ulp,sslw")->delimiter(',');
    simulate->add_option("--t-grid", sim.t_grid)->delimiter(',');
    simulate->add_option("--ridge-grid", sim.ridge_grid)->delimiter(',');
    simulate->add_option("--threshold-quantiles", sim.threshold_quantiles)->delimiter(',');
    simulate->add_flag("--ssls-plugin-snr", sim.ssls_plugin_snr, "Feed SSL-S the estimated SNR");
    simulate->add_flag("--em-for-ul", sim.em_for_ul, "Use EM as the unsupervised estimator");

    TheoryArgs th;
    auto* theory_cmd = app.add_subcommand("theory", "Print rates and bounds for (s, d, n_l, n_u) as JSON");
    theory_cmd->add_option("--s", th.s)->required();
    theory_cmd->add_option("--d", th.d)->required();
    theory_cmd->add_option("--n-l,--nl", th.n_l)->required();
    theory_cmd->add_option("--n-u,--nu", th.n_u)->required();
    theory_cmd->add_option("--c0", th.constants.c0);
    theory_cmd->add_option("--C1", th.constants.C1);
    theory_cmd->add_option("--C2", th.constants.C2);
    theory_cmd->add_option("--C3", th.constants.C3);
    theory_cmd->add_option("--C4", th.constants.C4);
    theory_cmd->add_option("--Cl", th.constants.C_l);
    theory_cmd->add_option("--ratio-threshold", th.ratio_threshold);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit estimators on a CSV table");
    fit_cmd->add_option("csv,--csv", fit.csv, "Input CSV")->required();
    fit_cmd->add_option("--label", fit.label, "Label column")->capture_default_str();
    fit_cmd->add_option("--positive", fit.positive, "Label value mapped to +1")->capture_default_str();
    fit_cmd->add_option("--n-l,--nl", fit.n_l)->capture_default_str();
    fit_cmd->add_option("--n-val", fit.n_val, "Validation rows (default min(1000, n/4))");
    fit_cmd->add_option("--n-test", fit.n_test, "Test rows (default min(1000, n/4))");
    fit_cmd->add_option("--pca", fit.pca, "Project onto k principal components");
    fit_cmd->add_option("--replicates", fit.replicates, "Labeled subsets to draw")->capture_default_str();
    fit_cmd->add_option("--methods", fit.methods)->delimiter(',');
    fit_cmd->add_flag("--no-standardize", fit.no_standardize);

    ReportArgs rep;
    auto* report_cmd = app.add_subcommand("report", "Render results CSVs as SVG line charts");
    report_cmd->add_option("inputs", rep.inputs, "Results CSV files")->required();
    report_cmd->add_option("--metric", rep.metric, "excess, estimation or test")->capture_default_str();
    report_cmd->add_flag("--log-x", rep.log_x);
    report_cmd->add_flag("--log-y", rep.log_y);
    report_cmd->add_option("--gap", rep.gaps, "Method pair A B: chart mean(A) - mean(B)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const auto parsed = app.get_subcommands();
        std::cerr << (parsed.empty() ? app.help() : parsed.front()->help());
        return kUsageError;
    }

    try {
        if (*simulate) return cmd_simulate(g, sim);
        if (*theory_cmd) return cmd_theory(g, th);
        if (*fit_cmd) return cmd_fit(g, fit);
        if (*report_cmd) return cmd_report(g, rep);
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}
