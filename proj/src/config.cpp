#include "ssl_lab/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace ssllab {

using nlohmann::json;

namespace {

template <class T>
T get_as(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
    }
}

MixtureModel model_from_json(const json& j, const MixtureModel& base) {
    if (!j.is_object()) throw std::invalid_argument("config key 'model' must be an object");
    for (const auto& [key, _] : j.items()) {
        if (key != "theta_star" && key != "s" && key != "d") {
            throw std::invalid_argument("unknown model key '" + key + "'");
        }
    }
    if (j.contains("theta_star")) {
        if (j.contains("s") || j.contains("d")) {
            throw std::invalid_argument("model: give either theta_star or s/d, not both");
        }
        const auto values = get_as<std::vector<double>>(j, "theta_star");
        return MixtureModel(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    const double s = j.contains("s") ? get_as<double>(j, "s") : base.s();
    const auto d = j.contains("d") ? get_as<Eigen::Index>(j, "d") : base.d();
    if (d == base.d() && base.s() > 0.0) return MixtureModel(base.theta_star() * (s / base.s()));
    return MixtureModel::along_first_axis(s, d);
}

std::vector<Method> methods_from_json(const json& j) {
    std::vector<Method> methods;
    for (const auto& name : get_as<std::vector<std::string>>(j, "methods")) {
        methods.push_back(parse_method(name));
    }
    return methods;
}

}  // namespace

RunConfig from_preset(const SweepPlan& plan) {
    return RunConfig{plan.config, plan.axis, plan.grid, plan.replicates, plan.name};
}

json to_json(const TrialConfig& cfg) {
    json j;
    const Vector& theta = cfg.model.theta_star();
    j["model"] = {{"theta_star", std::vector<double>(theta.data(), theta.data() + theta.size())}};
    j["n_l"] = cfg.n_l;
    j["n_u"] = cfg.n_u;
    j["n_val"] = cfg.n_val;
    j["n_test"] = cfg.n_test;
    std::vector<std::string> names;
    for (Method m : cfg.methods) names.emplace_back(method_name(m));
    j["methods"] = names;
    j["t_grid"] = cfg.t_grid;
    j["threshold_quantiles"] = cfg.threshold_quantiles;
    j["ridge_grid"] = cfg.ridge_grid;
    j["base_seed"] = cfg.base_seed;
    j["eigen"] = {{"tol", cfg.eigen.tol}, {"max_iter", cfg.eigen.max_iter}};
    j["logistic_tol"] = cfg.logistic_tol;
    j["logistic_max_iter"] = cfg.logistic_max_iter;
    j["em_tol"] = cfg.em_tol;
    j["em_max_iter"] = cfg.em_max_iter;
    j["ssls_plugin_snr"] = cfg.ssls_plugin_snr;
    j["em_for_ul"] = cfg.em_for_ul;
    return j;
}

json to_json(const RunConfig& run) {
    json j = to_json(run.trial);
    j["axis"] = std::string(axis_name(run.axis));
    j["grid"] = run.grid;
    j["replicates"] = run.replicates;
    if (!run.preset.empty()) j["preset"] = run.preset;
    return j;
}

TrialConfig trial_from_json(const json& j, TrialConfig base) {
    static const std::set<std::string> known{
        "model",  "n_l",          "n_u",      "n_val",     "n_test",          "methods",     "t_grid",
        "threshold_quantiles",  "ridge_grid", "base_seed", "eigen", "logistic_tol", "logistic_max_iter",
        "em_tol", "em_max_iter", "ssls_plugin_snr", "em_for_ul", "axis", "grid", "replicates", "preset"};
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
    }
    TrialConfig cfg = std::move(base);
    if (j.contains("model")) cfg.model = model_from_json(j.at("model"), cfg.model);
    if (j.contains("n_l")) cfg.n_l = get_as<Eigen::Index>(j, "n_l");
    if (j.contains("n_u")) cfg.n_u = get_as<Eigen::Index>(j, "n_u");
    if (j.contains("n_val")) cfg.n_val = get_as<Eigen::Index>(j, "n_val");
    if (j.contains("n_test")) cfg.n_test = get_as<Eigen::Index>(j, "n_test");
    if (j.contains("methods")) cfg.methods = methods_from_json(j);
    if (j.contains("t_grid")) cfg.t_grid = get_as<std::vector<double>>(j, "t_grid");
    if (j.contains("threshold_quantiles")) {
        cfg.threshold_quantiles = get_as<std::vector<double>>(j, "threshold_quantiles");
    }
    if (j.contains("ridge_grid")) cfg.ridge_grid = get_as<std::vector<double>>(j, "ridge_grid");
    if (j.contains("base_seed")) cfg.base_seed = get_as<std::uint64_t>(j, "base_seed");
    if (j.contains("eigen")) {
        const json& e = j.at("eigen");
        if (!e.is_object()) throw std::invalid_argument("config key 'eigen' must be an object");
        for (const auto& [key, _] : e.items()) {
            if (key != "tol" && key != "max_iter") throw std::invalid_argument("unknown eigen key '" + key + "'");
        }
        if (e.contains("tol")) cfg.eigen.tol = get_as<double>(e, "tol");
        if (e.contains("max_iter")) cfg.eigen.max_iter = get_as<std::size_t>(e, "max_iter");
    }
    if (j.contains("logistic_tol")) cfg.logistic_tol = get_as<double>(j, "logistic_tol");
    if (j.contains("logistic_max_iter")) cfg.logistic_max_iter = get_as<std::size_t>(j, "logistic_max_iter");
    if (j.contains("em_tol")) cfg.em_tol = get_as<double>(j, "em_tol");
    if (j.contains("em_max_iter")) cfg.em_max_iter = get_as<std::size_t>(j, "em_max_iter");
    if (j.contains("ssls_plugin_snr")) cfg.ssls_plugin_snr = get_as<bool>(j, "ssls_plugin_snr");
    if (j.contains("em_for_ul")) cfg.em_for_ul = get_as<bool>(j, "em_for_ul");
    return cfg;
}

RunConfig run_from_json(const json& j, RunConfig base) {
    if (j.is_object() && j.contains("config") && j.contains("command")) return run_from_json(j.at("config"), base);
    RunConfig run = std::move(base);
    if (j.is_object() && j.contains("preset")) {
        run = from_preset(preset(get_as<std::string>(j, "preset")));
    }
    run.trial = trial_from_json(j, std::move(run.trial));
    if (j.contains("axis")) run.axis = parse_axis(get_as<std::string>(j, "axis"));
    if (j.contains("grid")) run.grid = get_as<std::vector<double>>(j, "grid");
    if (j.contains("replicates")) run.replicates = get_as<std::size_t>(j, "replicates");
    return run;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    json j;
    j["command"] = manifest.command;
    j["artifact_version"] = kArtifactVersion;
    j["config"] = manifest.config;
    j["config_path"] = manifest.config_path;
    j["out_dir"] = manifest.out_dir;
    j["base_seed"] = manifest.base_seed;
    j["wall_clock_seconds"] = manifest.wall_clock_seconds ? json(*manifest.wall_clock_seconds) : json(nullptr);
    for (const auto& [key, value] : manifest.extra.items()) j[key] = value;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace ssllab
