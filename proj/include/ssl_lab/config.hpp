#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssl_lab/experiments.hpp"

namespace ssllab {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// A sweep request: trial settings plus the swept axis.
struct RunConfig {
    TrialConfig trial;
    SweepAxis axis = SweepAxis::SNR;
    std::vector<double> grid{1.0};
    std::size_t replicates = 20;
    std::string preset;  // empty for custom runs
};

RunConfig from_preset(const SweepPlan& plan);

nlohmann::json to_json(const TrialConfig& cfg);
nlohmann::json to_json(const RunConfig& run);

/// Overlays the keys present in `j` onto `base`. Keys use the TrialConfig
/// field names; the model is {"theta_star": [...]} or {"s": .., "d": ..}.
/// Unknown keys and ill-typed values raise std::invalid_argument.
TrialConfig trial_from_json(const nlohmann::json& j, TrialConfig base = {});

/// As trial_from_json, plus "axis", "grid", "replicates" and "preset". A run
/// manifest is accepted too: its "config" object is used.
RunConfig run_from_json(const nlohmann::json& j, RunConfig base = {});

nlohmann::json read_json_file(const std::filesystem::path& path);

struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::string config_path;
    std::string out_dir;
    std::uint64_t base_seed = 0;
    std::optional<double> wall_clock_seconds;
    nlohmann::json extra = nlohmann::json::object();
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace ssllab
