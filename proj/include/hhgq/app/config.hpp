#pragma once

// Run configuration: INI file layered under `section.key=value` overrides.

#include "hhgq/scan.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hhgq::app {

enum class CouplingMode { Normalized, Absolute };

struct CouplingSpec {
    CouplingMode mode = CouplingMode::Normalized;
    double g = 0.0;  ///< used in absolute mode
    double n_at = 5e13;
};

struct WignerSpec {
    double half_width = 4.0;  ///< beta units, around the plot center
    Index n_points = 201;
    bool lab_frame = false;
    std::vector<double> ceps;  ///< batch panels
};

struct RunConfig {
    BackendConfig backend{};
    CouplingSpec coupling{};
    Index n_modes = 1;
    std::vector<double> cep_values;
    int jobs = 1;
    std::filesystem::path output_dir = "out";
    std::filesystem::path cache_dir = "cache";
    bool deterministic = true;
    WignerSpec wigner{};

    /// Throws ConfigError.
    void validate() const;
    nlohmann::json to_json() const;
};

/// Paper defaults: 4e14 W/cm^2, 800 nm, two-cycle sin^2 pulse, 16 CEPs on [0, 2 pi).
RunConfig default_config();

/// Defaults, then the file (if any), then overrides in order. Unknown
/// sections or keys are rejected. Throws ConfigError; with check = false the
/// final RunConfig::validate() is skipped so a report can list the problems.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::string>& overrides = {}, bool check = true);

/// Comma-separated list; entries may use pi, e.g. "0, pi/2, 3*pi/4, -pi".
std::vector<double> parse_angle_list(const std::string& text);

}  // namespace hhgq::app
