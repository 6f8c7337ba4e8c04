#pragma once

// Backend selection, content-addressed caching of correlation tables and CEP
// scans producing one SqueezeRecord per carrier-envelope phase.

#include "hhgq/correlation.hpp"
#include "hhgq/sfa.hpp"
#include "hhgq/spectral_moments.hpp"
#include "hhgq/tdse.hpp"
#include "hhgq/units_pulse.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hhgq {

enum class Backend { Tdse, Sfa, Oscillator };
std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct OscillatorSpec {
    double omega0 = 0.5;
    GridSpec grid{-30.0, 30.0, 1024, 0.02, 0.0, 0.0};
};

struct BackendConfig {
    Backend backend = Backend::Sfa;
    PulseParams pulse{};
    GridSpec grid{};
    double soft_core_a = 1.4142135623730951;
    OscillatorSpec oscillator{};
    SfaParams sfa{};
    int anchor_stride = 20;
    AnchorInterpolation interpolation = AnchorInterpolation::Cubic;
    double tail_cycles = 0.0;  ///< post-pulse window for the grid backends
    GroundStateOptions ground{};
    int workers = 1;  ///< threads per table; does not change results

    void validate() const;
    PotentialSpec potential() const;
    /// Every numerically relevant input for the given CEP, canonical key order.
    nlohmann::json physics_json(double cep) const;
    /// SHA-256 of physics_json(cep).dump().
    std::string cache_key(double cep) const;
};

struct BackendResult {
    DipoleRecord dipole;
    CorrelationTable table;
    bool cache_hit = false;
    double runtime_s = 0.0;
    std::vector<std::string> warnings;
};

/// Compute or load the table for one CEP. Corrupt cache entries are
/// recomputed and overwritten with a warning.
BackendResult compute_backend(const BackendConfig& cfg, double cep,
                              const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

struct ScanOptions {
    double g = 0.0;
    double n_at = 5e13;
    Index n_modes = 1;
    int jobs = 1;  ///< concurrent CEP points
    std::optional<std::filesystem::path> cache_dir;
    std::function<void(const std::string&)> warn;  ///< optional sink for warnings
};

struct ScanPoint {
    SqueezeRecord record;
    SpectralMoments moments;
};

/// Records in input order; each CEP gets its own table.
std::vector<ScanPoint> cep_scan(const BackendConfig& cfg, const std::vector<double>& ceps, const ScanOptions& opts);

/// g with g^2 B N_at = 1, B from the sfa backend at cep = 0 on cfg's pulse.
double normalized_coupling(const BackendConfig& cfg, double n_at,
                           const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

}  // namespace hhgq
