#pragma once

// Subcommand implementations behind the `hhgq` executable.

#include "hhgq/app/config.hpp"
#include "hhgq/cv_gaussian.hpp"
#include "hhgq/spectral_moments.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hhgq::app {

using Warn = std::function<void(const std::string&)>;

/// Coupling actually used: config g in absolute mode, else g^2 B_sfa(0) N_at = 1.
double resolve_coupling(const RunConfig& cfg, const Warn& warn = {});

struct ScanReport {
    double g = 0.0;
    std::vector<SqueezeRecord> records;
    std::filesystem::path csv_path;
    std::filesystem::path svg_path;
};

/// Writes <output_dir>/scan.csv and scan.svg.
ScanReport run_scan(const RunConfig& cfg, const Warn& warn = {});

std::string scan_csv(const std::vector<SqueezeRecord>& records);
/// Parses the CSV written by scan_csv (only the columns it contains).
std::vector<SqueezeRecord> parse_scan_csv(const std::string& text);
/// dB against CEP with psi as color.
std::string scan_svg(const std::vector<SqueezeRecord>& records);

/// State D[alpha] D[chi_1] S(psi) |0> for one CEP and the plot it produces.
struct WignerPanel {
    SqueezeRecord record;
    cdouble alpha{};
    cv::GaussianState<double> state;
    std::complex<double> center{};
    cv::WignerGrid<double> grid;
    cv::Ellipse<double> ellipse;
    double lambda = 0.0;  ///< filter strength in units of P_psi^2, equals |r|
};

/// Filter exp(-|r| P_psi^2) on the vacuum followed by the two displacements.
cv::GaussianState<double> fundamental_mode_state(const SqueezeRecord& rec, cdouble alpha);

/// alpha = -i E0 / (2 g) e^{-i cep}: the coherent amplitude whose classical
/// field i g (alpha e^{-i w t} - c.c.) has the carrier cos(w t + cep).
cdouble laser_amplitude(const PulseParams& pulse, double cep, double g);

WignerPanel make_wigner_panel(const RunConfig& cfg, const SqueezeRecord& rec);

struct WignerFiles {
    std::filesystem::path csv, svg, json;
};

/// Computes (or loads) the record for each CEP and writes one panel per CEP.
std::vector<WignerFiles> run_wigner(const RunConfig& cfg, const std::vector<double>& ceps, const Warn& warn = {});

std::string wigner_csv(const cv::WignerGrid<double>& grid);
std::string wigner_svg(const cv::WignerGrid<double>& grid, const cv::GaussianState<double>& state,
                       const std::string& caption);
nlohmann::json state_json(const cv::GaussianState<double>& st);

enum class CheckStatus { Pass, Warn, Fail };
std::string to_string(CheckStatus s);

struct CheckRow {
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    std::string detail;
};

/// Dry-run grid checks for the configured backend.
std::vector<CheckRow> validate_config(const RunConfig& cfg);
void print_checks(std::ostream& os, const std::vector<CheckRow>& rows);

/// Highest harmonic order q with q w + I_p + U_p <= pi / dt.
int nyquist_harmonic(const PulseParams& pulse, double ip, double dt);
/// Classical cutoff (I_p + 3.17 U_p) / w.
double cutoff_harmonic(const PulseParams& pulse, double ip);

struct CacheEntry {
    std::string key;
    std::string backend;
    double cep = 0.0;
    Index rows = 0, cols = 0;
    std::uintmax_t bytes = 0;
    bool ok = false;
    std::string problem;
};

std::vector<CacheEntry> cache_list(const std::filesystem::path& dir);
/// Removes the given keys, or everything when keys is empty. Returns the count.
std::size_t cache_remove(const std::filesystem::path& dir, const std::vector<std::string>& keys);

/// Atomic text write (temporary file plus rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace hhgq::app
