#pragma once

// Time grids, dipole records and two-time correlation tables shared by the
// TDSE and SFA backends, plus the on-disk cache format for tables.

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <array>
#include <complex>
#include <filesystem>
#include <vector>

namespace hhgq {

using Index = Eigen::Index;
using cdouble = std::complex<double>;

struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    Index n_steps = 0;

    Index size() const { return n_steps + 1; }
    double time(Index k) const { return t0 + static_cast<double>(k) * dt; }
    double t1() const { return time(n_steps); }
    Eigen::VectorXd times() const;
};

/// Uniform grid on [t0, t1] whose step is the largest value <= dt_max that
/// divides the interval.
TimeGrid make_time_grid(double t0, double t1, double dt_max);

/// Dipole expectation on a uniform grid. The dipole operator is d = sign * x.
struct DipoleRecord {
    TimeGrid grid;
    Eigen::VectorXd d_mean;
    int dipole_sign = -1;
};

enum class AnchorInterpolation { Linear, Cubic };

std::string to_string(AnchorInterpolation a);
AnchorInterpolation anchor_interpolation_from_string(const std::string& s);

/// Lagrange stencil along the anchor axis: value(t) = sum_i w[i] f[first + i].
struct Stencil {
    Index first = 0;
    int count = 0;
    std::array<double, 4> w{};
};

Stencil anchor_stencil(const Eigen::VectorXd& anchor_times, double t, AnchorInterpolation kind);

/// Indices 0, s, 2s, ... into a grid of n points; the last point is always an anchor.
std::vector<Index> make_anchor_indices(Index n_points, int stride);

// C_c(t', t'') = <d(t') d(t'')> - <d(t')><d(t'')> with t' on the full probe
// grid (rows) and t'' on the anchor subgrid (columns).
struct CorrelationTable {
    TimeGrid grid;
    std::vector<Index> anchors;
    Eigen::MatrixXcd c_connected;
    AnchorInterpolation interpolation = AnchorInterpolation::Cubic;
    nlohmann::json meta = nlohmann::json::object();

    Index n_anchors() const { return static_cast<Index>(anchors.size()); }
    Eigen::VectorXd anchor_times() const;

    /// C_c(t_{anchor i}, t_{anchor j}) for any pair, using the stored triangle.
    cdouble anchor_pair(Index i, Index j) const;
};

/// Fill the entries with t' < t'' from the computed triangle t' >= t'' using
/// C(t', t'') = conj(C(t'', t')) and interpolation along the anchor axis.
void fill_by_conjugate_symmetry(CorrelationTable& table);

struct TableDiagnostics {
    double hermiticity_defect = 0.0;  ///< max |C(a,b) - conj(C(b,a))| over anchor pairs
    double min_diagonal = 0.0;        ///< min Re C(t,t) over anchors
    double max_diagonal_imag = 0.0;   ///< max |Im C(t,t)|
};

TableDiagnostics diagnose(const CorrelationTable& table);

// Cache files: <base>.bin holds the matrix as little-endian float64 (re, im)
// pairs in row-major order; <base>.meta.json holds shape, anchors, time grid,
// dipole record, provenance and the payload SHA-256.
void write_table(const std::filesystem::path& base, const CorrelationTable& table, const DipoleRecord& dipole);

struct LoadedTable {
    CorrelationTable table;
    DipoleRecord dipole;
};

/// Throws CacheError on missing files, shape mismatch or hash mismatch.
LoadedTable read_table(const std::filesystem::path& base);

/// Verifies payload hash without materializing the matrix.
bool verify_table(const std::filesystem::path& base, std::string* reason = nullptr);

}  // namespace hhgq
