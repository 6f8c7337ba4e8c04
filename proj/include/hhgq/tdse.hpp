#pragma once

// 1D grid TDSE backend: imaginary-time ground states, Strang split-operator
// propagation in the length gauge, and two-time dipole correlations from
// auxiliary states x|psi(t'')> carried forward alongside |psi(t)>.
//
// Hamiltonian: H(t) = p^2/2 + V(x) - d E(t) with d = -x (electron charge -1).

#include "hhgq/correlation.hpp"
#include "hhgq/fft.hpp"
#include "hhgq/units_pulse.hpp"

#include <Eigen/Core>

#include <string>

namespace hhgq {

struct GridSpec {
    double x_min = -240.0;
    double x_max = 240.0;
    Index n_x = 8192;
    double dt = 0.05;
    double absorber_width = 40.0;
    double absorber_strength = 0.125;  ///< exponent of the cos mask

    void validate() const;
    double length() const { return x_max - x_min; }
    double dx() const { return length() / static_cast<double>(n_x); }
    Eigen::VectorXd x() const;
    Eigen::VectorXd momenta() const;  ///< FFT ordering
    nlohmann::json to_json() const;
};

struct PotentialSpec {
    enum class Kind { SoftCoreCoulomb, Harmonic };
    Kind kind = Kind::SoftCoreCoulomb;
    double parameter = 1.4142135623730951;  ///< soft-core a, or oscillator omega0

    static PotentialSpec soft_core(double a) { return {Kind::SoftCoreCoulomb, a}; }
    static PotentialSpec harmonic(double omega0) { return {Kind::Harmonic, omega0}; }

    void validate() const;
    double operator()(double x) const;
    nlohmann::json to_json() const;
};

struct WaveFunction {
    GridSpec grid;
    Eigen::VectorXcd psi;

    double norm() const;
    double expectation_x() const;
    cdouble overlap(const WaveFunction& other) const;  ///< <this|other>
};

struct GroundStateOptions {
    double tolerance = 1e-10;  ///< |dE| per imaginary-time step
    Index max_iterations = 400000;
    std::vector<double> tau_schedule{0.1, 0.02, 0.005};
    double filter_width = 25.0;  ///< Gaussian window (a.u.) of the real-time projection; 0 disables
};

struct GroundState {
    WaveFunction wf;
    double energy = 0.0;
    Index iterations = 0;
};

GroundState ground_state(const GridSpec& grid, const PotentialSpec& pot, const GroundStateOptions& opts = {});

/// Ground state of the field-free real-time propagator with step dt: the
/// imaginary-time state is projected with sum_n w(t_n) e^{i E t_n} U^n over a
/// Gaussian window, which removes excited admixtures and the splitting bias
/// that would otherwise show up as non-stationary terms in correlations.
GroundState stationary_ground_state(const GridSpec& grid, const PotentialSpec& pot, double dt,
                                    const GroundStateOptions& opts = {});

/// <H_A> for a state on the grid (no field).
double energy_expectation(const WaveFunction& wf, const PotentialSpec& pot);

// One Strang step: exp(-i V_E dt/2) exp(-i T dt) exp(-i V_E dt/2), with the
// field evaluated at the step midpoint and the absorbing mask applied once at
// the end of the step. prepare() fixes the field for the next step so several
// states can share the potential factors.
class SplitOperator {
public:
    SplitOperator(const GridSpec& grid, const PotentialSpec& pot, double dt, bool absorb = true);

    void prepare(double field_mid);
    void apply(Eigen::VectorXcd& psi) const;
    void step(Eigen::VectorXcd& psi, double field_mid) {
        prepare(field_mid);
        apply(psi);
    }

    const Eigen::VectorXd& x() const { return x_; }
    const Eigen::VectorXd& mask() const { return mask_; }
    double dt() const { return dt_; }

private:
    GridSpec grid_;
    double dt_;
    Fft1d fft_;
    Eigen::VectorXd x_;
    Eigen::VectorXd mask_;
    Eigen::VectorXcd potential_half_;  // exp(-i V dt/2)
    Eigen::VectorXcd kinetic_;         // exp(-i k^2 dt/2) / n
    Eigen::VectorXcd first_half_;
    Eigen::VectorXcd second_half_;     // includes the mask
    mutable Eigen::VectorXcd scratch_;
};

/// Propagate from t0 to t1 under the pulse. Requires (t1 - t0) to be an
/// integer multiple of grid.dt within rounding.
WaveFunction propagate(const WaveFunction& psi, const PotentialSpec& pot, const PulseParams& pulse, double t0,
                       double t1, bool absorb = true);

struct TdseOptions {
    double tail_cycles = 0.0;  ///< field-free extension of the window after the pulse
    int workers = 1;
    AnchorInterpolation interpolation = AnchorInterpolation::Cubic;
    GroundStateOptions ground{};
};

/// Integration window [t_start, t_start + T + tail] discretized with grid.dt.
TimeGrid pulse_window(const PulseParams& pulse, double dt_max, double tail_cycles = 0.0);

struct TdseRun {
    DipoleRecord dipole;
    CorrelationTable table;
    double absorbed_norm = 0.0;  ///< 1 - final norm of |psi>
    double ground_energy = 0.0;
};

DipoleRecord dipole_mean(const PotentialSpec& pot, const PulseParams& pulse, const GridSpec& grid,
                         const TdseOptions& opts = {});

TdseRun two_time_correlation(const PotentialSpec& pot, const PulseParams& pulse, const GridSpec& grid,
                             int anchor_stride, const TdseOptions& opts = {});

}  // namespace hhgq
