#pragma once

// Strong-field-approximation backend. The bound-continuum transition element
// in the frame of the driven electron is
//     d_vg(t) = d(v + A(t)) exp(i S(v, t)),
//     S(v, t) = int_{t0}^{t} [ (v + A(s))^2 / 2 + I_p ] ds,
// with continuum-continuum couplings and ground-state depletion neglected.
// Momentum integrals are plain quadratures on a uniform v grid.

#include "hhgq/correlation.hpp"
#include "hhgq/units_pulse.hpp"

#include <Eigen/Core>

#include <span>

namespace hhgq {

enum class MatrixElementKind { Hydrogenic1s, Gaussian };

std::string to_string(MatrixElementKind k);
MatrixElementKind matrix_element_from_string(const std::string& s);

struct SfaParams {
    double ip = 0.5;
    MatrixElementKind matrix_element = MatrixElementKind::Hydrogenic1s;
    double gaussian_width = 1.0;
    double v_min = -4.5;
    double v_max = 4.5;
    Index n_v = 4096;
    double dt = 0.1;
    double tail_cycles = 0.0;

    void validate() const;
    double dv() const { return (v_max - v_min) / static_cast<double>(n_v - 1); }
    Eigen::VectorXd velocities() const;
    /// Real bound-free element d(p); the constant phase i of the 1s element
    /// cancels in every bilinear quantity and is restored in the dipole formula.
    double matrix_element_at(double p) const;
    nlohmann::json to_json() const;
};

// Field, A, int A and int A^2 sampled on the integration window.
struct PulseHistory {
    TimeGrid grid;
    Eigen::VectorXd field;
    Eigen::VectorXd a;
    Eigen::VectorXd a_int;
    Eigen::VectorXd a2_int;
};

PulseHistory pulse_history(const PulseParams& pulse, const TimeGrid& grid);

/// S(v, t_k) from the cumulative integrals.
double volkov_action(const PulseHistory& h, double ip, double v, Index k);

/// Throws std::invalid_argument when adjacent momenta can differ in action
/// phase by more than pi somewhere on the window.
void check_momentum_sampling(const SfaParams& params, const PulseHistory& h);

struct TransitionKernel {
    Eigen::VectorXd v;
    TimeGrid grid;
    std::vector<Index> time_indices;
    Eigen::MatrixXcd values;  ///< (v, selected time)
};

/// d_vg(t) on the momentum grid for the selected time indices (all when empty).
TransitionKernel transition_amplitude(const SfaParams& params, const PulseParams& pulse,
                                      std::span<const Index> time_indices = {});

TimeGrid sfa_window(const SfaParams& params, const PulseParams& pulse);

/// <d(t)> = -2 Im int dv d(v+A(t)) e^{-iS(v,t)} int_0^t dt' E(t') d(v+A(t')) e^{iS(v,t')}
DipoleRecord sfa_dipole_mean(const SfaParams& params, const PulseParams& pulse);

/// C_c(t', t'') = int dv d_vg(t')^* d_vg(t'') on the probe x anchor grid.
CorrelationTable sfa_connected_correlation(const SfaParams& params, const PulseParams& pulse, int anchor_stride,
                                           AnchorInterpolation interpolation = AnchorInterpolation::Cubic);

struct MomentMatrices {
    Eigen::MatrixXcd m;
    Eigen::MatrixXcd n;
};

/// M and N evaluated without a correlation table: each frequency component of
/// the kernel is formed per momentum and the momentum sum is taken last. N is
/// then a Gram matrix by construction. M is symmetrized as in the tabulated route.
MomentMatrices sfa_moments_direct(const SfaParams& params, const PulseParams& pulse, const Eigen::VectorXd& omegas);

}  // namespace hhgq
