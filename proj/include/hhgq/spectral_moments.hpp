#pragma once

// Quantum-optical quantities from the engine outputs: coherent displacements
// chi_q, the moment matrices
//     M_qp = < D(w_q) D(w_p) >,   N_qp = < D^dagger(w_q) D(w_p) >,
//     D(w) = int dt e^{i w t} [ d(t) - <d(t)> ],
// and the squeezing numbers of the fundamental mode.

#include "hhgq/correlation.hpp"

#include <Eigen/Core>

#include <string>

namespace hhgq {

/// Frequencies q * omega for q = 1..n_modes.
Eigen::VectorXd harmonic_frequencies(double omega, Index n_modes);

/// int d(t) e^{i w t} dt by the composite trapezoid rule; times must be uniform.
cdouble fourier_integral(const Eigen::VectorXd& times, const Eigen::VectorXd& values, double omega);
cdouble fourier_integral(const DipoleRecord& d, double omega);

/// chi_q = g sqrt(q) int <d(t)> e^{i w_q t} dt, with q = 1, 2, ... the position in omegas.
Eigen::VectorXcd chi_displacements(const Eigen::VectorXd& times, const Eigen::VectorXd& d_mean,
                                   const Eigen::VectorXd& omegas, double g);
Eigen::VectorXcd chi_displacements(const DipoleRecord& d, const Eigen::VectorXd& omegas, double g);

struct SpectralMoments {
    Eigen::VectorXd omegas;
    Eigen::MatrixXcd m_matrix;
    Eigen::MatrixXcd n_matrix;
    Eigen::VectorXcd chi;
    bool coarse_anchor_warning = false;  ///< fewer than 8 anchors per period of the fastest probe
    double m_asymmetry = 0.0;            ///< max |M - M^T| before symmetrization
    double n_asymmetry = 0.0;            ///< max |N - N^dagger| before taking the Hermitian part
};

// The probe axis t' is integrated with the trapezoid rule on the full grid. The
// anchor axis t'' uses the table's interpolation and the trapezoid rule on the
// full grid, i.e. exact weights for the interpolant. M is symmetrized, which is
// the commuting-fluctuation approximation. N is replaced by its Hermitian part;
// the anti-Hermitian remainder is interpolation error of the anchor axis.
SpectralMoments d_correlation_matrix(const CorrelationTable& table, const Eigen::VectorXd& omegas);

/// Smallest eigenvalue of the Hermitian part of N.
double min_eigenvalue_hermitian(const Eigen::MatrixXcd& n);

struct SqueezeRecord {
    double cep = 0.0;
    double b = 0.0;    ///< |M_11|
    double psi = 0.0;  ///< arg(M_11)/2 in [0, pi)
    double r = 0.0;    ///< -g^2 B N_at
    double db = 0.0;   ///< 10 log10(exp(2 r^2))
    double g = 0.0;
    double n_at = 0.0;
    cdouble m11{};
    cdouble chi1{};
    std::string backend;
    double runtime_s = 0.0;
    bool cache_hit = false;

    /// Squeezing of the normalized filter exp(-|r| P_psi^2): 1/2 ln(1 + 2|r|).
    double effective_r() const;
};

SqueezeRecord squeeze_record(cdouble m11, double g, double n_at, double cep);

/// arg(z)/2 reduced to [0, pi).
double squeezing_phase(cdouble m11);

/// 10 log10(exp(2 r^2)), evaluated without forming the exponential.
double squeezing_db(double r);

}  // namespace hhgq
