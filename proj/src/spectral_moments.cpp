#include "hhgq/spectral_moments.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hhgq {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {
constexpr cdouble kI{0.0, 1.0};
}

VectorXd harmonic_frequencies(double omega, Index n_modes) {
    if (n_modes < 1) throw std::invalid_argument("need at least one mode");
    VectorXd w(n_modes);
    for (Index q = 0; q < n_modes; ++q) w[q] = static_cast<double>(q + 1) * omega;
    return w;
}

cdouble fourier_integral(const VectorXd& times, const VectorXd& values, double omega) {
    const Index n = times.size();
    if (n != values.size()) throw std::invalid_argument("times and values differ in length");
    if (n < 2) throw std::invalid_argument("need at least two samples");
    const double h = times[1] - times[0];
    for (Index k = 1; k < n; ++k)
        if (std::abs((times[k] - times[k - 1]) - h) > 1e-9 * std::abs(h))
            throw std::invalid_argument("fourier integral requires a uniform time grid");
    cdouble acc = 0.0;
    for (Index k = 0; k < n; ++k) {
        const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
        acc += w * values[k] * std::exp(kI * (omega * times[k]));
    }
    return acc * h;
}

cdouble fourier_integral(const DipoleRecord& d, double omega) {
    return fourier_integral(d.grid.times(), d.d_mean, omega);
}

VectorXcd chi_displacements(const VectorXd& times, const VectorXd& d_mean, const VectorXd& omegas, double g) {
    VectorXcd chi(omegas.size());
    for (Index q = 0; q < omegas.size(); ++q)
        chi[q] = g * std::sqrt(static_cast<double>(q + 1)) * fourier_integral(times, d_mean, omegas[q]);
    return chi;
}

VectorXcd chi_displacements(const DipoleRecord& d, const VectorXd& omegas, double g) {
    return chi_displacements(d.grid.times(), d.d_mean, omegas, g);
}

SpectralMoments d_correlation_matrix(const CorrelationTable& table, const VectorXd& omegas) {
    const TimeGrid& grid = table.grid;
    const Index n_t = grid.size();
    const Index n_a = table.n_anchors();
    const Index n_q = omegas.size();
    if (table.c_connected.rows() != n_t || table.c_connected.cols() != n_a)
        throw std::invalid_argument("correlation table shape does not match its grid");
    if (n_q < 1) throw std::invalid_argument("no probe frequencies");

    // trapezoid weights times e^{+-i w t} on the probe grid
    MatrixXcd plus(n_t, n_q), minus(n_t, n_q);
    for (Index k = 0; k < n_t; ++k) {
        const double h = (k == 0 || k == n_t - 1) ? 0.5 * grid.dt : grid.dt;
        for (Index q = 0; q < n_q; ++q) {
            const double phase = omegas[q] * grid.time(k);
            plus(k, q) = h * std::exp(kI * phase);
            minus(k, q) = h * std::exp(-kI * phase);
        }
    }

    // anchor-axis weights: W(a, p) = sum_k h_k e^{i w_p t_k} lambda_a(t_k)
    const VectorXd at = table.anchor_times();
    MatrixXcd anchor_w = MatrixXcd::Zero(n_a, n_q);
    for (Index k = 0; k < n_t; ++k) {
        const Stencil s = anchor_stencil(at, grid.time(k), table.interpolation);
        for (int i = 0; i < s.count; ++i) anchor_w.row(s.first + i) += s.w[static_cast<size_t>(i)] * plus.row(k);
    }

    const MatrixXcd inner = table.c_connected * anchor_w;  // (t', p)
    MatrixXcd m = plus.transpose() * inner;
    SpectralMoments out;
    out.omegas = omegas;
    const MatrixXcd n = minus.transpose() * inner;
    out.n_asymmetry = (n - n.adjoint()).cwiseAbs().maxCoeff();
    out.n_matrix = 0.5 * (n + n.adjoint());
    out.m_asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
    out.m_matrix = 0.5 * (m + m.transpose());

    double max_gap = 0.0;
    for (Index j = 1; j < n_a; ++j) max_gap = std::max(max_gap, at[j] - at[j - 1]);
    const double fastest_period = 2.0 * std::numbers::pi / omegas.cwiseAbs().maxCoeff();
    out.coarse_anchor_warning = n_a < 2 || fastest_period / max_gap < 8.0;
    return out;
}

double min_eigenvalue_hermitian(const MatrixXcd& n) {
    const MatrixXcd h = 0.5 * (n + n.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double squeezing_phase(cdouble m11) {
    double psi = 0.5 * std::arg(m11);
    if (psi < 0.0) psi += std::numbers::pi;
    if (psi >= std::numbers::pi) psi -= std::numbers::pi;
    return psi;
}

double squeezing_db(double r) { return 20.0 * r * r / std::numbers::ln10; }

double SqueezeRecord::effective_r() const { return 0.5 * std::log1p(2.0 * std::abs(r)); }

SqueezeRecord squeeze_record(cdouble m11, double g, double n_at, double cep) {
    if (g < 0.0 || n_at < 0.0) throw std::invalid_argument("g and n_at must be non-negative");
    SqueezeRecord rec;
    rec.cep = cep;
    rec.m11 = m11;
    rec.b = std::abs(m11);
    rec.psi = squeezing_phase(m11);
    rec.g = g;
    rec.n_at = n_at;
    rec.r = -g * g * rec.b * n_at;
    rec.db = squeezing_db(rec.r);
    return rec;
}

}  // namespace hhgq
