#include "hhgq/sfa.hpp"

#include "hhgq/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hhgq {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

constexpr cdouble kI{0.0, 1.0};
constexpr Index kMomentumChunk = 256;

// trapezoid weights on a uniform grid
VectorXd trapezoid_weights(const TimeGrid& g) {
    VectorXd w = VectorXd::Constant(g.size(), g.dt);
    w[0] *= 0.5;
    w[g.size() - 1] *= 0.5;
    return w;
}

// Kernel row for one momentum across the whole window.
void kernel_row(const SfaParams& params, const PulseHistory& h, double v, VectorXcd& out) {
    const Index n = h.grid.size();
    out.resize(n);
    for (Index k = 0; k < n; ++k) {
        const double s = volkov_action(h, params.ip, v, k);
        out[k] = params.matrix_element_at(v + h.a[k]) * std::exp(kI * s);
    }
}

}  // namespace

std::string to_string(MatrixElementKind k) { return k == MatrixElementKind::Hydrogenic1s ? "hydrogenic1s" : "gaussian"; }

MatrixElementKind matrix_element_from_string(const std::string& s) {
    if (s == "hydrogenic1s") return MatrixElementKind::Hydrogenic1s;
    if (s == "gaussian") return MatrixElementKind::Gaussian;
    throw std::invalid_argument("unknown matrix element '" + s + "'");
}

void SfaParams::validate() const {
    if (!(ip > 0.0)) throw std::invalid_argument("sfa ip must be positive");
    if (n_v < 512) throw std::invalid_argument("sfa n_v must be >= 512");
    if (!(v_max > 0.0) || std::abs(v_min + v_max) > 1e-12 * v_max)
        throw std::invalid_argument("sfa momentum grid must be symmetric about 0");
    if (!(dt > 0.0)) throw std::invalid_argument("sfa dt must be positive");
    if (matrix_element == MatrixElementKind::Gaussian && !(gaussian_width > 0.0))
        throw std::invalid_argument("gaussian width must be positive");
    if (tail_cycles < 0.0) throw std::invalid_argument("tail_cycles must be >= 0");
}

VectorXd SfaParams::velocities() const { return VectorXd::LinSpaced(n_v, v_min, v_max); }

double SfaParams::matrix_element_at(double p) const {
    switch (matrix_element) {
        case MatrixElementKind::Hydrogenic1s: {
            const double kappa2 = 2.0 * ip;
            const double norm = std::pow(2.0, 3.5) * std::pow(kappa2, 1.25) / std::numbers::pi;
            const double den = p * p + kappa2;
            return norm * p / (den * den * den);
        }
        case MatrixElementKind::Gaussian: {
            const double w = gaussian_width;
            const double norm = std::sqrt(2.0 * w * w * w / std::sqrt(std::numbers::pi));
            return norm * p * std::exp(-0.5 * w * w * p * p);
        }
    }
    return 0.0;
}

nlohmann::json SfaParams::to_json() const {
    return {{"ip", ip},       {"matrix_element", to_string(matrix_element)},
            {"gaussian_width", gaussian_width},
            {"v_min", v_min}, {"v_max", v_max},
            {"n_v", n_v},     {"dt", dt},
            {"tail_cycles", tail_cycles}};
}

PulseHistory pulse_history(const PulseParams& pulse, const TimeGrid& grid) {
    PulseHistory h;
    h.grid = grid;
    const Index n = grid.size();
    h.field.resize(n);
    h.a.resize(n);
    h.a_int.resize(n);
    h.a2_int.resize(n);
    for (Index k = 0; k < n; ++k) {
        const double t = grid.time(k);
        h.field[k] = field_at(pulse, t);
        h.a[k] = vector_potential_at(pulse, t);
        h.a_int[k] = vector_potential_integral(pulse, t);
    }
    // int A^2 by composite Simpson with 8 panels per grid step
    constexpr int kPanels = 8;
    h.a2_int[0] = 0.0;
    for (Index k = 1; k < n; ++k) {
        const double ta = grid.time(k - 1);
        const double hs = grid.dt / kPanels;
        double acc = 0.0;
        for (int i = 0; i <= kPanels; ++i) {
            const double a = vector_potential_at(pulse, ta + i * hs);
            const double w = (i == 0 || i == kPanels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * a * a;
        }
        h.a2_int[k] = h.a2_int[k - 1] + acc * hs / 3.0;
    }
    return h;
}

double volkov_action(const PulseHistory& h, double ip, double v, Index k) {
    const double tau = h.grid.time(k) - h.grid.t0;
    return (0.5 * v * v + ip) * tau + v * h.a_int[k] + 0.5 * h.a2_int[k];
}

void check_momentum_sampling(const SfaParams& params, const PulseHistory& h) {
    // d/dv [S(v,t) - S(v,t')] = v (t - t') + int_{t'}^{t} A, bounded on the window
    const double span = h.grid.t1() - h.grid.t0;
    const double vmax = std::max(std::abs(params.v_min), std::abs(params.v_max));
    const double excursion = h.a_int.maxCoeff() - h.a_int.minCoeff();
    const double gradient = vmax * span + excursion;
    if (params.dv() * gradient > std::numbers::pi)
        throw std::invalid_argument("sfa momentum grid too coarse: adjacent-momentum phase step " +
                                    std::to_string(params.dv() * gradient) + " rad exceeds pi; raise n_v");
}

TimeGrid sfa_window(const SfaParams& params, const PulseParams& pulse) {
    params.validate();
    pulse.validate();
    const double tail = params.tail_cycles * 2.0 * std::numbers::pi / pulse.omega;
    return make_time_grid(pulse.t_start, pulse.t_end() + tail, params.dt);
}

TransitionKernel transition_amplitude(const SfaParams& params, const PulseParams& pulse,
                                      std::span<const Index> time_indices) {
    const TimeGrid grid = sfa_window(params, pulse);
    const PulseHistory h = pulse_history(pulse, grid);
    check_momentum_sampling(params, h);

    TransitionKernel out;
    out.v = params.velocities();
    out.grid = grid;
    if (time_indices.empty()) {
        out.time_indices.resize(static_cast<size_t>(grid.size()));
        for (Index k = 0; k < grid.size(); ++k) out.time_indices[static_cast<size_t>(k)] = k;
    } else {
        out.time_indices.assign(time_indices.begin(), time_indices.end());
    }
    const auto n_t = static_cast<Index>(out.time_indices.size());
    out.values.resize(params.n_v, n_t);
    for (Index i = 0; i < params.n_v; ++i) {
        const double v = out.v[i];
        for (Index c = 0; c < n_t; ++c) {
            const Index k = out.time_indices[static_cast<size_t>(c)];
            if (k < 0 || k >= grid.size()) throw std::out_of_range("time index outside the window");
            out.values(i, c) = params.matrix_element_at(v + h.a[k]) * std::exp(kI * volkov_action(h, params.ip, v, k));
        }
    }
    return out;
}

DipoleRecord sfa_dipole_mean(const SfaParams& params, const PulseParams& pulse) {
    const TimeGrid grid = sfa_window(params, pulse);
    const PulseHistory h = pulse_history(pulse, grid);
    check_momentum_sampling(params, h);
    const VectorXd v = params.velocities();
    const Index n = grid.size();
    const double dv = params.dv();

    DipoleRecord rec;
    rec.grid = grid;
    rec.d_mean = VectorXd::Zero(n);
    VectorXcd row;
    for (Index i = 0; i < params.n_v; ++i) {
        kernel_row(params, h, v[i], row);
        const double wv = (i == 0 || i == params.n_v - 1) ? 0.5 * dv : dv;
        cdouble cum = 0.0;
        cdouble prev = h.field[0] * row[0];
        for (Index k = 1; k < n; ++k) {
            const cdouble cur = h.field[k] * row[k];
            cum += 0.5 * grid.dt * (prev + cur);
            prev = cur;
            rec.d_mean[k] += -2.0 * wv * std::imag(std::conj(row[k]) * cum);
        }
    }
    for (Index k = 0; k < n; ++k)
        if (!std::isfinite(rec.d_mean[k])) throw NumericError("non-finite SFA dipole at step " + std::to_string(k));
    return rec;
}

CorrelationTable sfa_connected_correlation(const SfaParams& params, const PulseParams& pulse, int anchor_stride,
                                           AnchorInterpolation interpolation) {
    const TimeGrid grid = sfa_window(params, pulse);
    const PulseHistory h = pulse_history(pulse, grid);
    check_momentum_sampling(params, h);
    const VectorXd v = params.velocities();
    const Index n = grid.size();
    const double dv = params.dv();

    CorrelationTable table;
    table.grid = grid;
    table.anchors = make_anchor_indices(n, anchor_stride);
    table.interpolation = interpolation;
    const Index n_a = table.n_anchors();
    table.c_connected = MatrixXcd::Zero(n, n_a);

    // Chunked over momenta: C += K_chunk^H diag(w) K_chunk(:, anchors)
    MatrixXcd chunk(kMomentumChunk, n);
    MatrixXcd chunk_anchor(kMomentumChunk, n_a);
    VectorXcd row;
    for (Index start = 0; start < params.n_v; start += kMomentumChunk) {
        const Index len = std::min(kMomentumChunk, params.n_v - start);
        for (Index r = 0; r < len; ++r) {
            const Index i = start + r;
            kernel_row(params, h, v[i], row);
            const double wv = (i == 0 || i == params.n_v - 1) ? 0.5 * dv : dv;
            chunk.row(r) = row.transpose();
            for (Index j = 0; j < n_a; ++j) chunk_anchor(r, j) = wv * row[table.anchors[static_cast<size_t>(j)]];
        }
        table.c_connected.noalias() += chunk.topRows(len).adjoint() * chunk_anchor.topRows(len);
    }
    if (!table.c_connected.allFinite()) throw NumericError("non-finite SFA correlation table");

    table.meta = {{"backend", "sfa"},
                  {"sfa", params.to_json()},
                  {"pulse", to_json(pulse)},
                  {"anchor_stride", anchor_stride},
                  {"dipole_convention", "d = -x"}};
    return table;
}

MomentMatrices sfa_moments_direct(const SfaParams& params, const PulseParams& pulse, const VectorXd& omegas) {
    const TimeGrid grid = sfa_window(params, pulse);
    const PulseHistory h = pulse_history(pulse, grid);
    check_momentum_sampling(params, h);
    const VectorXd v = params.velocities();
    const VectorXd w = trapezoid_weights(grid);
    const Index n_q = omegas.size();
    const double dv = params.dv();

    // phases e^{+i w_q t} and e^{-i w_q t} weighted by the trapezoid rule
    MatrixXcd plus(grid.size(), n_q), minus(grid.size(), n_q);
    for (Index k = 0; k < grid.size(); ++k)
        for (Index q = 0; q < n_q; ++q) {
            plus(k, q) = w[k] * std::exp(kI * (omegas[q] * grid.time(k)));
            minus(k, q) = w[k] * std::exp(-kI * (omegas[q] * grid.time(k)));
        }

    MomentMatrices out{MatrixXcd::Zero(n_q, n_q), MatrixXcd::Zero(n_q, n_q)};
    VectorXcd row;
    for (Index i = 0; i < params.n_v; ++i) {
        kernel_row(params, h, v[i], row);
        const double wv = (i == 0 || i == params.n_v - 1) ? 0.5 * dv : dv;
        const Eigen::RowVectorXcd g_plus = row.transpose() * plus;    // G(w_q)
        const Eigen::RowVectorXcd g_minus = row.transpose() * minus;  // G(-w_q)
        out.m.noalias() += wv * (g_minus.adjoint() * g_plus);
        out.n.noalias() += wv * (g_plus.adjoint() * g_plus);
    }
    out.m = (0.5 * (out.m + out.m.transpose())).eval();
    return out;
}

}  // namespace hhgq
