#include "hhgq/tdse.hpp"

#include "hhgq/errors.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace hhgq {

using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

constexpr cdouble kI{0.0, 1.0};

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

double sum_abs2(const VectorXcd& v) { return v.squaredNorm(); }

}  // namespace

void GridSpec::validate() const {
    if (!(x_max > x_min)) throw std::invalid_argument("grid needs x_max > x_min");
    if (n_x < 256 || !is_power_of_two(n_x)) throw std::invalid_argument("grid n_x must be a power of two >= 256");
    if (!(dt > 0.0)) throw std::invalid_argument("grid dt must be positive");
    if (absorber_width < 0.0 || !(absorber_width < length() / 4.0))
        throw std::invalid_argument("absorber width must be below a quarter of the box");
    if (absorber_strength < 0.0) throw std::invalid_argument("absorber strength must be non-negative");
}

VectorXd GridSpec::x() const {
    VectorXd out(n_x);
    const double h = dx();
    for (Index i = 0; i < n_x; ++i) out[i] = x_min + static_cast<double>(i) * h;
    return out;
}

VectorXd GridSpec::momenta() const {
    VectorXd k(n_x);
    const double dk = 2.0 * std::numbers::pi / length();
    for (Index j = 0; j < n_x; ++j) k[j] = dk * static_cast<double>(j < n_x / 2 ? j : j - n_x);
    return k;
}

nlohmann::json GridSpec::to_json() const {
    return {{"x_min", x_min},
            {"x_max", x_max},
            {"n_x", n_x},
            {"dt", dt},
            {"absorber_width", absorber_width},
            {"absorber_strength", absorber_strength}};
}

void PotentialSpec::validate() const {
    if (!(parameter > 0.0)) throw std::invalid_argument("potential parameter must be positive");
}

double PotentialSpec::operator()(double x) const {
    switch (kind) {
        case Kind::SoftCoreCoulomb: return -1.0 / std::sqrt(x * x + parameter * parameter);
        case Kind::Harmonic: return 0.5 * parameter * parameter * x * x;
    }
    return 0.0;
}

nlohmann::json PotentialSpec::to_json() const {
    if (kind == Kind::SoftCoreCoulomb) return {{"kind", "soft_core"}, {"a", parameter}};
    return {{"kind", "harmonic"}, {"omega0", parameter}};
}

double WaveFunction::norm() const { return std::sqrt(sum_abs2(psi) * grid.dx()); }

double WaveFunction::expectation_x() const {
    const VectorXd x = grid.x();
    return (psi.cwiseAbs2().array() * x.array()).sum() * grid.dx();
}

cdouble WaveFunction::overlap(const WaveFunction& other) const { return psi.dot(other.psi) * grid.dx(); }

double energy_expectation(const WaveFunction& wf, const PotentialSpec& pot) {
    const auto& g = wf.grid;
    const VectorXd x = g.x();
    const VectorXd k = g.momenta();
    VectorXcd phi = wf.psi;
    Fft1d fft(g.n_x);
    fft.forward(phi);
    const double kin = (phi.cwiseAbs2().array() * k.array().square()).sum() / (2.0 * sum_abs2(phi));
    double pe = 0.0;
    for (Index i = 0; i < g.n_x; ++i) pe += pot(x[i]) * std::norm(wf.psi[i]);
    return kin + pe / sum_abs2(wf.psi);
}

GroundState ground_state(const GridSpec& grid, const PotentialSpec& pot, const GroundStateOptions& opts) {
    grid.validate();
    pot.validate();
    const VectorXd x = grid.x();
    const VectorXd k = grid.momenta();
    const double n = static_cast<double>(grid.n_x);
    Fft1d fft(grid.n_x);

    GroundState out;
    out.wf.grid = grid;
    out.wf.psi = (-0.5 * x.array().square()).exp().cast<cdouble>();

    constexpr Index kCheckEvery = 5;
    for (const double tau : opts.tau_schedule) {
        VectorXcd half_v(grid.n_x), kin(grid.n_x);
        for (Index i = 0; i < grid.n_x; ++i) {
            half_v[i] = std::exp(-0.5 * tau * pot(x[i]));
            kin[i] = std::exp(-0.5 * tau * k[i] * k[i]) / n;
        }
        double e_prev = energy_expectation(out.wf, pot);
        bool converged = false;
        Index local = 0;
        while (out.iterations < opts.max_iterations) {
            for (Index s = 0; s < kCheckEvery; ++s) {
                out.wf.psi.array() *= half_v.array();
                fft.forward(out.wf.psi);
                out.wf.psi.array() *= kin.array();
                fft.backward(out.wf.psi);
                out.wf.psi.array() *= half_v.array();
                out.wf.psi /= out.wf.norm();
            }
            out.iterations += kCheckEvery;
            local += kCheckEvery;
            const double e = energy_expectation(out.wf, pot);
            if (!std::isfinite(e)) throw NumericError("ground state relaxation produced a non-finite energy");
            const double de = std::abs(e - e_prev) / kCheckEvery;
            e_prev = e;
            if (de < opts.tolerance && local >= 4 * kCheckEvery) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw NumericError("ground state did not converge after " + std::to_string(out.iterations) +
                               " iterations (tau = " + std::to_string(tau) + ")");
    }
    // fix the global phase so the state is real and positive at its maximum
    Index imax = 0;
    out.wf.psi.cwiseAbs2().maxCoeff(&imax);
    out.wf.psi *= std::abs(out.wf.psi[imax]) / out.wf.psi[imax];
    out.wf.psi /= out.wf.norm();
    out.energy = energy_expectation(out.wf, pot);
    return out;
}

GroundState stationary_ground_state(const GridSpec& grid, const PotentialSpec& pot, double dt,
                                    const GroundStateOptions& opts) {
    GroundState gs = ground_state(grid, pot, opts);
    if (!(opts.filter_width > 0.0)) return gs;
    SplitOperator op(grid, pot, dt, false);
    op.prepare(0.0);
    VectorXcd psi = gs.wf.psi;
    VectorXcd probe = psi;
    op.apply(probe);
    const double e = -std::arg(psi.dot(probe)) / dt;

    const Index half = static_cast<Index>(std::ceil(5.0 * opts.filter_width / dt));
    VectorXcd acc = VectorXcd::Zero(psi.size());
    for (Index n = 0; n <= 2 * half; ++n) {
        if (n > 0) op.apply(psi);
        const double s = static_cast<double>(n - half) * dt / opts.filter_width;
        acc += (std::exp(-0.5 * s * s) * std::exp(kI * (e * static_cast<double>(n) * dt))) * psi;
    }
    gs.wf.psi = acc;
    Index imax = 0;
    gs.wf.psi.cwiseAbs2().maxCoeff(&imax);
    gs.wf.psi *= std::abs(gs.wf.psi[imax]) / gs.wf.psi[imax];
    gs.wf.psi /= gs.wf.norm();
    gs.energy = energy_expectation(gs.wf, pot);
    return gs;
}

SplitOperator::SplitOperator(const GridSpec& grid, const PotentialSpec& pot, double dt, bool absorb)
    : grid_(grid), dt_(dt), fft_(grid.n_x), x_(grid.x()) {
    grid.validate();
    pot.validate();
    const Index n = grid.n_x;
    const VectorXd k = grid.momenta();
    mask_ = VectorXd::Ones(n);
    if (absorb && grid.absorber_width > 0.0 && grid.absorber_strength > 0.0) {
        const double w = grid.absorber_width;
        for (Index i = 0; i < n; ++i) {
            const double depth = std::max(grid.x_min + w - x_[i], x_[i] - (grid.x_max - w));
            if (depth > 0.0) {
                const double c = std::cos(0.5 * std::numbers::pi * std::min(depth / w, 1.0));
                mask_[i] = std::pow(std::max(c, 0.0), grid.absorber_strength);
            }
        }
    }
    potential_half_.resize(n);
    kinetic_.resize(n);
    for (Index i = 0; i < n; ++i) {
        potential_half_[i] = std::exp(-kI * (0.5 * dt * pot(x_[i])));
        kinetic_[i] = std::exp(-kI * (0.5 * dt * k[i] * k[i])) / static_cast<double>(n);
    }
    first_half_ = potential_half_;
    second_half_ = potential_half_.array() * mask_.array().cast<cdouble>();
    scratch_.resize(n);
}

void SplitOperator::prepare(double field_mid) {
    // exp(-i x E dt/2) on the uniform grid as a geometric progression
    const double theta = 0.5 * dt_ * field_mid;
    const cdouble ratio = std::exp(-kI * (theta * grid_.dx()));
    cdouble phase = std::exp(-kI * (theta * grid_.x_min));
    for (Index i = 0; i < x_.size(); ++i) {
        first_half_[i] = potential_half_[i] * phase;
        second_half_[i] = first_half_[i] * mask_[i];
        phase *= ratio;
    }
}

void SplitOperator::apply(VectorXcd& psi) const {
    psi.array() *= first_half_.array();
    fft_.forward(psi);
    psi.array() *= kinetic_.array();
    fft_.backward(psi);
    psi.array() *= second_half_.array();
}

WaveFunction propagate(const WaveFunction& psi, const PotentialSpec& pot, const PulseParams& pulse, double t0,
                       double t1, bool absorb) {
    if (t1 < t0) throw std::invalid_argument("propagate needs t1 >= t0");
    const double dt = psi.grid.dt;
    const double span = t1 - t0;
    const auto steps = static_cast<Index>(std::llround(span / dt));
    if (std::abs(static_cast<double>(steps) * dt - span) > 1e-9 * std::max(1.0, span))
        throw std::invalid_argument("dt does not divide the propagation interval");

    SplitOperator op(psi.grid, pot, dt, absorb);
    WaveFunction out = psi;
    for (Index s = 0; s < steps; ++s) {
        op.step(out.psi, field_at(pulse, t0 + (static_cast<double>(s) + 0.5) * dt));
        if ((s & 255) == 255 || s + 1 == steps) {
            if (!std::isfinite(sum_abs2(out.psi)))
                throw NumericError("non-finite wavefunction at propagation step " + std::to_string(s));
        }
    }
    return out;
}

TimeGrid pulse_window(const PulseParams& pulse, double dt_max, double tail_cycles) {
    pulse.validate();
    if (tail_cycles < 0.0) throw std::invalid_argument("tail_cycles must be >= 0");
    const double tail = tail_cycles * 2.0 * std::numbers::pi / pulse.omega;
    return make_time_grid(pulse.t_start, pulse.t_end() + tail, dt_max);
}

namespace {

nlohmann::json run_meta(const PotentialSpec& pot, const PulseParams& pulse, const GridSpec& grid, int stride) {
    return {{"backend", "tdse"},
            {"potential", pot.to_json()},
            {"grid", grid.to_json()},
            {"pulse", to_json(pulse)},
            {"anchor_stride", stride},
            {"dipole_convention", "d = -x"}};
}

}  // namespace

DipoleRecord dipole_mean(const PotentialSpec& pot, const PulseParams& pulse, const GridSpec& grid,
                         const TdseOptions& opts) {
    const TimeGrid tg = pulse_window(pulse, grid.dt, opts.tail_cycles);
    const GroundState gs = stationary_ground_state(grid, pot, tg.dt, opts.ground);
    SplitOperator op(grid, pot, tg.dt);
    DipoleRecord rec;
    rec.grid = tg;
    rec.d_mean.resize(tg.size());
    VectorXcd psi = gs.wf.psi;
    const VectorXd& x = op.x();
    const double dx = grid.dx();
    for (Index k = 0; k < tg.size(); ++k) {
        if (k > 0) op.step(psi, field_at(pulse, tg.time(k - 1) + 0.5 * tg.dt));
        rec.d_mean[k] = -(psi.cwiseAbs2().array() * x.array()).sum() * dx;
        if (!std::isfinite(rec.d_mean[k])) throw NumericError("non-finite dipole at step " + std::to_string(k));
    }
    return rec;
}

TdseRun two_time_correlation(const PotentialSpec& pot, const PulseParams& pulse, const GridSpec& grid,
                             int anchor_stride, const TdseOptions& opts) {
    const TimeGrid tg = pulse_window(pulse, grid.dt, opts.tail_cycles);
    const GroundState gs = stationary_ground_state(grid, pot, tg.dt, opts.ground);
    const std::vector<Index> anchors = make_anchor_indices(tg.size(), anchor_stride);
    const Index n_anchor = static_cast<Index>(anchors.size());
    const int n_workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(n_anchor)));

    TdseRun run;
    run.ground_energy = gs.energy;
    run.dipole.grid = tg;
    run.dipole.d_mean.resize(tg.size());
    run.table.grid = tg;
    run.table.anchors = anchors;
    run.table.interpolation = opts.interpolation;
    run.table.c_connected = Eigen::MatrixXcd::Zero(tg.size(), n_anchor);
    Eigen::VectorXd xmean(tg.size());

    // Worker w owns anchor columns j with j % n_workers == w and carries its own
    // copy of |psi(t)>; every worker performs identical arithmetic on |psi>, so
    // results do not depend on the worker count.
    auto work = [&](int w) {
        SplitOperator op(grid, pot, tg.dt);
        const VectorXd& x = op.x();
        const double dx = grid.dx();
        VectorXcd psi = gs.wf.psi;
        VectorXcd y(grid.n_x);
        std::vector<VectorXcd> aux;
        std::vector<Index> cols;
        Index next = w;  // next owned anchor column
        for (Index k = 0; k < tg.size(); ++k) {
            if (k > 0) {
                op.prepare(field_at(pulse, tg.time(k - 1) + 0.5 * tg.dt));
                op.apply(psi);
                for (auto& a : aux) op.apply(a);
            }
            const double xm = (psi.cwiseAbs2().array() * x.array()).sum() * dx;
            if (!std::isfinite(xm)) throw NumericError("non-finite wavefunction at step " + std::to_string(k));
            if (w == 0) {
                xmean[k] = xm;
                run.dipole.d_mean[k] = -xm;
            }
            if (next < n_anchor && anchors[static_cast<size_t>(next)] == k) {
                aux.emplace_back(psi.array() * x.array().cast<cdouble>());
                cols.push_back(next);
                next += n_workers;
            }
            y = psi.conjugate().array() * (x.array() * dx).cast<cdouble>();
            for (size_t i = 0; i < aux.size(); ++i) {
                run.table.c_connected(k, cols[i]) = (y.array() * aux[i].array()).sum();
            }
            if ((k & 255) == 255) {
                for (const auto& a : aux)
                    if (!std::isfinite(a.squaredNorm()))
                        throw NumericError("non-finite auxiliary state at step " + std::to_string(k));
            }
        }
        if (w == 0) run.absorbed_norm = 1.0 - psi.squaredNorm() * dx;
    };

    if (n_workers == 1) {
        work(0);
    } else {
        std::vector<std::exception_ptr> errors(static_cast<size_t>(n_workers));
        {
            std::vector<std::jthread> threads;
            for (int w = 0; w < n_workers; ++w)
                threads.emplace_back([&, w] {
                    try {
                        work(w);
                    } catch (...) {
                        errors[static_cast<size_t>(w)] = std::current_exception();
                    }
                });
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    for (Index j = 0; j < n_anchor; ++j) {
        const Index a = anchors[static_cast<size_t>(j)];
        for (Index k = a; k < tg.size(); ++k) run.table.c_connected(k, j) -= xmean[k] * xmean[a];
    }
    fill_by_conjugate_symmetry(run.table);

    run.table.meta = run_meta(pot, pulse, grid, anchor_stride);
    run.table.meta["absorbed_norm"] = run.absorbed_norm;
    run.table.meta["absorbed_norm_flag"] = run.absorbed_norm > 0.1;
    run.table.meta["ground_energy"] = gs.energy;
    return run;
}

}  // namespace hhgq
