#include "hhgq/units_pulse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace hhgq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// int_0^tau cos(k s + phi) ds
double cos_integral(double k, double phi, double tau) {
    if (std::abs(k) < 1e-14) return tau * std::cos(phi);
    return (std::sin(k * tau + phi) - std::sin(phi)) / k;
}

// int_0^tau int_0^s cos(k u + phi) du ds
double cos_double_integral(double k, double phi, double tau) {
    if (std::abs(k) < 1e-14) return 0.5 * tau * tau * std::cos(phi);
    return (std::cos(phi) - std::cos(k * tau + phi)) / (k * k) - tau * std::sin(phi) / k;
}

// sin^2(pi tau / T) cos(w tau + phi) = 1/2 cos(w tau + phi)
//   - 1/4 cos((w + W) tau + phi) - 1/4 cos((w - W) tau + phi),  W = 2 pi / T
struct CarrierTerm {
    double weight;
    double k;
};

std::array<CarrierTerm, 3> carrier_terms(const PulseParams& p) {
    const double big_w = kTwoPi / p.duration();
    return {{{0.5, p.omega}, {-0.25, p.omega + big_w}, {-0.25, p.omega - big_w}}};
}

}  // namespace

std::string to_string(Envelope e) {
    switch (e) {
        case Envelope::Sin2: return "sin2";
    }
    return "unknown";
}

Envelope envelope_from_string(const std::string& s) {
    if (s == "sin2" || s == "Sin2") return Envelope::Sin2;
    throw std::invalid_argument("unsupported envelope '" + s + "'");
}

void PulseParams::validate() const {
    if (!(intensity_wcm2 > 0.0) || !std::isfinite(intensity_wcm2))
        throw std::domain_error("pulse intensity must be positive");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw std::domain_error("pulse omega must be positive");
    if (n_cycles < 1) throw std::domain_error("pulse needs at least one cycle");
    if (!std::isfinite(cep) || !std::isfinite(t_start)) throw std::domain_error("non-finite pulse parameter");
}

double PulseParams::amplitude() const { return intensity_to_field(intensity_wcm2); }

double PulseParams::duration() const { return n_cycles * kTwoPi / omega; }

double intensity_to_field(double intensity_wcm2) {
    if (!(intensity_wcm2 > 0.0)) throw std::domain_error("intensity must be positive");
    return std::sqrt(intensity_wcm2 / kAtomicIntensityWcm2);
}

double wavelength_to_omega(double lambda_nm) {
    if (!(lambda_nm > 0.0)) throw std::domain_error("wavelength must be positive");
    return kAtomicWavelengthNm / lambda_nm;
}

double field_at(const PulseParams& p, double t) {
    const double tau = t - p.t_start;
    const double T = p.duration();
    if (tau <= 0.0 || tau >= T) return 0.0;
    const double s = std::sin(std::numbers::pi * tau / T);
    return p.amplitude() * s * s * std::cos(p.omega * tau + p.cep);
}

double vector_potential_at(const PulseParams& p, double t) {
    const double T = p.duration();
    const double tau = std::clamp(t - p.t_start, 0.0, T);
    double acc = 0.0;
    for (const auto& term : carrier_terms(p)) acc += term.weight * cos_integral(term.k, p.cep, tau);
    return -p.amplitude() * acc;
}

double vector_potential_integral(const PulseParams& p, double t) {
    const double T = p.duration();
    const double tau = t - p.t_start;
    if (tau <= 0.0) return 0.0;
    const double inside = std::min(tau, T);
    double acc = 0.0;
    for (const auto& term : carrier_terms(p)) acc += term.weight * cos_double_integral(term.k, p.cep, inside);
    double value = -p.amplitude() * acc;
    if (tau > T) value += vector_potential_at(p, p.t_start + T) * (tau - T);
    return value;
}

Duration pulse_duration(const PulseParams& p) {
    p.validate();
    const double T = p.duration();
    return {T, T * kAtomicTimeFs};
}

double ponderomotive_energy(const PulseParams& p) {
    const double e0 = p.amplitude();
    return e0 * e0 / (4.0 * p.omega * p.omega);
}

PulseParams time_reversal_partner(const PulseParams& p) {
    PulseParams q = p;
    q.cep = wrap_two_pi(kTwoPi * p.n_cycles - p.cep + std::numbers::pi);
    return q;
}

double wrap_two_pi(double phi) {
    double r = std::fmod(phi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

nlohmann::json to_json(const PulseParams& p) {
    return {{"intensity_wcm2", p.intensity_wcm2}, {"omega", p.omega},
            {"cep", p.cep},                       {"n_cycles", p.n_cycles},
            {"envelope", to_string(p.envelope)},  {"t_start", p.t_start}};
}

}  // namespace hhgq
