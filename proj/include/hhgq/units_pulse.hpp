#pragma once

// Hartree atomic units and the classical driving field.
//
// The field is E(t) = E0 sin^2(pi (t - t0) / T) cos(omega (t - t0) + cep) on
// [t0, t0 + T], T = n_cycles 2 pi / omega, and zero elsewhere. The envelope
// multiplies the field itself; the vector potential A(t) = -int_{t0}^t E is
// evaluated in closed form.

#include <nlohmann/json.hpp>

#include <numbers>
#include <string>

namespace hhgq {

inline constexpr double kAtomicIntensityWcm2 = 3.50944758e16;
inline constexpr double kAtomicWavelengthNm = 45.5633526;
inline constexpr double kAtomicTimeFs = 0.02418884;

enum class Envelope { Sin2 };

std::string to_string(Envelope e);
Envelope envelope_from_string(const std::string& s);

struct PulseParams {
    double intensity_wcm2 = 4e14;
    double omega = 0.05695;
    double cep = 0.0;
    int n_cycles = 2;
    Envelope envelope = Envelope::Sin2;
    double t_start = 0.0;

    void validate() const;
    double amplitude() const;  ///< peak field E0 in a.u.
    double duration() const;   ///< T in a.u.
    double t_end() const { return t_start + duration(); }
};

double intensity_to_field(double intensity_wcm2);
double wavelength_to_omega(double lambda_nm);

double field_at(const PulseParams& p, double t);

/// A(t) = -int_{t_start}^{t} E(s) ds.
double vector_potential_at(const PulseParams& p, double t);

/// int_{t_start}^{t} A(s) ds; the excursion of a free electron born at rest.
double vector_potential_integral(const PulseParams& p, double t);

struct Duration {
    double au;
    double fs;
};
Duration pulse_duration(const PulseParams& p);

/// Ponderomotive energy at peak field, E0^2 / (4 omega^2).
double ponderomotive_energy(const PulseParams& p);

/// Partner pulse under sign flip plus time reversal: E'(T - t) = -E(t).
/// For the sin^2 envelope this maps cep -> pi - cep (mod 2 pi).
PulseParams time_reversal_partner(const PulseParams& p);

nlohmann::json to_json(const PulseParams& p);

/// Reduce an angle to [0, 2 pi).
double wrap_two_pi(double phi);

}  // namespace hhgq
