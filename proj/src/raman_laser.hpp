#ifndef RAMANMAG_RAMAN_LASER_HPP
#define RAMANMAG_RAMAN_LASER_HPP

#include <vector>

#include "constants.hpp"
#include "nv_dynamics.hpp"

namespace ramanmag {

// Microwave drive settings without the optical pump rate; the laser layer
// derives the pump rate from the incident intensity. `rabi` is the coherent
// coupling strength between the two ground spin states: the population Rabi
// coefficient of the five-level model is twice this value.
struct MwDrive {
    double rabi = 0.0;
    double detuning = 0.0;
    double dephasing = 1e6;
};

// Drive vector of the five-level model for a given MW setting and pump rate.
DriveField nv_drive(const MwDrive& mw, double pump_rate_hz);

// Fabry-Perot Raman cavity fully filled with the NV-doped crystal. SI units.
struct CavitySystem {
    double length_m = 100e-6;
    double waist_m = 5e-6;
    double loss_rate_hz = 75e6;                 // kappa_r, total mirror loss
    double refractive_index = 2.4;
    double raman_gain_m_per_w = 14.75 * cm_per_gw_to_m_per_w;
    double pump_frequency_hz = speed_of_light / 620e-9;
    double raman_frequency_hz = speed_of_light / 676e-9;
    NVEnsemble ensemble;

    double beam_area_m2() const { return pi * waist_m * waist_m; }
};

void validate(const CavitySystem& sys);

// One self-consistent solution of the pump/intra-cavity relation.
struct LaserCurvePoint {
    double pump_power_w = 0.0;
    double intracavity_intensity_w_m2 = 0.0;
    double output_power_w = 0.0;
    double beta_per_m = 0.0;
    double pump_rate_hz = 0.0;
};

// Lambda_p = sigma * I / (h * nu_p), evaluated at the incident pump intensity
// (the maximum the pump reaches inside the cavity).
double pump_rate_from_intensity(const CavitySystem& sys, double pump_intensity_w_m2);

// Pump absorption per metre at the given incident intensity: pump rate ->
// steady state -> ground population -> sigma*D*rho_g. The zero-pump,
// zero-drive corner is the rho_g = 1 limit, not the degenerate linear system.
double beta_at_pump(const CavitySystem& sys, const NVRates& rates, const MwDrive& mw,
                    double pump_intensity_w_m2);

// Incident pump intensity required to sustain intra-cavity Raman intensity
// I_r against mirror loss and NV absorption beta. Monotone in both arguments;
// the I_r -> 0, beta -> 0 limits are evaluated analytically.
double pump_intensity_for_intracavity(const CavitySystem& sys, double intracavity_w_m2,
                                      double beta_per_m);

// Power leaving through the mirrors for a given intra-cavity intensity.
double output_power(const CavitySystem& sys, double intracavity_w_m2);

// Laser output over a grid of incident pump powers. Below threshold the
// intra-cavity intensity is exactly zero (no spontaneous seeding).
std::vector<LaserCurvePoint> laser_curve(const CavitySystem& sys, const NVRates& rates,
                                         const MwDrive& mw,
                                         const std::vector<double>& pump_powers_w);

// Single point of the above.
LaserCurvePoint solve_laser_point(const CavitySystem& sys, const NVRates& rates, const MwDrive& mw,
                                  double pump_power_w);

// Threshold pump power: the fixed point of the I_r -> 0 limit of the pump
// relation with the absorption evaluated at the threshold intensity itself.
double threshold_pump(const CavitySystem& sys, const NVRates& rates, const MwDrive& mw);

// Free spectral range over linewidth, (c / 2 n l_c) / (kappa_r / 2 pi).
double finesse(const CavitySystem& sys);

// Circulating power for a given total output power, P * finesse / pi.
double intracavity_power_estimate(const CavitySystem& sys, double output_power_w);

}  // namespace ramanmag

#endif
