#ifndef RAMANMAG_CONSTANTS_HPP
#define RAMANMAG_CONSTANTS_HPP

namespace ramanmag {

inline constexpr double pi = 3.14159265358979323846;

// CODATA values, SI
inline constexpr double planck_h = 6.62607015e-34;      // J s
inline constexpr double speed_of_light = 2.99792458e8;  // m/s

// Inverse electron gyromagnetic ratio for the NV spin, T per Hz of detuning.
inline constexpr double inv_gamma_e = 5.68e-12;

// Unit conversion factors (value_in_unit * factor = value_in_SI)
inline constexpr double per_cm_to_per_m = 1e2;
inline constexpr double cm2_to_m2 = 1e-4;
inline constexpr double per_cm3_to_per_m3 = 1e6;
inline constexpr double cm_per_gw_to_m_per_w = 1e-2 / 1e9;

}  // namespace ramanmag

#endif
