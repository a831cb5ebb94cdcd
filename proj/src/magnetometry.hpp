#ifndef RAMANMAG_MAGNETOMETRY_HPP
#define RAMANMAG_MAGNETOMETRY_HPP

#include <optional>
#include <vector>

#include "raman_laser.hpp"

namespace ramanmag {

// Laser output versus MW detuning at fixed pump power. Detunings are
// non-negative; the physical response is even in the detuning.
struct ResponseCurve {
    std::vector<double> detunings_hz;
    std::vector<double> outputs_w;
    double pump_power_w = 0.0;
    MwDrive mw;          // detuning field here is ignored; the grid carries it
    CavitySystem cavity;
};

void validate(const ResponseCurve& curve);

struct SensitivityPoint {
    double detuning_hz = 0.0;
    double output_w = 0.0;
    double eta = 0.0;  // T/sqrt(Hz); +inf where the slope vanishes
};

struct SensitivityResult {
    double eta_min = 0.0;          // T/sqrt(Hz)
    double detuning_opt_hz = 0.0;  // > 0; the response peak itself is blind
    double field_opt_t = 0.0;
    double output_opt_w = 0.0;     // interpolated output at the optimum
    std::vector<SensitivityPoint> curve;  // sampled at the response grid
};

// Shot-noise options. Detection efficiency scales the detected power inside
// the shot-noise square root; single_mirror halves the collected output.
struct SensitivityOptions {
    double detection_efficiency = 1.0;
    bool single_mirror = false;
    double guard_hz = 0.1e6;  // exclusion half-window around zero detuning
};

// 41-point default grid: zero plus a geometric ladder from 0.5 to 200 MHz.
std::vector<double> default_detuning_grid();

// Output power at each detuning for a fixed incident pump power.
ResponseCurve response_vs_detuning(const CavitySystem& sys, const NVRates& rates, double rabi_hz,
                                   double dephasing_hz, double pump_power_w,
                                   const std::vector<double>& detuning_grid_hz);

// Relative threshold change between far-detuned (200 MHz) and resonant MW
// drive, as a percentage of the resonant threshold.
double threshold_shift_percent(const CavitySystem& sys, const NVRates& rates, double rabi_hz,
                               double dephasing_hz);

double detuning_to_field(double detuning_hz);

// Shot-noise-limited DC sensitivity from a response curve: monotone cubic
// fit, analytic slope, golden-section refinement of the grid minimum.
// Throws DegenerateCurve when the response has no usable slope anywhere.
SensitivityResult sensitivity_curve(const ResponseCurve& curve,
                                    const SensitivityOptions& opts = {});

struct RabiScanPoint {
    double rabi_hz = 0.0;
    std::optional<SensitivityResult> result;  // empty: laser dark at this drive
};

struct RabiScan {
    std::vector<RabiScanPoint> points;
    std::size_t best_index = 0;  // argmin eta_min over solved points
};

// eta_min as a function of MW drive strength. pump_power_w <= 0 selects the
// MW-off-threshold pump rule.
RabiScan optimize_min_sensitivity(const CavitySystem& sys, const NVRates& rates,
                                  double dephasing_hz, const std::vector<double>& rabi_grid_hz,
                                  double pump_power_w = 0.0, const SensitivityOptions& opts = {});

}  // namespace ramanmag

#endif
