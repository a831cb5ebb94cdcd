#include "raman_laser.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace ramanmag {

void validate(const CavitySystem& sys) {
    auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!pos(sys.length_m)) throw ValidationError("cavity.length: must be finite and > 0");
    if (!pos(sys.waist_m)) throw ValidationError("cavity.waist: must be finite and > 0");
    if (!pos(sys.loss_rate_hz)) throw ValidationError("cavity.kappa_r: must be finite and > 0");
    if (!pos(sys.refractive_index))
        throw ValidationError("cavity.refractive_index: must be finite and > 0");
    if (!pos(sys.raman_gain_m_per_w))
        throw ValidationError("cavity.raman_gain: must be finite and > 0");
    if (!pos(sys.pump_frequency_hz))
        throw ValidationError("cavity.pump_wavelength: must be finite and > 0");
    if (!pos(sys.raman_frequency_hz))
        throw ValidationError("cavity.raman_wavelength: must be finite and > 0");
    if (!(sys.pump_frequency_hz > sys.raman_frequency_hz))
        throw ValidationError("cavity: pump frequency must exceed the Raman (Stokes) frequency");
    validate(sys.ensemble);
}

double pump_rate_from_intensity(const CavitySystem& sys, double pump_intensity_w_m2) {
    if (!(pump_intensity_w_m2 >= 0.0) || !std::isfinite(pump_intensity_w_m2))
        throw ValidationError("pump_intensity: must be finite and >= 0");
    const double sigma_m2 = sys.ensemble.cross_section_cm2 * cm2_to_m2;
    return sigma_m2 * pump_intensity_w_m2 / (planck_h * sys.pump_frequency_hz);
}

DriveField nv_drive(const MwDrive& mw, double pump_rate_hz) {
    // The MW knob is the coupling matrix element between the spin states;
    // the rate-model Rabi coefficient is twice the coupling.
    return DriveField{2.0 * mw.rabi, mw.detuning, mw.dephasing, pump_rate_hz};
}

double beta_at_pump(const CavitySystem& sys, const NVRates& rates, const MwDrive& mw,
                    double pump_intensity_w_m2) {
    validate(sys);
    const double lambda_p = pump_rate_from_intensity(sys, pump_intensity_w_m2);
    double rho_g = 1.0;
    if (lambda_p > 0.0) {
        rho_g = ground_population(steady_state(rates, nv_drive(mw, lambda_p)));
    }
    // Lambda_p = 0: everything relaxes into the ground manifold. This is the
    // pump -> 0+ limit; the exactly unpumped, undriven system is degenerate.
    return absorption_coefficient_per_cm(sys.ensemble, rho_g) * per_cm_to_per_m;
}

namespace {

// [1 - exp(-l x)] / x, with the x -> 0 limit l.
double depletion_bracket(double length_m, double x_per_m) {
    const double lx = length_m * x_per_m;
    if (std::abs(lx) < 1e-8) return length_m * (1.0 - 0.5 * lx);
    return -std::expm1(-lx) / x_per_m;
}

}  // namespace

double pump_intensity_for_intracavity(const CavitySystem& sys, double intracavity_w_m2,
                                      double beta_per_m) {
    if (!(intracavity_w_m2 >= 0.0)) throw ValidationError("intracavity: must be >= 0");
    if (!(beta_per_m >= 0.0)) throw ValidationError("beta: must be >= 0");
    const double freq_ratio = sys.pump_frequency_hz / sys.raman_frequency_hz;
    const double x = freq_ratio * sys.raman_gain_m_per_w * intracavity_w_m2 + beta_per_m;
    const double loss = sys.length_m * sys.refractive_index * sys.loss_rate_hz / speed_of_light;
    return loss / (sys.raman_gain_m_per_w * depletion_bracket(sys.length_m, x));
}

double output_power(const CavitySystem& sys, double intracavity_w_m2) {
    if (!(intracavity_w_m2 >= 0.0)) throw ValidationError("intracavity: must be >= 0");
    const double photon_lifetime_factor =
        sys.length_m * sys.refractive_index * sys.loss_rate_hz / speed_of_light;
    return photon_lifetime_factor * intracavity_w_m2 * sys.beam_area_m2();
}

LaserCurvePoint solve_laser_point(const CavitySystem& sys, const NVRates& rates, const MwDrive& mw,
                                  double pump_power_w) {
    validate(sys);
    if (!(pump_power_w >= 0.0) || !std::isfinite(pump_power_w))
        throw ValidationError("pump_power: must be finite and >= 0");

    const double area = sys.beam_area_m2();
    const double pump_intensity = pump_power_w / area;
    const double beta = beta_at_pump(sys, rates, mw, pump_intensity);
    const double lambda_p = pump_rate_from_intensity(sys, pump_intensity);

    LaserCurvePoint pt;
    pt.pump_power_w = pump_power_w;
    pt.beta_per_m = beta;
    pt.pump_rate_hz = lambda_p;

    // Threshold intensity: the I_r -> 0 limit of the pump relation.
    const double threshold_intensity = pump_intensity_for_intracavity(sys, 0.0, beta);
    if (pump_intensity <= threshold_intensity) return pt;

    // The forward map I_r -> required pump intensity is strictly increasing,
    // so bracket on a log pre-scan and bisect.
    const double char_intensity = sys.refractive_index * sys.loss_rate_hz *
                                  sys.raman_frequency_hz /
                                  (speed_of_light * sys.raman_gain_m_per_w * sys.pump_frequency_hz);
    const double lo_bound = 1e-6 * char_intensity;
    const double hi_bound = 1e6 * char_intensity;

    double lo = 0.0;
    double hi = -1.0;
    const int scan_points = 400;
    double prev = lo_bound;
    if (pump_intensity_for_intracavity(sys, lo_bound, beta) >= pump_intensity) {
        hi = lo_bound;  // barely above threshold
    } else {
        lo = lo_bound;
        const double ratio = std::pow(hi_bound / lo_bound, 1.0 / (scan_points - 1));
        for (int k = 1; k < scan_points; ++k) {
            const double ir = prev * ratio;
            if (pump_intensity_for_intracavity(sys, ir, beta) >= pump_intensity) {
                hi = ir;
                break;
            }
            lo = ir;
            prev = ir;
        }
    }
    if (hi < 0.0)
        throw NoConvergence("laser_curve: intra-cavity intensity out of bracket bounds at pump " +
                            std::to_string(pump_power_w) + " W");

    for (int it = 0; it < 200 && (hi - lo) > 1e-8 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (pump_intensity_for_intracavity(sys, mid, beta) >= pump_intensity)
            hi = mid;
        else
            lo = mid;
    }
    pt.intracavity_intensity_w_m2 = 0.5 * (lo + hi);
    pt.output_power_w = output_power(sys, pt.intracavity_intensity_w_m2);
    return pt;
}

std::vector<LaserCurvePoint> laser_curve(const CavitySystem& sys, const NVRates& rates,
                                         const MwDrive& mw,
                                         const std::vector<double>& pump_powers_w) {
    for (std::size_t i = 0; i + 1 < pump_powers_w.size(); ++i) {
        if (!(pump_powers_w[i] <= pump_powers_w[i + 1]))
            throw ValidationError("pump grid: must be ascending");
    }
    std::vector<LaserCurvePoint> curve;
    curve.reserve(pump_powers_w.size());
    for (double p : pump_powers_w) curve.push_back(solve_laser_point(sys, rates, mw, p));
    return curve;
}

double threshold_pump(const CavitySystem& sys, const NVRates& rates, const MwDrive& mw) {
    validate(sys);
    const double area = sys.beam_area_m2();

    auto required_power = [&](double pump_power_w) {
        const double beta = beta_at_pump(sys, rates, mw, pump_power_w / area);
        return area * pump_intensity_for_intracavity(sys, 0.0, beta);
    };

    // Damped fixed point. required_power is non-increasing in its argument
    // (more pump saturates the NVs, lowering absorption), so the residual
    // P - required_power(P) is strictly increasing and brackets cleanly.
    const double zero_beta_power =
        area * sys.refractive_index * sys.loss_rate_hz /
        (speed_of_light * sys.raman_gain_m_per_w);
    double p = zero_beta_power;
    bool converged = false;
    for (int it = 0; it < 80; ++it) {
        const double next = 0.5 * p + 0.5 * required_power(p);
        if (std::abs(next - p) <= 1e-10 * next) {
            p = next;
            converged = true;
            break;
        }
        p = next;
    }

    // Bisection refinement of the residual around the fixed-point estimate.
    double lo = p, hi = p;
    auto residual = [&](double q) { return q - required_power(q); };
    double step = 0.02 * p;
    int expand = 0;
    while (residual(lo) > 0.0) {
        lo -= step;
        step *= 2.0;
        if (lo <= 0.0 || ++expand > 60) {
            lo = zero_beta_power;  // absorption-free floor, residual < 0 there
            break;
        }
    }
    step = 0.02 * p;
    expand = 0;
    while (residual(hi) < 0.0) {
        hi += step;
        step *= 2.0;
        if (++expand > 60)
            throw NoConvergence("threshold_pump: failed to bracket the threshold");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-9 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (residual(mid) >= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    const double result = 0.5 * (lo + hi);
    if (!converged && !(std::abs(residual(result)) <= 1e-6 * result))
        throw NoConvergence("threshold_pump: residual did not settle");
    return result;
}

double finesse(const CavitySystem& sys) {
    validate(sys);
    const double fsr = speed_of_light / (2.0 * sys.refractive_index * sys.length_m);
    const double linewidth = sys.loss_rate_hz / (2.0 * pi);
    return fsr / linewidth;
}

double intracavity_power_estimate(const CavitySystem& sys, double output_power_w) {
    return output_power_w * finesse(sys) / pi;
}

}  // namespace ramanmag
