#include "magnetometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"
#include "interp.hpp"

namespace ramanmag {

void validate(const ResponseCurve& curve) {
    const std::size_t n = curve.detunings_hz.size();
    if (n < 4 || curve.outputs_w.size() != n)
        throw ValidationError("response: need >= 4 matching detuning/output points");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(curve.detunings_hz[i] < curve.detunings_hz[i + 1]))
            throw ValidationError("response: detunings must be strictly ascending");
    }
    for (double p : curve.outputs_w) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw ValidationError("response: outputs must be finite and >= 0");
    }
    if (!(curve.pump_power_w > 0.0)) throw ValidationError("response: pump power must be > 0");
}

std::vector<double> default_detuning_grid() {
    std::vector<double> grid;
    grid.reserve(41);
    grid.push_back(0.0);
    const double lo = 0.5e6, hi = 200e6;
    const int n = 40;
    const double ratio = std::pow(hi / lo, 1.0 / (n - 1));
    double v = lo;
    for (int k = 0; k < n; ++k) {
        grid.push_back(v);
        v *= ratio;
    }
    grid.back() = hi;  // kill accumulated round-off at the far end
    return grid;
}

ResponseCurve response_vs_detuning(const CavitySystem& sys, const NVRates& rates, double rabi_hz,
                                   double dephasing_hz, double pump_power_w,
                                   const std::vector<double>& detuning_grid_hz) {
    if (!(pump_power_w > 0.0)) throw ValidationError("pump_power: must be > 0");
    ResponseCurve curve;
    curve.detunings_hz = detuning_grid_hz;
    curve.pump_power_w = pump_power_w;
    curve.mw = MwDrive{rabi_hz, 0.0, dephasing_hz};
    curve.cavity = sys;
    curve.outputs_w.reserve(detuning_grid_hz.size());
    for (double det : detuning_grid_hz) {
        const MwDrive mw{rabi_hz, det, dephasing_hz};
        curve.outputs_w.push_back(solve_laser_point(sys, rates, mw, pump_power_w).output_power_w);
    }
    validate(curve);
    return curve;
}

double threshold_shift_percent(const CavitySystem& sys, const NVRates& rates, double rabi_hz,
                               double dephasing_hz) {
    const double reference_detuning = 200e6;
    const double p_res = threshold_pump(sys, rates, MwDrive{rabi_hz, 0.0, dephasing_hz});
    const double p_det =
        threshold_pump(sys, rates, MwDrive{rabi_hz, reference_detuning, dephasing_hz});
    return 100.0 * (p_det - p_res) / p_res;
}

double detuning_to_field(double detuning_hz) { return detuning_hz * inv_gamma_e; }

SensitivityResult sensitivity_curve(const ResponseCurve& curve, const SensitivityOptions& opts) {
    validate(curve);
    if (!(opts.detection_efficiency > 0.0 && opts.detection_efficiency <= 1.0))
        throw ValidationError("detection_efficiency: must lie in (0, 1]");

    // The response is even in the detuning; fitting the symmetric extension
    // pins the slope to zero at the peak instead of a one-sided estimate.
    std::vector<double> xs = curve.detunings_hz;
    std::vector<double> ys = curve.outputs_w;
    if (xs.front() == 0.0) {
        std::vector<double> ex, ey;
        ex.reserve(2 * xs.size() - 1);
        ey.reserve(2 * xs.size() - 1);
        for (std::size_t i = xs.size(); i-- > 1;) {
            ex.push_back(-xs[i]);
            ey.push_back(ys[i]);
        }
        ex.insert(ex.end(), xs.begin(), xs.end());
        ey.insert(ey.end(), ys.begin(), ys.end());
        xs = std::move(ex);
        ys = std::move(ey);
    }
    const MonotoneCubic fit(xs, ys);
    const double h_nu = planck_h * curve.cavity.raman_frequency_hz;
    const double collect = opts.detection_efficiency * (opts.single_mirror ? 0.5 : 1.0);

    auto eta_at = [&](double det) {
        const double power = std::max(fit.eval(det), 0.0) * collect;
        const double slope = std::abs(fit.deriv(det)) * collect;
        if (slope <= 0.0 || power <= 0.0) return std::numeric_limits<double>::infinity();
        return std::sqrt(h_nu * power) * inv_gamma_e / slope;
    };

    // Flat response (MW off, or dark laser) has no slope to sense with.
    double max_out = 0.0, max_slope = 0.0;
    for (std::size_t i = 0; i < curve.detunings_hz.size(); ++i) {
        max_out = std::max(max_out, curve.outputs_w[i]);
        max_slope = std::max(max_slope, std::abs(fit.deriv(curve.detunings_hz[i])));
    }
    const double span = curve.detunings_hz.back() - curve.detunings_hz.front();
    if (max_out <= 0.0 || max_slope * span <= 1e-9 * max_out)
        throw DegenerateCurve("sensitivity: response curve is flat; no field dependence");

    SensitivityResult res;
    res.curve.reserve(curve.detunings_hz.size());
    const double lo_limit = std::max(opts.guard_hz, curve.detunings_hz.front());
    const double hi_limit = curve.detunings_hz.back();

    std::size_t best = 0;
    double best_eta = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < curve.detunings_hz.size(); ++i) {
        const double det = curve.detunings_hz[i];
        const double eta = eta_at(det);
        res.curve.push_back({det, curve.outputs_w[i], eta});
        if (det >= lo_limit && eta < best_eta) {
            best_eta = eta;
            best = i;
        }
    }
    if (!std::isfinite(best_eta))
        throw DegenerateCurve("sensitivity: no usable slope outside the guard interval");

    // Golden-section refinement between the grid neighbours of the seed.
    double a = (best > 0) ? std::max(curve.detunings_hz[best - 1], lo_limit) : lo_limit;
    double b = (best + 1 < curve.detunings_hz.size()) ? curve.detunings_hz[best + 1] : hi_limit;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = eta_at(x1), f2 = eta_at(x2);
    while ((b - a) > 1e-6 * hi_limit) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = eta_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = eta_at(x2);
        }
    }
    const double det_opt = 0.5 * (a + b);
    const double eta_opt = eta_at(det_opt);

    if (eta_opt <= best_eta) {
        res.eta_min = eta_opt;
        res.detuning_opt_hz = det_opt;
    } else {
        res.eta_min = best_eta;
        res.detuning_opt_hz = curve.detunings_hz[best];
    }
    res.field_opt_t = detuning_to_field(res.detuning_opt_hz);
    res.output_opt_w = std::max(fit.eval(res.detuning_opt_hz), 0.0);
    return res;
}

RabiScan optimize_min_sensitivity(const CavitySystem& sys, const NVRates& rates,
                                  double dephasing_hz, const std::vector<double>& rabi_grid_hz,
                                  double pump_power_w, const SensitivityOptions& opts) {
    if (rabi_grid_hz.empty()) throw ValidationError("rabi grid: empty");
    for (std::size_t i = 0; i + 1 < rabi_grid_hz.size(); ++i) {
        if (!(rabi_grid_hz[i] > 0.0 && rabi_grid_hz[i] < rabi_grid_hz[i + 1]))
            throw ValidationError("rabi grid: must be positive and ascending");
    }
    if (!(rabi_grid_hz.back() > 0.0)) throw ValidationError("rabi grid: must be positive");

    const double pump =
        (pump_power_w > 0.0) ? pump_power_w
                             : threshold_pump(sys, rates, MwDrive{0.0, 0.0, dephasing_hz});

    RabiScan scan;
    scan.points.reserve(rabi_grid_hz.size());
    const std::vector<double> grid = default_detuning_grid();
    double best_eta = std::numeric_limits<double>::infinity();
    for (double rabi : rabi_grid_hz) {
        RabiScanPoint point;
        point.rabi_hz = rabi;
        try {
            const ResponseCurve curve =
                response_vs_detuning(sys, rates, rabi, dephasing_hz, pump, grid);
            point.result = sensitivity_curve(curve, opts);
        } catch (const DegenerateCurve&) {
            // below threshold for every detuning at this drive: flag and move on
        }
        if (point.result && point.result->eta_min < best_eta) {
            best_eta = point.result->eta_min;
            scan.best_index = scan.points.size();
        }
        scan.points.push_back(std::move(point));
    }
    return scan;
}

}  // namespace ramanmag
