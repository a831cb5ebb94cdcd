#include "nv_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace ramanmag {

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }
bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void validate(const NVRates& rates) {
    if (!finite_positive(rates.r31) || !finite_positive(rates.r42) ||
        !finite_positive(rates.r35) || !finite_positive(rates.r45) ||
        !finite_positive(rates.r51) || !finite_positive(rates.r52)) {
        throw ValidationError("rates: all transition rates must be finite and > 0");
    }
}

void validate(const DriveField& drive) {
    if (!finite_nonneg(drive.rabi)) throw ValidationError("drive.rabi: must be finite and >= 0");
    if (!finite_nonneg(drive.dephasing))
        throw ValidationError("drive.dephasing: must be finite and >= 0");
    if (!finite_nonneg(drive.pump_rate))
        throw ValidationError("drive.pump_rate: must be finite and >= 0");
    if (!std::isfinite(drive.detuning)) throw ValidationError("drive.detuning: must be finite");
}

void validate(const NVEnsemble& ensemble) {
    if (!finite_positive(ensemble.cross_section_cm2))
        throw ValidationError("ensemble.cross_section: must be finite and > 0");
    if (!finite_positive(ensemble.density_cm3))
        throw ValidationError("ensemble.density: must be finite and > 0");
}

void validate(const DensityMatrixState& state, double tol) {
    for (double p : state.pop) {
        if (!std::isfinite(p) || p < -tol || p > 1.0 + tol)
            throw ValidationError("state.pop: population outside [0, 1]");
    }
    if (std::abs(state.trace() - 1.0) > tol)
        throw ValidationError("state.pop: trace differs from 1");
    const double coh2 = state.coh_re * state.coh_re + state.coh_im * state.coh_im;
    if (coh2 > state.pop[0] * state.pop[1] + tol)
        throw ValidationError("state.coh: |rho12|^2 exceeds rho11*rho22");
}

Generator build_generator(const NVRates& rates, const DriveField& drive) {
    validate(rates);
    validate(drive);

    const double lam = drive.pump_rate;
    const double om = drive.rabi;
    const double det = drive.detuning;
    const double gam = drive.dephasing;

    // With rho12 = x + i y and rho21 its conjugate:
    //   d rho11/dt = -Lam rho11 + R31 rho33 + R51 rho55 - Om y
    //   d rho22/dt = -Lam rho22 + R42 rho44 + R52 rho55 + Om y
    //   d rho33/dt =  Lam rho11 - (R31 + R35) rho33
    //   d rho44/dt =  Lam rho22 - (R42 + R45) rho44
    //   d rho55/dt =  R35 rho33 + R45 rho44 - (R51 + R52) rho55
    //   d x/dt     = -(Lam + Gam) x - Det y
    //   d y/dt     =  (Om/2)(rho11 - rho22) + Det x - (Lam + Gam) y
    Generator g;
    g(0, 0) = -lam;
    g(0, 2) = rates.r31;
    g(0, 4) = rates.r51;
    g(0, 6) = -om;

    g(1, 1) = -lam;
    g(1, 3) = rates.r42;
    g(1, 4) = rates.r52;
    g(1, 6) = om;

    g(2, 0) = lam;
    g(2, 2) = -(rates.r31 + rates.r35);

    g(3, 1) = lam;
    g(3, 3) = -(rates.r42 + rates.r45);

    g(4, 2) = rates.r35;
    g(4, 3) = rates.r45;
    g(4, 4) = -(rates.r51 + rates.r52);

    g(5, 5) = -(lam + gam);
    g(5, 6) = -det;

    g(6, 0) = 0.5 * om;
    g(6, 1) = -0.5 * om;
    g(6, 5) = det;
    g(6, 6) = -(lam + gam);
    return g;
}

DensityMatrixState steady_state(const NVRates& rates, const DriveField& drive) {
    const Generator g = build_generator(rates, drive);
    const double scale = g.max_abs();

    // Replace the first population row by the trace constraint.
    Mat<7> m = g;
    std::array<double, 7> rhs{};
    for (std::size_t j = 0; j < 7; ++j) m(0, j) = (j < 5) ? 1.0 : 0.0;
    rhs[0] = 1.0;

    if (!solve_inplace(m, rhs))
        throw SingularSystem("steady_state: stationary state is not unique (rank-deficient system)");

    // Residual of the full generator confirms we found a genuine null vector.
    const std::array<double, 7> resid = g.apply(rhs);
    double rmax = 0.0;
    for (double r : resid) rmax = std::max(rmax, std::abs(r));
    if (rmax > 1e-10 * scale)
        throw SingularSystem("steady_state: residual exceeds tolerance (degenerate rates?)");

    // Round-off can leave populations at tiny negative values.
    for (std::size_t i = 0; i < 5; ++i) {
        if (rhs[i] < 0.0 && rhs[i] > -1e-12) rhs[i] = 0.0;
    }
    DensityMatrixState state = DensityMatrixState::from_vector(rhs);
    validate(state);
    return state;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

using Vec7 = std::array<double, 7>;

Vec7 axpy(const Vec7& y, double h, const Vec7& k) {
    Vec7 r;
    for (int i = 0; i < 7; ++i) r[i] = y[i] + h * k[i];
    return r;
}

}  // namespace

DensityMatrixState time_evolve(const NVRates& rates, const DriveField& drive,
                               const DensityMatrixState& initial, double duration_s,
                               double rel_tol) {
    validate(initial);
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s))
        throw ValidationError("duration: must be finite and >= 0");
    if (!(rel_tol > 0.0)) throw ValidationError("rel_tol: must be > 0");

    const Generator g = build_generator(rates, drive);
    auto deriv = [&g](const Vec7& y) { return g.apply(y); };

    Vec7 y = initial.as_vector();
    if (duration_s == 0.0) return initial;

    // Initial step from the generator scale.
    const double gmax = g.max_abs();
    double h = (gmax > 0.0) ? std::min(duration_s, 0.1 / gmax) : duration_s;
    double t = 0.0;
    const double abs_tol = rel_tol * 1e-3;
    const double h_min = duration_s * 1e-15;
    const long max_steps = 200'000'000L;

    Vec7 k1 = deriv(y);
    for (long step = 0; step < max_steps;) {
        if (t + h > duration_s) h = duration_s - t;

        const Vec7 k2 = deriv(axpy(y, h * a21, k1));
        Vec7 s;
        for (int i = 0; i < 7; ++i) s[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        const Vec7 k3 = deriv(s);
        for (int i = 0; i < 7; ++i) s[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        const Vec7 k4 = deriv(s);
        for (int i = 0; i < 7; ++i)
            s[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        const Vec7 k5 = deriv(s);
        for (int i = 0; i < 7; ++i)
            s[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const Vec7 k6 = deriv(s);
        Vec7 y5;
        for (int i = 0; i < 7; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        const Vec7 k7 = deriv(y5);

        double err = 0.0;
        for (int i = 0; i < 7; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                   e7 * k7[i]);
            const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(ei) / sc);
        }

        ++step;
        if (err <= 1.0) {
            t += h;
            y = y5;
            k1 = k7;  // FSAL
            if (t >= duration_s) {
                DensityMatrixState out = DensityMatrixState::from_vector(y);
                for (std::size_t i = 0; i < 5; ++i) {
                    if (out.pop[i] < 0.0 && out.pop[i] > -1e-9) out.pop[i] = 0.0;
                }
                return out;
            }
        }
        const double grow = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        if (h < h_min)
            throw NoConvergence("time_evolve: step size underflow at t = " + std::to_string(t));
    }
    throw NoConvergence("time_evolve: exceeded maximum step count");
}

double ground_population(const DensityMatrixState& state) { return state.pop[0] + state.pop[1]; }

double absorption_coefficient_per_cm(const NVEnsemble& ensemble, double rho_g) {
    validate(ensemble);
    if (!(rho_g >= 0.0 && rho_g <= 1.0))
        throw ValidationError("rho_g: must lie in [0, 1]");
    return ensemble.cross_section_cm2 * ensemble.density_cm3 * rho_g;
}

}  // namespace ramanmag
