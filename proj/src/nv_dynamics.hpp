#ifndef RAMANMAG_NV_DYNAMICS_HPP
#define RAMANMAG_NV_DYNAMICS_HPP

#include <array>

#include "linalg.hpp"

namespace ramanmag {

// Five-level NV model: |1>,|2> ground spin states, |3>,|4> excited spin
// states, |5> the singlet shelf. All rates in s^-1 throughout; quoted MHz
// values are 1e6 s^-1.

// Internal decay rates R_ij (|i> -> |j>).
struct NVRates {
    double r31 = 66.16e6;
    double r42 = 66.16e6;
    double r35 = 11.1e6;
    double r45 = 91.8e6;
    double r51 = 4.87e6;
    double r52 = 2.04e6;

    bool operator==(const NVRates&) const = default;
};

// Microwave drive on the |1>-|2> spin transition plus the incoherent optical
// pump rate acting on both ground states.
struct DriveField {
    double rabi = 0.0;       // MW Rabi frequency, >= 0
    double detuning = 0.0;   // MW detuning from the spin resonance, any sign
    double dephasing = 0.0;  // intrinsic ground-state dephasing, >= 0
    double pump_rate = 0.0;  // optical pump rate Lambda_p, >= 0
};

// Density matrix restricted to the populations and the ground-state
// coherence rho_12 (the only coherence kept in the model).
struct DensityMatrixState {
    std::array<double, 5> pop{};  // rho_11 .. rho_55
    double coh_re = 0.0;          // Re rho_12
    double coh_im = 0.0;          // Im rho_12

    std::array<double, 7> as_vector() const {
        return {pop[0], pop[1], pop[2], pop[3], pop[4], coh_re, coh_im};
    }
    static DensityMatrixState from_vector(const std::array<double, 7>& v) {
        return {{v[0], v[1], v[2], v[3], v[4]}, v[5], v[6]};
    }

    double trace() const { return pop[0] + pop[1] + pop[2] + pop[3] + pop[4]; }
};

// NV ensemble absorbing the pump: cross section in cm^2, density in cm^-3
// (the units absorption data is quoted in; converted to SI at use sites).
struct NVEnsemble {
    double cross_section_cm2 = 1.3e-17;
    double density_cm3 = 1.77e18;

    bool operator==(const NVEnsemble&) const = default;
};

void validate(const NVRates& rates);
void validate(const DriveField& drive);
void validate(const NVEnsemble& ensemble);
// Checks population bounds, unit trace and coherence positivity to `tol`.
void validate(const DensityMatrixState& state, double tol = 1e-10);

// State vector ordering: (rho11, rho22, rho33, rho44, rho55, Re rho12, Im rho12).
using Generator = Mat<7>;

// Assembles G with d(state)/dt = G * state. Columns of the population block
// sum to zero, so the trace is conserved exactly.
Generator build_generator(const NVRates& rates, const DriveField& drive);

// Steady state of G*state = 0 under the unit-trace constraint, solved as a
// 7x7 linear system with one population row replaced by the trace row.
// Throws SingularSystem when the stationary state is not unique (e.g. no
// pump and no drive leaves the ground-spin split undetermined).
DensityMatrixState steady_state(const NVRates& rates, const DriveField& drive);

// Adaptive embedded Runge-Kutta integration of the master equation. Test
// oracle for steady_state, not a performance path. Throws NoConvergence if
// step control stalls.
DensityMatrixState time_evolve(const NVRates& rates, const DriveField& drive,
                               const DensityMatrixState& initial, double duration_s,
                               double rel_tol = 1e-9);

// rho_g = rho_11 + rho_22
double ground_population(const DensityMatrixState& state);

// Base-e pump absorption per unit length, beta = sigma * D * rho_g, in cm^-1.
double absorption_coefficient_per_cm(const NVEnsemble& ensemble, double rho_g);

}  // namespace ramanmag

#endif
