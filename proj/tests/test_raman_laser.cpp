#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "raman_laser.hpp"

using namespace ramanmag;

namespace {

const CavitySystem kDefaultCavity;  // kappa_r = 75 MHz defaults

double zero_beta_threshold_w(const CavitySystem& sys) {
    return sys.beam_area_m2() * sys.refractive_index * sys.loss_rate_hz /
           (speed_of_light * sys.raman_gain_m_per_w);
}

}  // namespace

TEST_CASE("pump rate from intensity") {
    const CavitySystem sys;
    CHECK(pump_rate_from_intensity(sys, 0.0) == 0.0);

    // 341.74 mW over the 5 um beam gives a pump rate near 17.64 MHz
    const double intensity = 0.34174 / sys.beam_area_m2();
    const double rate = pump_rate_from_intensity(sys, intensity);
    CHECK(std::abs(rate / 17.64e6 - 1.0) < 0.02);

    CHECK(pump_rate_from_intensity(sys, 2.0 * intensity) ==
          doctest::Approx(2.0 * rate).epsilon(1e-12));
}

TEST_CASE("pump relation limits and monotonicity") {
    const CavitySystem sys;

    // closed-form I_r -> 0, beta -> 0 limit: n kappa / (c g)
    const double limit = sys.refractive_index * sys.loss_rate_hz /
                         (speed_of_light * sys.raman_gain_m_per_w);
    CHECK(pump_intensity_for_intracavity(sys, 0.0, 0.0) ==
          doctest::Approx(limit).epsilon(1e-12));
    CHECK(limit == doctest::Approx(4.0706e9).epsilon(1e-3));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double beta = 3000.0 * u(rng);
        const double ir = std::exp(std::log(1e6) + u(rng) * std::log(1e15 / 1e6));
        const double step = 1.0 + u(rng);
        CHECK(pump_intensity_for_intracavity(sys, ir * step, beta) >
              pump_intensity_for_intracavity(sys, ir, beta));
        CHECK(pump_intensity_for_intracavity(sys, ir, beta + 10.0) >
              pump_intensity_for_intracavity(sys, ir, beta));
    }
}

TEST_CASE("output power is linear in the intra-cavity intensity") {
    const CavitySystem sys;
    CHECK(output_power(sys, 0.0) == 0.0);
    const double p1 = output_power(sys, 1e12);
    CHECK(output_power(sys, 2e12) == doctest::Approx(2.0 * p1).epsilon(1e-12));

    // 5 mW of output corresponds to roughly 83 W circulating
    CHECK(intracavity_power_estimate(sys, 5e-3) == doctest::Approx(83.0).epsilon(0.02));
}

TEST_CASE("absorption at the pump") {
    const CavitySystem sys;
    const NVRates rates;

    // no pump, no MW: every NV sits in the ground manifold
    const double sigma_d_per_m = 23.01 * per_cm_to_per_m;
    CHECK(beta_at_pump(sys, rates, MwDrive{0.0, 0.0, 1e6}, 0.0) ==
          doctest::Approx(sigma_d_per_m).epsilon(1e-12));

    // strong pump saturates; cross-check rho_g against the integrator
    const double strong_intensity = 1e9 / (pump_rate_from_intensity(sys, 1.0));  // Lambda = 1e9
    const double beta_strong = beta_at_pump(sys, rates, MwDrive{0.0, 0.0, 1e6}, strong_intensity);
    CHECK(beta_strong < sigma_d_per_m);

    DensityMatrixState init;
    init.pop = {1, 0, 0, 0, 0};
    const DensityMatrixState evolved =
        time_evolve(rates, DriveField{0.0, 0.0, 1e6, 1e9}, init, 100.0 / 2.04e6);
    const double beta_oracle =
        absorption_coefficient_per_cm(sys.ensemble, ground_population(evolved)) * per_cm_to_per_m;
    CHECK(beta_strong == doctest::Approx(beta_oracle).epsilon(1e-5));

    // detuned MW absorbs harder than resonant MW
    const double pump_341 = 0.34174 / sys.beam_area_m2();
    const double beta_res = beta_at_pump(sys, rates, MwDrive{18e6, 0.0, 1e6}, pump_341);
    const double beta_det = beta_at_pump(sys, rates, MwDrive{18e6, 200e6, 1e6}, pump_341);
    CHECK(beta_res < beta_det);
}

TEST_CASE("laser curve basics") {
    const CavitySystem sys;
    const NVRates rates;
    const MwDrive off{0.0, 0.0, 1e6};

    const auto curve = laser_curve(sys, rates, off, {0.0, 0.1, 0.2, 0.3, 0.4});
    CHECK(curve.size() == 5);
    CHECK(curve[0].output_power_w == 0.0);
    CHECK(curve[0].pump_rate_hz == 0.0);
    // below the ~342 mW threshold everything is dark, above it lases
    CHECK(curve[3].output_power_w == 0.0);
    CHECK(curve[4].output_power_w > 0.0);

    // output strictly increases with pump above threshold
    const auto above = laser_curve(sys, rates, off, {0.36, 0.38, 0.40, 0.42});
    for (std::size_t i = 0; i + 1 < above.size(); ++i)
        CHECK(above[i + 1].output_power_w > above[i].output_power_w);

    CHECK_THROWS_AS(laser_curve(sys, rates, off, {0.4, 0.3}), ValidationError);
    CHECK_THROWS_AS(solve_laser_point(sys, rates, off, 1e3), NoConvergence);
}

TEST_CASE("stimulated emission never exceeds the frequency-scaled pump depletion") {
    const CavitySystem sys;
    const NVRates rates;
    const MwDrive mw{18e6, 0.0, 1e6};
    const double ratio = sys.pump_frequency_hz / sys.raman_frequency_hz;
    for (const LaserCurvePoint& pt :
         laser_curve(sys, rates, mw, {0.34, 0.36, 0.40, 0.44})) {
        if (pt.intracavity_intensity_w_m2 == 0.0) continue;
        const double x = ratio * sys.raman_gain_m_per_w * pt.intracavity_intensity_w_m2 +
                         pt.beta_per_m;
        const double incident = pt.pump_power_w / sys.beam_area_m2();
        const double depleted = incident * (1.0 - std::exp(-sys.length_m * x));
        const double generated =
            depleted * sys.raman_gain_m_per_w * pt.intracavity_intensity_w_m2 / x;
        CHECK(generated <= depleted / ratio * (1.0 + 1e-12));
    }
}

TEST_CASE("threshold ordering across MW drive conditions") {
    const CavitySystem sys;
    const NVRates rates;
    const double p_res = threshold_pump(sys, rates, MwDrive{18e6, 0.0, 1e6});
    const double p_det = threshold_pump(sys, rates, MwDrive{18e6, 200e6, 1e6});
    const double p_off = threshold_pump(sys, rates, MwDrive{0.0, 0.0, 1e6});
    CHECK(p_res < p_det);
    CHECK(p_det <= p_off);
    // far-detuned driving approaches the MW-off laser
    CHECK(p_off - p_det < 0.2 * (p_off - p_res));
}

TEST_CASE("MW-off threshold reproduces the reference value") {
    const CavitySystem sys;
    const NVRates rates;
    const double p_off = threshold_pump(sys, rates, MwDrive{0.0, 0.0, 1e6});
    CHECK(std::abs(p_off / 0.34174 - 1.0) < 0.05);
}

TEST_CASE("threshold without absorbers hits the closed form") {
    CavitySystem sys;
    sys.ensemble.density_cm3 = 1e-12;  // effectively empty cavity
    const NVRates rates;
    const double p_th = threshold_pump(sys, rates, MwDrive{0.0, 0.0, 1e6});
    CHECK(p_th == doctest::Approx(zero_beta_threshold_w(sys)).epsilon(1e-9));
}

TEST_CASE("threshold grows almost linearly with the cavity loss rate") {
    const NVRates rates;
    const MwDrive off{0.0, 0.0, 1e6};
    std::vector<double> kappa = {75e6, 110e6, 145e6, 180e6, 215e6, 250e6};
    std::vector<double> p;
    for (double k : kappa) {
        CavitySystem sys;
        sys.loss_rate_hz = k;
        p.push_back(threshold_pump(sys, rates, off));
    }
    for (std::size_t i = 1; i + 1 < kappa.size(); ++i) {
        const double chord = p.front() + (p.back() - p.front()) * (kappa[i] - kappa.front()) /
                                             (kappa.back() - kappa.front());
        CHECK(std::abs(p[i] - chord) < 0.02 * p[i]);
    }
    // and strictly increases
    for (std::size_t i = 0; i + 1 < p.size(); ++i) CHECK(p[i] < p[i + 1]);
}

TEST_CASE("threshold agrees with the laser-curve onset") {
    const CavitySystem sys;
    const NVRates rates;
    const MwDrive mw{18e6, 0.0, 1e6};
    const double p_th = threshold_pump(sys, rates, mw);

    std::vector<double> grid;
    for (double p = 0.30; p <= 0.40; p += 0.002) grid.push_back(p);
    const auto curve = laser_curve(sys, rates, mw, grid);
    std::size_t onset = grid.size();
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i].output_power_w > 0.0) {
            onset = i;
            break;
        }
    }
    REQUIRE(onset < grid.size());
    REQUIRE(onset > 0);
    CHECK(grid[onset - 1] <= p_th);
    CHECK(p_th <= grid[onset] + 1e-12);
}

TEST_CASE("finesse") {
    CavitySystem sys;
    CHECK(std::abs(finesse(sys) / 52360.0 - 1.0) < 0.01);

    const double base = finesse(sys);
    sys.loss_rate_hz *= 2.0;
    CHECK(finesse(sys) == doctest::Approx(0.5 * base).epsilon(1e-12));
    sys.loss_rate_hz = 75e6;
    sys.length_m *= 2.0;
    CHECK(finesse(sys) == doctest::Approx(0.5 * base).epsilon(1e-12));
}

TEST_CASE("cavity invariants") {
    CavitySystem sys;
    sys.raman_frequency_hz = sys.pump_frequency_hz + 1.0;  // Stokes must be red of the pump
    CHECK_THROWS_AS(validate(sys), ValidationError);
    CavitySystem sys2;
    sys2.waist_m = 0.0;
    CHECK_THROWS_AS(validate(sys2), ValidationError);
}
