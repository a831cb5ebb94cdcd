/* ramanmag: steady-state solver for a diamond Raman laser with an
 * intra-cavity ensemble of microwave-driven NV centres absorbing the pump.
 *
 * The library computes NV steady states, laser curves, threshold powers,
 * threshold shifts with MW detuning, and shot-noise-limited DC magnetic
 * field sensitivities, and runs configuration-driven parameter sweeps.
 *
 * All functions are thread safe; handles are immutable after creation and
 * may be shared across threads. Frequencies and rates are plain s^-1.
 */
#ifndef RAMANMAG_H
#define RAMANMAG_H

#include <stddef.h>

#if defined(_WIN32)
#define RM_API __declspec(dllexport)
#else
#define RM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rm_status {
    RM_OK = 0,
    RM_ERR_INVALID_ARGUMENT = 1,
    RM_ERR_SINGULAR_SYSTEM = 2,  /* steady state not unique */
    RM_ERR_NO_CONVERGENCE = 3,
    RM_ERR_DEGENERATE_CURVE = 4, /* response has no usable slope */
    RM_ERR_PARSE = 5,
    RM_ERR_VALIDATION = 6,
    RM_ERR_BASELINE_MISSING = 7,
    RM_ERR_TASK_FAILED = 8,
    RM_ERR_IO = 9
} rm_status;

RM_API const char* rm_status_name(rm_status status);
RM_API const char* rm_version(void);

/* Message for the most recent failing call on this thread. */
RM_API const char* rm_last_error(void);

/* Physical parameters of the system. Initialize with rm_params_defaults and
 * override fields as needed. */
typedef struct rm_params {
    /* NV internal transition rates, s^-1 */
    double r31, r42, r35, r45, r51, r52;
    /* pump absorption cross-section (cm^2) and NV density (cm^-3) */
    double cross_section_cm2, density_cm3;
    /* cavity geometry and optics, SI */
    double cavity_length_m;
    double waist_m;
    double kappa_r_hz;
    double refractive_index;
    double raman_gain_m_per_w;
    double pump_wavelength_m;
    double raman_wavelength_m;
} rm_params;

RM_API void rm_params_defaults(rm_params* params);

/* Opaque solver handle built from a parameter set. */
typedef struct rm_model rm_model;

RM_API rm_status rm_model_create(const rm_params* params, rm_model** model_out);
RM_API void rm_model_destroy(rm_model* model);

/* Steady state of the driven five-level NV system.
 * state_out[7] = rho11, rho22, rho33, rho44, rho55, Re rho12, Im rho12.
 * rabi_hz here is the raw Rabi coefficient of the master equation. The
 * laser-level functions below instead take the MW coupling strength between
 * the spin states (half the raw coefficient), matching the config files. */
RM_API rm_status rm_steady_state(const rm_model* model, double rabi_hz, double detuning_hz,
                                 double dephasing_hz, double pump_rate_hz, double state_out[7]);

/* Adaptive time integration of the same master equation. */
RM_API rm_status rm_time_evolve(const rm_model* model, double rabi_hz, double detuning_hz,
                                double dephasing_hz, double pump_rate_hz,
                                const double state_in[7], double duration_s, double rel_tol,
                                double state_out[7]);

RM_API double rm_ground_population(const double state[7]);

/* Pump absorption per metre at ground population rho_g. */
RM_API rm_status rm_absorption_per_m(const rm_model* model, double rho_g, double* beta_out);

/* Optical pump rate for an incident intensity in W/m^2. */
RM_API rm_status rm_pump_rate_hz(const rm_model* model, double pump_intensity_w_m2,
                                 double* rate_out);

RM_API rm_status rm_finesse(const rm_model* model, double* finesse_out);

/* Threshold pump power (W) for the given MW drive. */
RM_API rm_status rm_threshold_pump_w(const rm_model* model, double rabi_hz, double detuning_hz,
                                     double dephasing_hz, double* power_out);

/* Laser output power (W) at an incident pump power; fills optional details. */
RM_API rm_status rm_laser_output_w(const rm_model* model, double rabi_hz, double detuning_hz,
                                   double dephasing_hz, double pump_power_w, double* output_out,
                                   double* beta_per_m_out, double* pump_rate_hz_out);

/* Minimum shot-noise-limited DC sensitivity (T/sqrt(Hz)) over detuning for
 * one MW drive strength. pump_power_w <= 0 selects the MW-off-threshold pump
 * rule. */
RM_API rm_status rm_min_sensitivity(const rm_model* model, double rabi_hz, double dephasing_hz,
                                    double pump_power_w, double* eta_out,
                                    double* detuning_opt_hz_out);

/* --- configuration-driven sweeps ------------------------------------- */

typedef struct rm_report rm_report;

/* Parse a JSON experiment config, run it, and write results.csv,
 * summary.json and manifest.json under out_dir. workers <= 0 uses the
 * config value (0 there means hardware concurrency). A report is returned
 * even when some tasks fail (status RM_ERR_TASK_FAILED). */
RM_API rm_status rm_run_json(const char* config_json, const char* out_dir, int workers,
                             rm_report** report_out);

/* Built-in experiment description; free the string with rm_string_free.
 * Names: figure2, figure3a, figure3b, figure3c, figure3d, figure4a,
 * figure4b. */
RM_API rm_status rm_preset_json(const char* name, char** json_out);

/* Re-run a config and compare against a baseline CSV with the given
 * relative tolerance (<= 0 selects the default 1e-6). RM_OK with
 * rm_report_passed() == 0 means the comparison ran and found a mismatch. */
RM_API rm_status rm_verify_json(const char* config_json, const char* baseline_csv_path,
                                double rel_tol, rm_report** report_out);

RM_API int rm_report_task_count(const rm_report* report);
RM_API int rm_report_failed_count(const rm_report* report);
RM_API int rm_report_passed(const rm_report* report);
RM_API const char* rm_report_text(const rm_report* report);
RM_API void rm_report_destroy(rm_report* report);

RM_API void rm_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* RAMANMAG_H */
