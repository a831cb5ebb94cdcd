#include "ramanmag/ramanmag.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "errors.hpp"
#include "magnetometry.hpp"
#include "sweep.hpp"
#include "version.hpp"

namespace {

thread_local std::string g_last_error;

rm_status to_status(const ramanmag::Error& e) {
    using ramanmag::ErrorCode;
    switch (e.code()) {
        case ErrorCode::ok: return RM_OK;
        case ErrorCode::invalid_argument: return RM_ERR_INVALID_ARGUMENT;
        case ErrorCode::singular_system: return RM_ERR_SINGULAR_SYSTEM;
        case ErrorCode::no_convergence: return RM_ERR_NO_CONVERGENCE;
        case ErrorCode::degenerate_curve: return RM_ERR_DEGENERATE_CURVE;
        case ErrorCode::parse: return RM_ERR_PARSE;
        case ErrorCode::validation: return RM_ERR_VALIDATION;
        case ErrorCode::baseline_missing: return RM_ERR_BASELINE_MISSING;
        case ErrorCode::task_failed: return RM_ERR_TASK_FAILED;
        case ErrorCode::io: return RM_ERR_IO;
    }
    return RM_ERR_INVALID_ARGUMENT;
}

template <typename Fn>
rm_status guarded(Fn&& fn) {
    try {
        fn();
        return RM_OK;
    } catch (const ramanmag::Error& e) {
        g_last_error = e.what();
        return to_status(e);
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return RM_ERR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RM_ERR_INVALID_ARGUMENT;
    }
}

rm_status invalid(const char* what) {
    g_last_error = what;
    return RM_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct rm_model {
    ramanmag::NVRates rates;
    ramanmag::CavitySystem cavity;
};

struct rm_report {
    int task_count = 0;
    int failed = 0;
    int passed = 1;
    std::string text;
};

extern "C" {

const char* rm_status_name(rm_status status) {
    switch (status) {
        case RM_OK: return "ok";
        case RM_ERR_INVALID_ARGUMENT: return "invalid argument";
        case RM_ERR_SINGULAR_SYSTEM: return "singular system";
        case RM_ERR_NO_CONVERGENCE: return "no convergence";
        case RM_ERR_DEGENERATE_CURVE: return "degenerate curve";
        case RM_ERR_PARSE: return "parse error";
        case RM_ERR_VALIDATION: return "validation error";
        case RM_ERR_BASELINE_MISSING: return "baseline missing";
        case RM_ERR_TASK_FAILED: return "task failed";
        case RM_ERR_IO: return "i/o error";
    }
    return "unknown";
}

const char* rm_version(void) { return ramanmag::project_version; }

const char* rm_last_error(void) { return g_last_error.c_str(); }

void rm_params_defaults(rm_params* params) {
    if (!params) return;
    const ramanmag::NVRates rates;
    const ramanmag::CavitySystem cavity;
    params->r31 = rates.r31;
    params->r42 = rates.r42;
    params->r35 = rates.r35;
    params->r45 = rates.r45;
    params->r51 = rates.r51;
    params->r52 = rates.r52;
    params->cross_section_cm2 = cavity.ensemble.cross_section_cm2;
    params->density_cm3 = cavity.ensemble.density_cm3;
    params->cavity_length_m = cavity.length_m;
    params->waist_m = cavity.waist_m;
    params->kappa_r_hz = cavity.loss_rate_hz;
    params->refractive_index = cavity.refractive_index;
    params->raman_gain_m_per_w = cavity.raman_gain_m_per_w;
    params->pump_wavelength_m = 620e-9;
    params->raman_wavelength_m = 676e-9;
}

rm_status rm_model_create(const rm_params* params, rm_model** model_out) {
    if (!params || !model_out) return invalid("rm_model_create: null argument");
    *model_out = nullptr;
    return guarded([&]() {
        auto model = std::make_unique<rm_model>();
        model->rates = {params->r31, params->r42, params->r35,
                        params->r45, params->r51, params->r52};
        model->cavity.length_m = params->cavity_length_m;
        model->cavity.waist_m = params->waist_m;
        model->cavity.loss_rate_hz = params->kappa_r_hz;
        model->cavity.refractive_index = params->refractive_index;
        model->cavity.raman_gain_m_per_w = params->raman_gain_m_per_w;
        model->cavity.pump_frequency_hz = ramanmag::speed_of_light / params->pump_wavelength_m;
        model->cavity.raman_frequency_hz = ramanmag::speed_of_light / params->raman_wavelength_m;
        model->cavity.ensemble = {params->cross_section_cm2, params->density_cm3};
        ramanmag::validate(model->rates);
        ramanmag::validate(model->cavity);
        *model_out = model.release();
    });
}

void rm_model_destroy(rm_model* model) { delete model; }

rm_status rm_steady_state(const rm_model* model, double rabi_hz, double detuning_hz,
                          double dephasing_hz, double pump_rate_hz, double state_out[7]) {
    if (!model || !state_out) return invalid("rm_steady_state: null argument");
    return guarded([&]() {
        const ramanmag::DriveField drive{rabi_hz, detuning_hz, dephasing_hz, pump_rate_hz};
        const auto state = ramanmag::steady_state(model->rates, drive).as_vector();
        std::memcpy(state_out, state.data(), sizeof(double) * 7);
    });
}

rm_status rm_time_evolve(const rm_model* model, double rabi_hz, double detuning_hz,
                         double dephasing_hz, double pump_rate_hz, const double state_in[7],
                         double duration_s, double rel_tol, double state_out[7]) {
    if (!model || !state_in || !state_out) return invalid("rm_time_evolve: null argument");
    return guarded([&]() {
        const ramanmag::DriveField drive{rabi_hz, detuning_hz, dephasing_hz, pump_rate_hz};
        ramanmag::DensityMatrixState initial;
        initial.pop = {state_in[0], state_in[1], state_in[2], state_in[3], state_in[4]};
        initial.coh_re = state_in[5];
        initial.coh_im = state_in[6];
        const auto final_state =
            ramanmag::time_evolve(model->rates, drive, initial, duration_s,
                                  rel_tol > 0 ? rel_tol : 1e-9)
                .as_vector();
        std::memcpy(state_out, final_state.data(), sizeof(double) * 7);
    });
}

double rm_ground_population(const double state[7]) {
    if (!state) return 0.0;
    return state[0] + state[1];
}

rm_status rm_absorption_per_m(const rm_model* model, double rho_g, double* beta_out) {
    if (!model || !beta_out) return invalid("rm_absorption_per_m: null argument");
    return guarded([&]() {
        *beta_out = ramanmag::absorption_coefficient_per_cm(model->cavity.ensemble, rho_g) *
                    ramanmag::per_cm_to_per_m;
    });
}

rm_status rm_pump_rate_hz(const rm_model* model, double pump_intensity_w_m2, double* rate_out) {
    if (!model || !rate_out) return invalid("rm_pump_rate_hz: null argument");
    return guarded(
        [&]() { *rate_out = ramanmag::pump_rate_from_intensity(model->cavity, pump_intensity_w_m2); });
}

rm_status rm_finesse(const rm_model* model, double* finesse_out) {
    if (!model || !finesse_out) return invalid("rm_finesse: null argument");
    return guarded([&]() { *finesse_out = ramanmag::finesse(model->cavity); });
}

rm_status rm_threshold_pump_w(const rm_model* model, double rabi_hz, double detuning_hz,
                              double dephasing_hz, double* power_out) {
    if (!model || !power_out) return invalid("rm_threshold_pump_w: null argument");
    return guarded([&]() {
        *power_out = ramanmag::threshold_pump(model->cavity, model->rates,
                                              {rabi_hz, detuning_hz, dephasing_hz});
    });
}

rm_status rm_laser_output_w(const rm_model* model, double rabi_hz, double detuning_hz,
                            double dephasing_hz, double pump_power_w, double* output_out,
                            double* beta_per_m_out, double* pump_rate_hz_out) {
    if (!model || !output_out) return invalid("rm_laser_output_w: null argument");
    return guarded([&]() {
        const ramanmag::LaserCurvePoint pt = ramanmag::solve_laser_point(
            model->cavity, model->rates, {rabi_hz, detuning_hz, dephasing_hz}, pump_power_w);
        *output_out = pt.output_power_w;
        if (beta_per_m_out) *beta_per_m_out = pt.beta_per_m;
        if (pump_rate_hz_out) *pump_rate_hz_out = pt.pump_rate_hz;
    });
}

rm_status rm_min_sensitivity(const rm_model* model, double rabi_hz, double dephasing_hz,
                             double pump_power_w, double* eta_out, double* detuning_opt_hz_out) {
    if (!model || !eta_out) return invalid("rm_min_sensitivity: null argument");
    return guarded([&]() {
        const double pump =
            pump_power_w > 0.0
                ? pump_power_w
                : ramanmag::threshold_pump(model->cavity, model->rates, {0.0, 0.0, dephasing_hz});
        const ramanmag::ResponseCurve curve =
            ramanmag::response_vs_detuning(model->cavity, model->rates, rabi_hz, dephasing_hz,
                                           pump, ramanmag::default_detuning_grid());
        const ramanmag::SensitivityResult res = ramanmag::sensitivity_curve(curve);
        *eta_out = res.eta_min;
        if (detuning_opt_hz_out) *detuning_opt_hz_out = res.detuning_opt_hz;
    });
}

rm_status rm_run_json(const char* config_json, const char* out_dir, int workers,
                      rm_report** report_out) {
    if (!config_json || !report_out) return invalid("rm_run_json: null argument");
    *report_out = nullptr;
    rm_status status = RM_OK;
    const rm_status rc = guarded([&]() {
        const ramanmag::ExperimentConfig config = ramanmag::parse_config(config_json);
        ramanmag::RunOutput output;
        const ramanmag::RunPaths paths =
            ramanmag::run(config, out_dir ? out_dir : ".", workers, &output);
        auto report = std::make_unique<rm_report>();
        report->task_count = static_cast<int>(output.tasks.size());
        report->failed = output.failed_tasks;
        report->passed = output.failed_tasks == 0 ? 1 : 0;
        report->text = "wrote " + paths.csv;
        if (output.failed_tasks > 0) {
            report->text += "; " + std::to_string(output.failed_tasks) + " task(s) failed";
            status = RM_ERR_TASK_FAILED;
            g_last_error = report->text;
        }
        *report_out = report.release();
    });
    return rc != RM_OK ? rc : status;
}

rm_status rm_preset_json(const char* name, char** json_out) {
    if (!name || !json_out) return invalid("rm_preset_json: null argument");
    *json_out = nullptr;
    return guarded([&]() {
        const std::string text = ramanmag::preset_config_json(name);
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *json_out = buf;
    });
}

rm_status rm_verify_json(const char* config_json, const char* baseline_csv_path, double rel_tol,
                         rm_report** report_out) {
    if (!config_json || !baseline_csv_path || !report_out)
        return invalid("rm_verify_json: null argument");
    *report_out = nullptr;
    return guarded([&]() {
        const ramanmag::ExperimentConfig config = ramanmag::parse_config(config_json);
        const ramanmag::VerifyReport vr =
            ramanmag::verify(config, baseline_csv_path, rel_tol > 0 ? rel_tol : 1e-6);
        auto report = std::make_unique<rm_report>();
        report->passed = vr.passed ? 1 : 0;
        report->text = vr.message;
        *report_out = report.release();
    });
}

int rm_report_task_count(const rm_report* report) { return report ? report->task_count : 0; }
int rm_report_failed_count(const rm_report* report) { return report ? report->failed : 0; }
int rm_report_passed(const rm_report* report) { return report ? report->passed : 0; }
const char* rm_report_text(const rm_report* report) { return report ? report->text.c_str() : ""; }
void rm_report_destroy(rm_report* report) { delete report; }

void rm_string_free(char* s) { delete[] s; }

}  // extern "C"
