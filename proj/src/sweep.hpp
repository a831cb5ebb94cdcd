#ifndef RAMANMAG_SWEEP_HPP
#define RAMANMAG_SWEEP_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magnetometry.hpp"

namespace ramanmag {

enum class SweepKind { laser_curve, response, threshold_shift, sensitivity };

const char* sweep_kind_name(SweepKind kind);

// A fully validated experiment description. Parsing converts every quantity
// to internal units (s^-1, W, m; ensemble in cm^2 / cm^-3) and fills paper
// defaults for everything omitted.
struct ExperimentConfig {
    SweepKind kind = SweepKind::laser_curve;

    double length_m = 100e-6;
    double waist_m = 5e-6;
    double refractive_index = 2.4;
    double raman_gain_m_per_w = 14.75 * cm_per_gw_to_m_per_w;
    double pump_wavelength_m = 620e-9;
    double raman_wavelength_m = 676e-9;
    NVEnsemble ensemble;
    NVRates rates;

    std::vector<double> kappa_hz;      // cavity loss rates
    std::vector<double> rabi_hz;       // MW drive strengths
    std::vector<double> dephasing_hz;  // ground-state dephasing rates
    std::vector<double> detuning_hz;   // detuning grid (sweep-kind dependent)

    std::vector<double> pump_w;  // pump power grid; empty when a rule is used
    bool pump_rule_mw_off = false;

    bool sensitivity_emit_curve = false;  // minimum-only rows otherwise
    bool single_mirror_output = false;
    double detection_efficiency = 1.0;
    int workers = 0;  // 0: hardware concurrency

    std::string csv_name = "results.csv";
    std::string summary_name = "summary.json";
    std::string manifest_name = "manifest.json";

    bool operator==(const ExperimentConfig&) const = default;

    CavitySystem cavity_for(double kappa_hz_value) const;
};

// Strict parser: unknown keys and missing unit declarations are errors.
ExperimentConfig parse_config(const std::string& text);

nlohmann::json to_json(const ExperimentConfig& config);

// FNV-1a over the canonical serialized config.
std::string config_hash(const ExperimentConfig& config);

// Built-in parameter sets reproducing the standard sweeps; throws
// ValidationError for unknown names.
std::string preset_config_json(const std::string& name);
std::vector<std::string> preset_names();

struct TaskStatus {
    std::string name;
    std::string status;  // "ok", "skipped: ..." or "error: ..."
};

// In-memory result of a sweep: one table plus a summary document.
struct RunOutput {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json summary;
    std::vector<TaskStatus> tasks;
    int failed_tasks = 0;
};

// Fans the sweep out over a worker pool. Row order and values are
// independent of the worker count.
RunOutput execute(const ExperimentConfig& config, int workers_override = 0);

struct RunPaths {
    std::string csv;
    std::string summary;
    std::string manifest;
};

// execute + write CSV/summary/manifest (atomically) under out_dir.
RunPaths run(const ExperimentConfig& config, const std::string& out_dir,
             int workers_override = 0, RunOutput* output_out = nullptr);

struct VerifyReport {
    bool passed = false;
    std::string message;
};

// Re-runs the config and compares against a baseline CSV with a per-cell
// relative tolerance; reports the first divergence.
VerifyReport verify(const ExperimentConfig& config, const std::string& baseline_csv_path,
                    double rel_tol = 1e-6);

std::string format_csv(const RunOutput& output);

}  // namespace ramanmag

#endif
