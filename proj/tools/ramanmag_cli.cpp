// Command-line front end for the ramanmag shared library. Talks to the
// solver exclusively through the public C API.
//
// Exit codes: 0 success, 1 task failure or verification mismatch, 2 config
// or usage error.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ramanmag/ramanmag.h"

namespace {

int status_to_exit(rm_status status) {
    switch (status) {
        case RM_OK: return 0;
        case RM_ERR_PARSE:
        case RM_ERR_VALIDATION:
        case RM_ERR_INVALID_ARGUMENT: return 2;
        default: return 1;
    }
}

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

int run_config_text(const std::string& config_text, const std::string& out_dir, int workers) {
    rm_report* report = nullptr;
    const rm_status status = rm_run_json(config_text.c_str(), out_dir.c_str(), workers, &report);
    if (report) {
        std::printf("%s (%d task(s), %d failed)\n", rm_report_text(report),
                    rm_report_task_count(report), rm_report_failed_count(report));
        rm_report_destroy(report);
    }
    if (status != RM_OK) std::fprintf(stderr, "error: %s\n", rm_last_error());
    return status_to_exit(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ramanmag: NV-absorptive diamond Raman laser magnetometry sweeps"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(rm_version()));

    std::string config_path, out_dir = ".", preset_name, baseline_path;
    int workers = 0;
    double rtol = 1e-6;

    CLI::App* cmd_run = app.add_subcommand("run", "Run a sweep described by a JSON config");
    cmd_run->add_option("config", config_path, "Path to the JSON config")->required();
    cmd_run->add_option("--out", out_dir, "Output directory (default: .)");
    cmd_run->add_option("--workers", workers, "Worker threads (0: hardware concurrency)");

    CLI::App* cmd_preset = app.add_subcommand("preset", "Run a built-in sweep");
    cmd_preset
        ->add_option("name", preset_name,
                     "One of figure2, figure3a, figure3b, figure3c, figure3d, figure4a, figure4b")
        ->required();
    cmd_preset->add_option("--out", out_dir, "Output directory (default: .)");

    CLI::App* cmd_verify =
        app.add_subcommand("verify", "Re-run a config and compare against a baseline CSV");
    cmd_verify->add_option("config", config_path, "Path to the JSON config")->required();
    cmd_verify->add_option("baseline", baseline_path, "Baseline CSV to compare against")
        ->required();
    cmd_verify->add_option("--rtol", rtol, "Per-cell relative tolerance (default 1e-6)");

    CLI11_PARSE(app, argc, argv);

    if (cmd_run->parsed()) {
        std::string text;
        if (!read_file(config_path, text)) {
            std::fprintf(stderr, "error: cannot read config file '%s'\n", config_path.c_str());
            return 2;
        }
        return run_config_text(text, out_dir, workers);
    }

    if (cmd_preset->parsed()) {
        char* config_text = nullptr;
        const rm_status status = rm_preset_json(preset_name.c_str(), &config_text);
        if (status != RM_OK) {
            std::fprintf(stderr, "error: %s\n", rm_last_error());
            return status_to_exit(status);
        }
        const std::string text(config_text);
        rm_string_free(config_text);
        return run_config_text(text, out_dir, 0);
    }

    if (cmd_verify->parsed()) {
        std::string text;
        if (!read_file(config_path, text)) {
            std::fprintf(stderr, "error: cannot read config file '%s'\n", config_path.c_str());
            return 2;
        }
        rm_report* report = nullptr;
        const rm_status status = rm_verify_json(text.c_str(), baseline_path.c_str(), rtol, &report);
        if (status != RM_OK) {
            std::fprintf(stderr, "error: %s\n", rm_last_error());
            if (report) rm_report_destroy(report);
            return status_to_exit(status);
        }
        const bool passed = rm_report_passed(report) != 0;
        std::printf("%s: %s\n", passed ? "PASS" : "FAIL", rm_report_text(report));
        rm_report_destroy(report);
        return passed ? 0 : 1;
    }

    return 2;
}
