#include "sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "errors.hpp"
#include "version.hpp"

namespace ramanmag {

namespace fs = std::filesystem;
using nlohmann::json;

const char* sweep_kind_name(SweepKind kind) {
    switch (kind) {
        case SweepKind::laser_curve: return "laser_curve";
        case SweepKind::response: return "response";
        case SweepKind::threshold_shift: return "threshold_shift";
        case SweepKind::sensitivity: return "sensitivity";
    }
    return "?";
}

CavitySystem ExperimentConfig::cavity_for(double kappa_hz_value) const {
    CavitySystem sys;
    sys.length_m = length_m;
    sys.waist_m = waist_m;
    sys.loss_rate_hz = kappa_hz_value;
    sys.refractive_index = refractive_index;
    sys.raman_gain_m_per_w = raman_gain_m_per_w;
    sys.pump_frequency_hz = speed_of_light / pump_wavelength_m;
    sys.raman_frequency_hz = speed_of_light / raman_wavelength_m;
    sys.ensemble = ensemble;
    return sys;
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

enum class Dim { frequency, power, length, gain, cross_section, density };

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError(path + ": " + what);
}

double unit_factor(const std::string& unit, Dim dim, const std::string& path) {
    struct Entry {
        const char* name;
        double factor;
    };
    static const Entry frequency[] = {{"Hz", 1.0},     {"kHz", 1e3},    {"MHz", 1e6},
                                      {"GHz", 1e9},    {"s^-1", 1.0},   {"ms^-1", 1e3},
                                      {"us^-1", 1e6},  {"µs^-1", 1e6}};
    static const Entry power[] = {{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}, {"µW", 1e-6}, {"kW", 1e3}};
    static const Entry length[] = {{"m", 1.0},  {"cm", 1e-2},  {"mm", 1e-3},
                                   {"um", 1e-6}, {"µm", 1e-6}, {"nm", 1e-9}};
    static const Entry gain[] = {{"m/W", 1.0}, {"cm/W", 1e-2}, {"m/GW", 1e-9}, {"cm/GW", 1e-11}};
    static const Entry cross_section[] = {{"cm^2", 1.0}, {"m^2", 1e4}};
    static const Entry density[] = {{"cm^-3", 1.0}, {"m^-3", 1e-6}};

    const Entry* table = nullptr;
    std::size_t n = 0;
    switch (dim) {
        case Dim::frequency: table = frequency; n = std::size(frequency); break;
        case Dim::power: table = power; n = std::size(power); break;
        case Dim::length: table = length; n = std::size(length); break;
        case Dim::gain: table = gain; n = std::size(gain); break;
        case Dim::cross_section: table = cross_section; n = std::size(cross_section); break;
        case Dim::density: table = density; n = std::size(density); break;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (unit == table[i].name) return table[i].factor;
    }
    fail(path, "unknown unit '" + unit + "'");
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
}

double parse_quantity(const json& j, const std::string& path, Dim dim) {
    if (!j.is_object()) fail(path, "expected {\"value\": number, \"unit\": string}");
    check_keys(j, path, {"value", "unit"});
    if (!j.contains("value") || !j.at("value").is_number()) fail(path + ".value", "expected a number");
    if (!j.contains("unit") || !j.at("unit").is_string())
        fail(path + ".unit", "unit must be declared");
    const double v = j.at("value").get<double>() *
                     unit_factor(j.at("unit").get<std::string>(), dim, path + ".unit");
    if (!std::isfinite(v)) fail(path + ".value", "not finite");
    return v;
}

std::vector<double> parse_quantity_list(const json& j, const std::string& path, Dim dim) {
    std::vector<double> out;
    if (j.is_array()) {
        if (j.empty()) fail(path, "empty");
        out.reserve(j.size());
        for (std::size_t i = 0; i < j.size(); ++i)
            out.push_back(parse_quantity(j[i], path + "[" + std::to_string(i) + "]", dim));
    } else {
        out.push_back(parse_quantity(j, path, dim));
    }
    return out;
}

void require_positive(const std::vector<double>& v, const std::string& path) {
    for (double x : v)
        if (!(x > 0.0)) fail(path, "values must be > 0");
}

void require_nonnegative(const std::vector<double>& v, const std::string& path) {
    for (double x : v)
        if (!(x >= 0.0)) fail(path, "values must be >= 0");
}

void require_ascending(const std::vector<double>& v, const std::string& path) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (!(v[i] < v[i + 1])) fail(path, "values must be strictly ascending");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!root.is_object()) throw ParseError("config: top level must be a JSON object");

    check_keys(root, "", {"sweep", "cavity", "ensemble", "rates", "drive", "pump",
                          "sensitivity_output", "output_convention", "detection_efficiency",
                          "workers", "output"});

    ExperimentConfig cfg;

    if (!root.contains("sweep") || !root.at("sweep").is_string()) fail("sweep", "required string");
    const std::string kind = root.at("sweep").get<std::string>();
    if (kind == "laser_curve") cfg.kind = SweepKind::laser_curve;
    else if (kind == "response") cfg.kind = SweepKind::response;
    else if (kind == "threshold_shift") cfg.kind = SweepKind::threshold_shift;
    else if (kind == "sensitivity") cfg.kind = SweepKind::sensitivity;
    else fail("sweep", "unknown sweep kind '" + kind + "'");

    cfg.kappa_hz = {75e6};
    if (root.contains("cavity")) {
        const json& c = root.at("cavity");
        if (!c.is_object()) fail("cavity", "expected object");
        check_keys(c, "cavity", {"length", "waist", "kappa_r", "refractive_index", "raman_gain",
                                 "pump_wavelength", "raman_wavelength"});
        if (c.contains("length")) cfg.length_m = parse_quantity(c["length"], "cavity.length", Dim::length);
        if (c.contains("waist")) cfg.waist_m = parse_quantity(c["waist"], "cavity.waist", Dim::length);
        if (c.contains("kappa_r"))
            cfg.kappa_hz = parse_quantity_list(c["kappa_r"], "cavity.kappa_r", Dim::frequency);
        if (c.contains("refractive_index")) {
            if (!c["refractive_index"].is_number()) fail("cavity.refractive_index", "expected a number");
            cfg.refractive_index = c["refractive_index"].get<double>();
        }
        if (c.contains("raman_gain"))
            cfg.raman_gain_m_per_w = parse_quantity(c["raman_gain"], "cavity.raman_gain", Dim::gain);
        if (c.contains("pump_wavelength"))
            cfg.pump_wavelength_m =
                parse_quantity(c["pump_wavelength"], "cavity.pump_wavelength", Dim::length);
        if (c.contains("raman_wavelength"))
            cfg.raman_wavelength_m =
                parse_quantity(c["raman_wavelength"], "cavity.raman_wavelength", Dim::length);
    }
    require_positive(cfg.kappa_hz, "cavity.kappa_r");

    if (root.contains("ensemble")) {
        const json& e = root.at("ensemble");
        if (!e.is_object()) fail("ensemble", "expected object");
        check_keys(e, "ensemble", {"cross_section", "density"});
        if (e.contains("cross_section"))
            cfg.ensemble.cross_section_cm2 =
                parse_quantity(e["cross_section"], "ensemble.cross_section", Dim::cross_section);
        if (e.contains("density"))
            cfg.ensemble.density_cm3 = parse_quantity(e["density"], "ensemble.density", Dim::density);
    }

    if (root.contains("rates")) {
        const json& r = root.at("rates");
        if (!r.is_object()) fail("rates", "expected object");
        check_keys(r, "rates", {"r31", "r42", "r35", "r45", "r51", "r52"});
        auto rate = [&](const char* key, double& slot) {
            if (r.contains(key)) slot = parse_quantity(r[key], std::string("rates.") + key, Dim::frequency);
        };
        rate("r31", cfg.rates.r31);
        rate("r42", cfg.rates.r42);
        rate("r35", cfg.rates.r35);
        rate("r45", cfg.rates.r45);
        rate("r51", cfg.rates.r51);
        rate("r52", cfg.rates.r52);
    }

    cfg.rabi_hz = {18e6};
    cfg.dephasing_hz = {1e6};
    bool detuning_given = false;
    json detuning_json;
    if (root.contains("drive")) {
        const json& d = root.at("drive");
        if (!d.is_object()) fail("drive", "expected object");
        check_keys(d, "drive", {"rabi", "dephasing", "detuning"});
        if (d.contains("rabi")) {
            if (d["rabi"].is_array() && d["rabi"].empty()) fail("drive.rabi", "empty");
            cfg.rabi_hz = parse_quantity_list(d["rabi"], "drive.rabi", Dim::frequency);
        }
        if (d.contains("dephasing")) {
            if (d["dephasing"].is_array() && d["dephasing"].empty()) fail("drive.dephasing", "empty");
            cfg.dephasing_hz = parse_quantity_list(d["dephasing"], "drive.dephasing", Dim::frequency);
        }
        if (d.contains("detuning")) {
            detuning_given = true;
            detuning_json = d.at("detuning");
        }
    }
    require_nonnegative(cfg.rabi_hz, "drive.rabi");
    require_nonnegative(cfg.dephasing_hz, "drive.dephasing");

    switch (cfg.kind) {
        case SweepKind::laser_curve:
            cfg.detuning_hz = {0.0};
            if (detuning_given)
                cfg.detuning_hz = parse_quantity_list(detuning_json, "drive.detuning", Dim::frequency);
            break;
        case SweepKind::response:
        case SweepKind::sensitivity:
            cfg.detuning_hz = default_detuning_grid();
            if (detuning_given) {
                if (detuning_json.is_string() && detuning_json.get<std::string>() == "default") {
                    // keep the default grid
                } else {
                    cfg.detuning_hz =
                        parse_quantity_list(detuning_json, "drive.detuning", Dim::frequency);
                }
                require_nonnegative(cfg.detuning_hz, "drive.detuning");
                require_ascending(cfg.detuning_hz, "drive.detuning");
                if (cfg.detuning_hz.size() < 4) fail("drive.detuning", "need at least 4 points");
            }
            break;
        case SweepKind::threshold_shift:
            if (detuning_given) fail("drive.detuning", "not applicable to threshold_shift sweeps");
            break;
    }

    if (root.contains("pump")) {
        if (cfg.kind == SweepKind::threshold_shift)
            fail("pump", "not applicable to threshold_shift sweeps");
        const json& p = root.at("pump");
        if (!p.is_object()) fail("pump", "expected object");
        check_keys(p, "pump", {"grid", "rule"});
        if (p.contains("grid") == p.contains("rule"))
            fail("pump", "exactly one of 'grid' or 'rule' is required");
        if (p.contains("rule")) {
            if (!p["rule"].is_string() || p["rule"].get<std::string>() != "mw_off_threshold")
                fail("pump.rule", "the only supported rule is 'mw_off_threshold'");
            if (cfg.kind == SweepKind::laser_curve)
                fail("pump.rule", "laser_curve sweeps need an explicit pump grid");
            cfg.pump_rule_mw_off = true;
        } else {
            if (p["grid"].is_array() && p["grid"].empty()) fail("pump.grid", "empty");
            cfg.pump_w = parse_quantity_list(p["grid"], "pump.grid", Dim::power);
            require_nonnegative(cfg.pump_w, "pump.grid");
            require_ascending(cfg.pump_w, "pump.grid");
        }
    } else {
        switch (cfg.kind) {
            case SweepKind::laser_curve: fail("pump", "required for laser_curve sweeps");
            case SweepKind::response:
            case SweepKind::sensitivity: cfg.pump_rule_mw_off = true; break;
            case SweepKind::threshold_shift: break;
        }
    }
    if (cfg.kind == SweepKind::sensitivity) {
        if (cfg.kappa_hz.size() != 1) fail("cavity.kappa_r", "sensitivity sweeps take a single value");
        if (!cfg.pump_rule_mw_off) {
            if (cfg.pump_w.size() != 1) fail("pump.grid", "sensitivity sweeps take a single pump power");
            require_positive(cfg.pump_w, "pump.grid");
        }
    }

    if (root.contains("sensitivity_output")) {
        const json& s = root.at("sensitivity_output");
        if (!s.is_string()) fail("sensitivity_output", "expected 'minimum' or 'curve'");
        const std::string v = s.get<std::string>();
        if (v == "curve") cfg.sensitivity_emit_curve = true;
        else if (v == "minimum") cfg.sensitivity_emit_curve = false;
        else fail("sensitivity_output", "expected 'minimum' or 'curve'");
    }
    if (root.contains("output_convention")) {
        const json& s = root.at("output_convention");
        if (!s.is_string()) fail("output_convention", "expected 'total' or 'single_mirror'");
        const std::string v = s.get<std::string>();
        if (v == "single_mirror") cfg.single_mirror_output = true;
        else if (v == "total") cfg.single_mirror_output = false;
        else fail("output_convention", "expected 'total' or 'single_mirror'");
    }
    if (root.contains("detection_efficiency")) {
        if (!root["detection_efficiency"].is_number())
            fail("detection_efficiency", "expected a number");
        cfg.detection_efficiency = root["detection_efficiency"].get<double>();
        if (!(cfg.detection_efficiency > 0.0 && cfg.detection_efficiency <= 1.0))
            fail("detection_efficiency", "must lie in (0, 1]");
    }
    if (root.contains("workers")) {
        if (!root["workers"].is_number_integer()) fail("workers", "expected an integer");
        cfg.workers = root["workers"].get<int>();
        if (cfg.workers < 0) fail("workers", "must be >= 0");
    }
    if (root.contains("output")) {
        const json& o = root.at("output");
        if (!o.is_object()) fail("output", "expected object");
        check_keys(o, "output", {"csv", "summary", "manifest"});
        auto name = [&](const char* key, std::string& slot) {
            if (o.contains(key)) {
                if (!o[key].is_string() || o[key].get<std::string>().empty())
                    fail(std::string("output.") + key, "expected a non-empty file name");
                slot = o[key].get<std::string>();
            }
        };
        name("csv", cfg.csv_name);
        name("summary", cfg.summary_name);
        name("manifest", cfg.manifest_name);
    }

    // Scalar sanity via the core validators.
    validate(cfg.rates);
    validate(cfg.cavity_for(cfg.kappa_hz.front()));
    return cfg;
}

// ---------------------------------------------------------------------------
// serialization / hashing / presets

namespace {

json quantity(double value, const char* unit) { return json{{"value", value}, {"unit", unit}}; }

json quantity_list(const std::vector<double>& values, const char* unit) {
    json arr = json::array();
    for (double v : values) arr.push_back(quantity(v, unit));
    return arr;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
    json j;
    j["sweep"] = sweep_kind_name(c.kind);
    j["cavity"] = {{"length", quantity(c.length_m, "m")},
                   {"waist", quantity(c.waist_m, "m")},
                   {"kappa_r", quantity_list(c.kappa_hz, "Hz")},
                   {"refractive_index", c.refractive_index},
                   {"raman_gain", quantity(c.raman_gain_m_per_w, "m/W")},
                   {"pump_wavelength", quantity(c.pump_wavelength_m, "m")},
                   {"raman_wavelength", quantity(c.raman_wavelength_m, "m")}};
    j["ensemble"] = {{"cross_section", quantity(c.ensemble.cross_section_cm2, "cm^2")},
                     {"density", quantity(c.ensemble.density_cm3, "cm^-3")}};
    j["rates"] = {{"r31", quantity(c.rates.r31, "s^-1")}, {"r42", quantity(c.rates.r42, "s^-1")},
                  {"r35", quantity(c.rates.r35, "s^-1")}, {"r45", quantity(c.rates.r45, "s^-1")},
                  {"r51", quantity(c.rates.r51, "s^-1")}, {"r52", quantity(c.rates.r52, "s^-1")}};
    json drive = {{"rabi", quantity_list(c.rabi_hz, "Hz")},
                  {"dephasing", quantity_list(c.dephasing_hz, "Hz")}};
    if (c.kind != SweepKind::threshold_shift)
        drive["detuning"] = quantity_list(c.detuning_hz, "Hz");
    j["drive"] = std::move(drive);
    if (c.pump_rule_mw_off)
        j["pump"] = {{"rule", "mw_off_threshold"}};
    else if (!c.pump_w.empty())
        j["pump"] = {{"grid", quantity_list(c.pump_w, "W")}};
    j["sensitivity_output"] = c.sensitivity_emit_curve ? "curve" : "minimum";
    j["output_convention"] = c.single_mirror_output ? "single_mirror" : "total";
    j["detection_efficiency"] = c.detection_efficiency;
    j["workers"] = c.workers;
    j["output"] = {{"csv", c.csv_name}, {"summary", c.summary_name}, {"manifest", c.manifest_name}};
    return j;
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string canonical = to_json(config).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json mhz_list(std::vector<double> values_mhz) {
    json arr = json::array();
    for (double v : values_mhz) arr.push_back(quantity(v, "MHz"));
    return arr;
}

std::vector<double> rabi_scan_mhz() {
    std::vector<double> v;
    for (double x = 2; x <= 40; x += 2) v.push_back(x);
    for (double x = 45; x <= 100; x += 5) v.push_back(x);
    for (double x = 110; x <= 200; x += 10) v.push_back(x);
    return v;
}

std::vector<double> rabi_scan_fine_mhz() {
    std::vector<double> v;
    for (double x = 1; x <= 30; x += 1) v.push_back(x);
    for (double x = 32; x <= 60; x += 2) v.push_back(x);
    for (double x = 65; x <= 100; x += 5) v.push_back(x);
    for (double x = 110; x <= 200; x += 10) v.push_back(x);
    return v;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"figure2", "figure3a", "figure3b", "figure3c", "figure3d", "figure4a", "figure4b"};
}

std::string preset_config_json(const std::string& name) {
    json j;
    if (name == "figure2") {
        std::vector<double> pump_mw;
        for (double p = 0; p <= 450; p += 5) pump_mw.push_back(p);
        json grid = json::array();
        for (double p : pump_mw) grid.push_back(quantity(p, "mW"));
        j = {{"sweep", "laser_curve"},
             {"cavity", {{"kappa_r", mhz_list({75})}}},
             {"drive",
              {{"rabi", mhz_list({0, 18})},
               {"dephasing", mhz_list({1})},
               {"detuning", mhz_list({0, 25, 50, 100, 150, 200})}}},
             {"pump", {{"grid", grid}}}};
    } else if (name == "figure3a") {
        j = {{"sweep", "threshold_shift"},
             {"cavity", {{"kappa_r", mhz_list({75, 110, 145, 180, 215, 250})}}},
             {"drive", {{"rabi", mhz_list(rabi_scan_mhz())}, {"dephasing", mhz_list({1})}}}};
    } else if (name == "figure3b") {
        j = {{"sweep", "response"},
             {"cavity", {{"kappa_r", mhz_list({75})}}},
             {"drive",
              {{"rabi", mhz_list({5, 10, 18, 30, 50, 100})},
               {"dephasing", mhz_list({1})},
               {"detuning", "default"}}},
             {"pump", {{"rule", "mw_off_threshold"}}}};
    } else if (name == "figure3c") {
        j = {{"sweep", "threshold_shift"},
             {"cavity", {{"kappa_r", mhz_list({75})}}},
             {"drive", {{"rabi", mhz_list(rabi_scan_mhz())}, {"dephasing", mhz_list({0.1, 1, 10})}}}};
    } else if (name == "figure3d") {
        j = {{"sweep", "response"},
             {"cavity", {{"kappa_r", mhz_list({75})}}},
             {"drive",
              {{"rabi", mhz_list({18})},
               {"dephasing", mhz_list({0.1, 1, 10})},
               {"detuning", "default"}}},
             {"pump", {{"rule", "mw_off_threshold"}}}};
    } else if (name == "figure4a") {
        j = {{"sweep", "sensitivity"},
             {"sensitivity_output", "curve"},
             {"cavity", {{"kappa_r", mhz_list({75})}}},
             {"drive",
              {{"rabi", mhz_list({18})}, {"dephasing", mhz_list({1})}, {"detuning", "default"}}},
             {"pump", {{"rule", "mw_off_threshold"}}}};
    } else if (name == "figure4b") {
        j = {{"sweep", "sensitivity"},
             {"sensitivity_output", "minimum"},
             {"cavity", {{"kappa_r", mhz_list({75})}}},
             {"drive",
              {{"rabi", mhz_list(rabi_scan_fine_mhz())},
               {"dephasing", mhz_list({0.1, 1, 10})},
               {"detuning", "default"}}},
             {"pump", {{"rule", "mw_off_threshold"}}}};
    } else {
        throw ValidationError("preset: unknown name '" + name + "'");
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// execution

namespace {

struct TaskOutcome {
    std::vector<std::vector<double>> rows;
    json summary;
    std::string skip;  // nonempty -> flagged, no rows
};

struct Task {
    std::string name;
    std::function<TaskOutcome()> fn;
};

std::string describe(std::initializer_list<std::pair<const char*, double>> fields) {
    std::string s;
    char buf[64];
    for (const auto& [key, value] : fields) {
        std::snprintf(buf, sizeof buf, "%s%s=%g", s.empty() ? "" : " ", key, value);
        s += buf;
    }
    return s;
}

double resolve_pump(const ExperimentConfig& cfg, const CavitySystem& sys, double dephasing_hz) {
    if (!cfg.pump_rule_mw_off) return cfg.pump_w.front();
    return threshold_pump(sys, cfg.rates, MwDrive{0.0, 0.0, dephasing_hz});
}

std::vector<Task> build_tasks(const ExperimentConfig& cfg, std::vector<std::string>& columns) {
    std::vector<Task> tasks;
    const SensitivityOptions sens_opts{cfg.detection_efficiency, cfg.single_mirror_output, 0.1e6};

    switch (cfg.kind) {
        case SweepKind::laser_curve: {
            columns = {"kappa_r_hz", "rabi_hz",        "gamma_g_hz", "detuning_hz",
                       "pump_power_w", "output_power_w", "beta_per_m", "lambda_p_hz"};
            for (double kappa : cfg.kappa_hz)
                for (double rabi : cfg.rabi_hz)
                    for (double gamma : cfg.dephasing_hz)
                        for (double det : cfg.detuning_hz) {
                            Task t;
                            t.name = describe({{"kappa_r_hz", kappa},
                                               {"rabi_hz", rabi},
                                               {"gamma_g_hz", gamma},
                                               {"detuning_hz", det}});
                            t.fn = [=, &cfg]() {
                                const CavitySystem sys = cfg.cavity_for(kappa);
                                const MwDrive mw{rabi, det, gamma};
                                TaskOutcome out;
                                double max_output = 0.0;
                                for (const LaserCurvePoint& p :
                                     laser_curve(sys, cfg.rates, mw, cfg.pump_w)) {
                                    out.rows.push_back({kappa, rabi, gamma, det, p.pump_power_w,
                                                        p.output_power_w, p.beta_per_m,
                                                        p.pump_rate_hz});
                                    max_output = std::max(max_output, p.output_power_w);
                                }
                                out.summary = {{"kappa_r_hz", kappa},
                                               {"rabi_hz", rabi},
                                               {"gamma_g_hz", gamma},
                                               {"detuning_hz", det},
                                               {"threshold_w", threshold_pump(sys, cfg.rates, mw)},
                                               {"max_output_w", max_output}};
                                return out;
                            };
                            tasks.push_back(std::move(t));
                        }
            break;
        }
        case SweepKind::response: {
            columns = {"kappa_r_hz", "rabi_hz",        "gamma_g_hz", "detuning_hz",
                       "pump_power_w", "output_power_w", "beta_per_m", "lambda_p_hz"};
            const std::size_t pump_dims = cfg.pump_rule_mw_off ? 1 : cfg.pump_w.size();
            for (double kappa : cfg.kappa_hz)
                for (double rabi : cfg.rabi_hz)
                    for (double gamma : cfg.dephasing_hz)
                        for (std::size_t ip = 0; ip < pump_dims; ++ip) {
                            Task t;
                            t.name = describe({{"kappa_r_hz", kappa},
                                               {"rabi_hz", rabi},
                                               {"gamma_g_hz", gamma}});
                            t.fn = [=, &cfg]() {
                                const CavitySystem sys = cfg.cavity_for(kappa);
                                const double pump = cfg.pump_rule_mw_off
                                                        ? resolve_pump(cfg, sys, gamma)
                                                        : cfg.pump_w[ip];
                                TaskOutcome out;
                                double peak = 0.0;
                                for (double det : cfg.detuning_hz) {
                                    const LaserCurvePoint p = solve_laser_point(
                                        sys, cfg.rates, MwDrive{rabi, det, gamma}, pump);
                                    out.rows.push_back({kappa, rabi, gamma, det, p.pump_power_w,
                                                        p.output_power_w, p.beta_per_m,
                                                        p.pump_rate_hz});
                                    peak = std::max(peak, p.output_power_w);
                                }
                                out.summary = {{"kappa_r_hz", kappa},
                                               {"rabi_hz", rabi},
                                               {"gamma_g_hz", gamma},
                                               {"pump_power_w", pump},
                                               {"peak_output_w", peak}};
                                return out;
                            };
                            tasks.push_back(std::move(t));
                        }
            break;
        }
        case SweepKind::threshold_shift: {
            columns = {"kappa_r_hz",           "rabi_hz",           "gamma_g_hz",
                       "threshold_resonant_w", "threshold_detuned_w", "shift_percent"};
            for (double kappa : cfg.kappa_hz)
                for (double gamma : cfg.dephasing_hz)
                    for (double rabi : cfg.rabi_hz) {
                        Task t;
                        t.name = describe({{"kappa_r_hz", kappa},
                                           {"rabi_hz", rabi},
                                           {"gamma_g_hz", gamma}});
                        t.fn = [=, &cfg]() {
                            const CavitySystem sys = cfg.cavity_for(kappa);
                            const double p_res =
                                threshold_pump(sys, cfg.rates, MwDrive{rabi, 0.0, gamma});
                            const double p_det =
                                threshold_pump(sys, cfg.rates, MwDrive{rabi, 200e6, gamma});
                            const double shift = 100.0 * (p_det - p_res) / p_res;
                            TaskOutcome out;
                            out.rows.push_back({kappa, rabi, gamma, p_res, p_det, shift});
                            out.summary = {{"kappa_r_hz", kappa},      {"rabi_hz", rabi},
                                           {"gamma_g_hz", gamma},      {"threshold_resonant_w", p_res},
                                           {"threshold_detuned_w", p_det}, {"shift_percent", shift}};
                            return out;
                        };
                        tasks.push_back(std::move(t));
                    }
            break;
        }
        case SweepKind::sensitivity: {
            columns = {"rabi_hz", "gamma_g_hz", "detuning_hz", "output_power_w",
                       "eta_t_per_sqrt_hz"};
            const double kappa = cfg.kappa_hz.front();
            for (double gamma : cfg.dephasing_hz)
                for (double rabi : cfg.rabi_hz) {
                    Task t;
                    t.name = describe(
                        {{"kappa_r_hz", kappa}, {"rabi_hz", rabi}, {"gamma_g_hz", gamma}});
                    t.fn = [=, &cfg]() {
                        const CavitySystem sys = cfg.cavity_for(kappa);
                        const double pump = resolve_pump(cfg, sys, gamma);
                        TaskOutcome out;
                        try {
                            const ResponseCurve curve = response_vs_detuning(
                                sys, cfg.rates, rabi, gamma, pump, cfg.detuning_hz);
                            const SensitivityResult res = sensitivity_curve(curve, sens_opts);
                            if (cfg.sensitivity_emit_curve) {
                                for (const SensitivityPoint& pt : res.curve) {
                                    if (!std::isfinite(pt.eta)) continue;
                                    out.rows.push_back(
                                        {rabi, gamma, pt.detuning_hz, pt.output_w, pt.eta});
                                }
                            } else {
                                out.rows.push_back({rabi, gamma, res.detuning_opt_hz,
                                                    res.output_opt_w, res.eta_min});
                            }
                            out.summary = {{"rabi_hz", rabi},
                                           {"gamma_g_hz", gamma},
                                           {"pump_power_w", pump},
                                           {"eta_min_t_per_sqrt_hz", res.eta_min},
                                           {"detuning_opt_hz", res.detuning_opt_hz},
                                           {"field_opt_t", res.field_opt_t}};
                        } catch (const DegenerateCurve& e) {
                            out.skip = e.what();
                            out.summary = {{"rabi_hz", rabi},
                                           {"gamma_g_hz", gamma},
                                           {"pump_power_w", pump},
                                           {"skipped", e.what()}};
                        }
                        return out;
                    };
                    tasks.push_back(std::move(t));
                }
            break;
        }
    }
    return tasks;
}

}  // namespace

RunOutput execute(const ExperimentConfig& config, int workers_override) {
    RunOutput output;
    std::vector<Task> tasks = build_tasks(config, output.columns);

    unsigned n_workers = 0;
    if (workers_override > 0) n_workers = static_cast<unsigned>(workers_override);
    else if (config.workers > 0) n_workers = static_cast<unsigned>(config.workers);
    else n_workers = std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(n_workers, std::max<std::size_t>(tasks.size(), 1));

    std::vector<TaskOutcome> outcomes(tasks.size());
    std::vector<std::string> statuses(tasks.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                outcomes[i] = tasks[i].fn();
                statuses[i] = outcomes[i].skip.empty() ? "ok" : "skipped: " + outcomes[i].skip;
            } catch (const std::exception& e) {
                statuses[i] = std::string("error: ") + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& th : pool) th.join();

    json entries = json::array();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        output.tasks.push_back({tasks[i].name, statuses[i]});
        if (statuses[i].rfind("error:", 0) == 0) {
            ++output.failed_tasks;
            entries.push_back({{"task", tasks[i].name}, {"error", statuses[i]}});
            continue;
        }
        for (auto& row : outcomes[i].rows) output.rows.push_back(std::move(row));
        if (!outcomes[i].summary.is_null()) entries.push_back(std::move(outcomes[i].summary));
    }

    output.summary = {{"sweep", sweep_kind_name(config.kind)},
                      {"task_count", tasks.size()},
                      {"failed_tasks", output.failed_tasks},
                      {"entries", std::move(entries)}};

    if (config.kind == SweepKind::sensitivity) {
        double best = std::numeric_limits<double>::infinity();
        json best_entry;
        for (const json& e : output.summary["entries"]) {
            if (!e.contains("eta_min_t_per_sqrt_hz")) continue;
            const double eta = e["eta_min_t_per_sqrt_hz"].get<double>();
            if (eta < best) {
                best = eta;
                best_entry = e;
            }
        }
        if (!best_entry.is_null()) output.summary["best"] = best_entry;
    }
    return output;
}

// ---------------------------------------------------------------------------
// file output

namespace {

std::string fmt_cell(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out.flush()) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path.string() + " (" + ec.message() + ")");
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string format_csv(const RunOutput& output) {
    std::string s;
    for (std::size_t c = 0; c < output.columns.size(); ++c) {
        if (c) s += ',';
        s += output.columns[c];
    }
    s += '\n';
    for (const auto& row : output.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) s += ',';
            s += fmt_cell(row[c]);
        }
        s += '\n';
    }
    return s;
}

RunPaths run(const ExperimentConfig& config, const std::string& out_dir, int workers_override,
             RunOutput* output_out) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutput output = execute(config, workers_override);
    const double wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir.string());

    RunPaths paths;
    paths.csv = (dir / config.csv_name).string();
    paths.summary = (dir / config.summary_name).string();
    paths.manifest = (dir / config.manifest_name).string();

    write_atomic(paths.csv, format_csv(output));
    write_atomic(paths.summary, output.summary.dump(2) + "\n");

    json tasks = json::array();
    for (const TaskStatus& t : output.tasks) tasks.push_back({{"task", t.name}, {"status", t.status}});
    const json manifest = {{"config_hash", config_hash(config)},
                           {"version", project_version},
                           {"timestamp", utc_timestamp()},
                           {"wall_time_s", wall_s},
                           {"task_count", output.tasks.size()},
                           {"failed_tasks", output.failed_tasks},
                           {"tasks", std::move(tasks)}};
    write_atomic(paths.manifest, manifest.dump(2) + "\n");

    if (output_out) *output_out = std::move(output);
    return paths;
}

// ---------------------------------------------------------------------------
// verify

VerifyReport verify(const ExperimentConfig& config, const std::string& baseline_csv_path,
                    double rel_tol) {
    std::ifstream in(baseline_csv_path, std::ios::binary);
    if (!in) throw BaselineMissing("baseline CSV not found: " + baseline_csv_path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) return {false, "baseline CSV is empty"};

    const RunOutput current = execute(config);
    if (current.failed_tasks > 0)
        return {false, "re-run had " + std::to_string(current.failed_tasks) + " failed task(s)"};

    std::string header;
    for (std::size_t c = 0; c < current.columns.size(); ++c) {
        if (c) header += ',';
        header += current.columns[c];
    }
    if (lines[0] != header)
        return {false, "header mismatch: baseline '" + lines[0] + "' vs current '" + header + "'"};

    if (lines.size() - 1 != current.rows.size())
        return {false, "row count mismatch: baseline " + std::to_string(lines.size() - 1) +
                           " vs current " + std::to_string(current.rows.size())};

    for (std::size_t r = 0; r < current.rows.size(); ++r) {
        std::stringstream ss(lines[r + 1]);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= current.columns.size())
                return {false, "row " + std::to_string(r + 1) + ": too many columns"};
            const double baseline = std::strtod(cell.c_str(), nullptr);
            const double ours = current.rows[r][c];
            const double mag = std::max(std::abs(baseline), std::abs(ours));
            const double rel = (mag == 0.0) ? 0.0 : std::abs(baseline - ours) / mag;
            if (!(rel <= rel_tol)) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "row %zu, column %s: baseline %.12e, current %.12e, relative "
                              "difference %.3e exceeds %.3e",
                              r + 1, current.columns[c].c_str(), baseline, ours, rel, rel_tol);
                return {false, buf};
            }
            ++c;
        }
        if (c != current.columns.size())
            return {false, "row " + std::to_string(r + 1) + ": too few columns"};
    }
    return {true, "match within relative tolerance " + fmt_cell(rel_tol)};
}

}  // namespace ramanmag
