#pragma once

// JSON serialization of ExperimentConfig, config hashing and preset lookup.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "biofilm/config.hpp"
#include "biofilm/errors.hpp"

#ifndef BIOFILM_PRESET_DIR
#define BIOFILM_PRESET_DIR "presets"
#endif

namespace biofilm {

using Json = nlohmann::ordered_json;

inline constexpr std::pair<std::string_view, double Parameters::*> kParameterFields[] = {
    {"D_G", &Parameters::D_G},         {"D_K", &Parameters::D_K},         {"D_G_fl", &Parameters::D_G_fl},
    {"D_K_fl", &Parameters::D_K_fl},   {"G_0", &Parameters::G_0},         {"K_0", &Parameters::K_0},
    {"delta_G", &Parameters::delta_G}, {"V_t", &Parameters::V_t},         {"G_m", &Parameters::G_m},
    {"F", &Parameters::F},             {"g_K", &Parameters::g_K},         {"g_L", &Parameters::g_L},
    {"gamma_K", &Parameters::gamma_K}, {"K_m", &Parameters::K_m},         {"L_b", &Parameters::L_b},
    {"gamma_G", &Parameters::gamma_G}, {"r_b", &Parameters::r_b},         {"G_u", &Parameters::G_u},
    {"eta_V", &Parameters::eta_V},     {"gamma_V", &Parameters::gamma_V}, {"V_l", &Parameters::V_l},
    {"delta_g", &Parameters::delta_g}, {"eta_K", &Parameters::eta_K},     {"alpha", &Parameters::alpha},
    {"beta", &Parameters::beta},       {"m", &Parameters::m},             {"G_l", &Parameters::G_l},
    {"V_K0", &Parameters::V_K0},       {"V_L0", &Parameters::V_L0},       {"delta_K", &Parameters::delta_K},
    {"delta_L", &Parameters::delta_L},
};

namespace detail {

inline std::string join_path(const std::string& base, std::string_view key) {
    return base.empty() ? std::string(key) : base + "." + std::string(key);
}

/// Reads one JSON object, tracking the dotted path for error messages and
/// rejecting keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_.empty() ? "(root)" : path_, "must be an object");
    }

    const Json* find(std::string_view key) {
        seen_.insert(std::string(key));
        auto it = j_.find(std::string(key));
        return it == j_.end() ? nullptr : &*it;
    }

    std::string path(std::string_view key) const { return join_path(path_, key); }

    void number(std::string_view key, double& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number()) throw ValidationError(path(key), "must be a number");
            out = v->get<double>();
        }
    }

    void integer(std::string_view key, int& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number_integer()) throw ValidationError(path(key), "must be an integer");
            out = v->get<int>();
        }
    }

    void count(std::string_view key, std::size_t& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0)
                throw ValidationError(path(key), "must be a non-negative integer");
            out = v->get<std::size_t>();
        }
    }

    void boolean(std::string_view key, bool& out) {
        if (const Json* v = find(key)) {
            if (!v->is_boolean()) throw ValidationError(path(key), "must be true or false");
            out = v->get<bool>();
        }
    }

    void string(std::string_view key, std::string& out) {
        if (const Json* v = find(key)) {
            if (!v->is_string()) throw ValidationError(path(key), "must be a string");
            out = v->get<std::string>();
        }
    }

    void numbers(std::string_view key, std::vector<double>& out) {
        if (const Json* v = find(key)) {
            if (!v->is_array()) throw ValidationError(path(key), "must be an array of numbers");
            out.clear();
            for (const Json& e : *v) {
                if (!e.is_number()) throw ValidationError(path(key), "must be an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }

    /// Call after all reads.
    void reject_unknown() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ValidationError(path(it.key()), "unknown key");
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline Field field_from_json(const Json& v, const std::string& path) {
    if (!v.is_string()) throw ValidationError(path, "must be a field name");
    const auto f = parse_field(v.get<std::string>());
    if (!f) throw ValidationError(path, "unknown field '" + v.get<std::string>() + "'");
    return *f;
}

inline InputSignal signal_from_json(const Json& j, const std::string& path) {
    ObjectReader r(j, path);
    InputSignal s;
    std::string kind = "constant_supply";
    r.string("kind", kind);
    if (kind == "constant_supply") {
        s.kind = SignalKind::constant_supply;
        r.number("rate", s.rate);
    } else if (kind == "impulse_train") {
        s.kind = SignalKind::impulse_train;
        r.number("impulse_magnitude", s.impulse_magnitude);
        r.numbers("event_times", s.event_times);
    } else if (kind == "pulse_train") {
        s.kind = SignalKind::pulse_train;
        r.number("rate", s.rate);
        r.numbers("event_times", s.event_times);
        r.number("width", s.width);
        r.number("period", s.period);
        r.integer("count", s.count);
    } else {
        throw ValidationError(r.path("kind"), "unknown signal kind '" + kind + "'");
    }
    r.reject_unknown();
    return s;
}

inline Json signal_to_json(const InputSignal& s) {
    Json j;
    j["kind"] = std::string(signal_kind_name(s.kind));
    switch (s.kind) {
        case SignalKind::constant_supply: j["rate"] = s.rate; break;
        case SignalKind::impulse_train:
            j["impulse_magnitude"] = s.impulse_magnitude;
            j["event_times"] = s.event_times;
            break;
        case SignalKind::pulse_train:
            j["rate"] = s.rate;
            j["event_times"] = s.event_times;
            j["width"] = s.width;
            j["period"] = s.period;
            j["count"] = s.count;
            break;
    }
    return j;
}

}  // namespace detail

/// Builds a config from a parsed document and validates it. Missing keys
/// keep their defaults.
inline ExperimentConfig config_from_json(const Json& doc) {
    using detail::ObjectReader;
    ExperimentConfig c;
    ObjectReader root(doc, "");
    root.string("scenario", c.scenario);
    root.string("notes", c.notes);
    root.boolean("allow_unusual", c.allow_unusual);

    if (const Json* j = root.find("parameters")) {
        ObjectReader r(*j, "parameters");
        for (const auto& [name, member] : kParameterFields) r.number(name, c.parameters.*member);
        r.reject_unknown();
    }
    if (const Json* j = root.find("grid")) {
        ObjectReader r(*j, "grid");
        r.number("dx", c.grid.dx);
        r.number("initial_L", c.grid.initial_L);
        r.reject_unknown();
    }
    if (const Json* j = root.find("step")) {
        ObjectReader r(*j, "step");
        r.number("dt", c.step.dt);
        r.number("cfl_safety", c.step.cfl_safety);
        r.number("t_end", c.step.t_end);
        r.number("record_every", c.step.record_every);
        std::string bounds(bounds_policy_name(c.step.bounds));
        r.string("bounds", bounds);
        if (bounds == "strict") c.step.bounds = BoundsPolicy::strict;
        else if (bounds == "project") c.step.bounds = BoundsPolicy::project;
        else throw ValidationError("step.bounds", "must be 'strict' or 'project'");
        r.reject_unknown();
    }
    if (const Json* j = root.find("signals")) {
        ObjectReader r(*j, "signals");
        std::string mode = c.signals.source_mode == SourceMode::mass ? "mass" : "concentration";
        r.string("source_mode", mode);
        if (mode == "concentration") c.signals.source_mode = SourceMode::concentration;
        else if (mode == "mass") c.signals.source_mode = SourceMode::mass;
        else throw ValidationError("signals.source_mode", "must be 'concentration' or 'mass'");
        if (const Json* g = r.find("glutamate")) c.signals.glutamate = detail::signal_from_json(*g, "signals.glutamate");
        if (const Json* k = r.find("potassium")) c.signals.potassium = detail::signal_from_json(*k, "signals.potassium");
        r.reject_unknown();
    }
    if (const Json* j = root.find("probes")) {
        if (!j->is_array()) throw ValidationError("probes", "must be an array");
        c.probes.clear();
        for (std::size_t i = 0; i < j->size(); ++i) {
            const std::string path = "probes[" + std::to_string(i) + "]";
            ObjectReader r((*j)[i], path);
            Probe p;
            r.number("x", p.x);
            if (const Json* f = r.find("fields")) {
                if (!f->is_array()) throw ValidationError(path + ".fields", "must be an array of field names");
                p.fields.clear();
                for (const Json& e : *f) p.fields.push_back(detail::field_from_json(e, path + ".fields"));
            }
            r.reject_unknown();
            c.probes.push_back(std::move(p));
        }
    }
    if (const Json* j = root.find("snapshots")) {
        ObjectReader r(*j, "snapshots");
        r.boolean("enabled", c.snapshots.enabled);
        r.number("every", c.snapshots.every);
        r.count("raster_points", c.snapshots.raster_points);
        r.number("x_max", c.snapshots.x_max);
        r.reject_unknown();
    }
    if (const Json* j = root.find("metrics")) {
        ObjectReader r(*j, "metrics");
        if (const Json* f = r.find("field")) c.metrics.field = detail::field_from_json(*f, "metrics.field");
        r.number("min_prominence", c.metrics.min_prominence);
        r.number("baseline_window", c.metrics.baseline_window);
        r.number("threshold", c.metrics.threshold);
        r.number("transient_skip", c.metrics.transient_skip);
        r.number("stall_fraction", c.metrics.stall_fraction);
        r.reject_unknown();
    }
    if (const Json* j = root.find("outputs")) {
        ObjectReader r(*j, "outputs");
        r.string("timeseries_path", c.outputs.timeseries_path);
        r.string("spacetime_path", c.outputs.spacetime_path);
        r.string("metrics_path", c.outputs.metrics_path);
        r.string("svg_path", c.outputs.svg_path);
        r.reject_unknown();
    }
    if (const Json* j = root.find("sweep")) {
        ObjectReader r(*j, "sweep");
        r.numbers("periods", c.sweep_periods);
        r.reject_unknown();
    }
    root.reject_unknown();
    validate(c);
    return c;
}

inline Json config_to_json(const ExperimentConfig& c) {
    Json j;
    j["scenario"] = c.scenario;
    j["notes"] = c.notes;
    j["allow_unusual"] = c.allow_unusual;
    Json params;
    for (const auto& [name, member] : kParameterFields) params[std::string(name)] = c.parameters.*member;
    j["parameters"] = params;
    j["grid"] = {{"dx", c.grid.dx}, {"initial_L", c.grid.initial_L}};
    j["step"] = {{"dt", c.step.dt},
                 {"cfl_safety", c.step.cfl_safety},
                 {"t_end", c.step.t_end},
                 {"record_every", c.step.record_every},
                 {"bounds", std::string(bounds_policy_name(c.step.bounds))}};
    j["signals"] = {{"source_mode", c.signals.source_mode == SourceMode::mass ? "mass" : "concentration"},
                    {"glutamate", detail::signal_to_json(c.signals.glutamate)},
                    {"potassium", detail::signal_to_json(c.signals.potassium)}};
    Json probes = Json::array();
    for (const Probe& p : c.probes) {
        Json fields = Json::array();
        for (Field f : p.fields) fields.push_back(std::string(field_name(f)));
        probes.push_back({{"x", p.x}, {"fields", fields}});
    }
    j["probes"] = probes;
    j["snapshots"] = {{"enabled", c.snapshots.enabled},
                      {"every", c.snapshots.every},
                      {"raster_points", c.snapshots.raster_points},
                      {"x_max", c.snapshots.x_max}};
    j["metrics"] = {{"field", std::string(field_name(c.metrics.field))},
                    {"min_prominence", c.metrics.min_prominence},
                    {"baseline_window", c.metrics.baseline_window},
                    {"threshold", c.metrics.threshold},
                    {"transient_skip", c.metrics.transient_skip},
                    {"stall_fraction", c.metrics.stall_fraction}};
    j["outputs"] = {{"timeseries_path", c.outputs.timeseries_path},
                    {"spacetime_path", c.outputs.spacetime_path},
                    {"metrics_path", c.outputs.metrics_path},
                    {"svg_path", c.outputs.svg_path}};
    j["sweep"] = {{"periods", c.sweep_periods}};
    return j;
}

inline ExperimentConfig parse_config(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    return config_from_json(doc);
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

inline ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

inline void save_config(const ExperimentConfig& c, const std::filesystem::path& path) {
    write_text_file(path, config_to_json(c).dump(2) + "\n");
}

/// FNV-1a 64 of the canonical JSON form, excluding output paths.
inline std::string config_hash(const ExperimentConfig& c) {
    Json j = config_to_json(c);
    j.erase("outputs");
    const std::string text = j.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::filesystem::path default_preset_dir() { return BIOFILM_PRESET_DIR; }

/// Committed configuration for a named experiment, read from <dir>/<name>.json.
inline ExperimentConfig preset(std::string_view name, const std::filesystem::path& dir = default_preset_dir()) {
    if (!is_preset_name(name)) {
        std::string known;
        for (std::string_view n : kPresetNames) known += (known.empty() ? "" : ", ") + std::string(n);
        throw UnknownPreset("unknown preset '" + std::string(name) + "' (known: " + known + ")");
    }
    ExperimentConfig c = load_config(dir / (std::string(name) + ".json"));
    if (c.scenario != name)
        throw ValidationError("scenario", "preset file '" + std::string(name) + "' declares scenario '" + c.scenario + "'");
    return c;
}

}  // namespace biofilm
