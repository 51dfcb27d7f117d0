#pragma once

// Byte-deterministic file outputs: probe CSV, space-time CSV, metrics JSON
// and a static SVG line chart.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "biofilm/config.hpp"
#include "biofilm/config_io.hpp"
#include "biofilm/errors.hpp"
#include "biofilm/observe.hpp"
#include "biofilm/run.hpp"

namespace biofilm {

inline constexpr int kSignificantDigits = 9;

/// Fixed-point text with 9 significant digits counted from the integer part,
/// e.g. 0 -> "0.00000000", 10 -> "10.0000000", -156 -> "-156.000000".
inline std::string format_fixed9(double v) {
    if (!std::isfinite(v)) throw ValidationError("value", "cannot format a non-finite number");
    auto render = [](double x, int decimals) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
        return std::string(buf);
    };
    auto integer_digits = [](const std::string& s) {
        const std::size_t start = s[0] == '-' ? 1 : 0;
        const std::size_t dot = s.find('.');
        return static_cast<int>((dot == std::string::npos ? s.size() : dot) - start);
    };
    const double mag = std::abs(v);
    int digits = mag < 1.0 ? 1 : static_cast<int>(std::floor(std::log10(mag))) + 1;
    std::string s = render(v, std::max(0, kSignificantDigits - digits));
    // Rounding can carry into a new integer digit (9.9999999999 -> 10.00000000).
    const int actual = integer_digits(s);
    if (actual != digits) s = render(v, std::max(0, kSignificantDigits - actual));
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

inline std::string timeseries_csv(const Trajectory& traj) {
    if (traj.samples.empty()) throw ValidationError("trajectory", "no samples to write");
    std::string out = "t_hr,probe_x_mm,field,value,out_of_domain\n";
    for (const ProbeSample& s : traj.samples) {
        out += format_fixed9(s.t);
        out += ',';
        out += format_fixed9(traj.probes.at(s.probe).x);
        out += ',';
        out += field_name(s.field);
        out += ',';
        out += format_fixed9(s.value);
        out += s.out_of_domain ? ",true\n" : ",false\n";
    }
    return out;
}

inline void emit_timeseries_csv(const Trajectory& traj, const std::filesystem::path& path) {
    write_text_file(path, timeseries_csv(traj));
}

/// One row of a parsed timeseries CSV.
struct CsvRow {
    double t = 0.0;
    double x = 0.0;
    Field field = Field::K_e;
    double value = 0.0;
    bool out_of_domain = false;
};

inline std::vector<CsvRow> parse_timeseries_csv(std::string_view text) {
    std::vector<CsvRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "t_hr,probe_x_mm,field,value,out_of_domain")
        throw ParseError("timeseries CSV: unexpected header");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) throw ParseError("timeseries CSV line " + std::to_string(lineno) + ": expected 5 cells");
        const auto field = parse_field(cells[2]);
        if (!field || (cells[4] != "true" && cells[4] != "false"))
            throw ParseError("timeseries CSV line " + std::to_string(lineno) + ": bad field or flag");
        rows.push_back({std::strtod(cells[0].c_str(), nullptr), std::strtod(cells[1].c_str(), nullptr), *field,
                        std::strtod(cells[3].c_str(), nullptr), cells[4] == "true"});
    }
    return rows;
}

/// Requires snapshots. One row per (snapshot, raster point).
inline std::string spacetime_csv(const Trajectory& traj) {
    if (traj.snapshots.empty()) throw ValidationError("snapshots", "no snapshots recorded");
    std::string out = "t_hr,x_mm,K_e_mM,in_biofilm\n";
    for (const Snapshot& s : traj.snapshots) {
        const std::string t = format_fixed9(s.t);
        for (std::size_t j = 0; j < s.x.size(); ++j) {
            out += t;
            out += ',';
            out += format_fixed9(s.x[j]);
            out += ',';
            out += format_fixed9(s.K_e[j]);
            out += s.in_biofilm[j] ? ",true\n" : ",false\n";
        }
    }
    return out;
}

inline void emit_spacetime_csv(const Trajectory& traj, const std::filesystem::path& path) {
    write_text_file(path, spacetime_csv(traj));
}

inline Json metrics_json(const std::vector<ProbeMetrics>& metrics, const ExperimentConfig& config,
                         const Trajectory& traj) {
    if (traj.samples.empty()) throw ValidationError("trajectory", "no samples to summarize");
    Json doc;
    doc["scenario"] = config.scenario;
    doc["config_hash"] = traj.config_hash;
    doc["final_L_mm"] = traj.L_series.empty() ? 0.0 : traj.L_series.back().L;
    Json probes = Json::array();
    for (const ProbeMetrics& m : metrics) {
        Json p;
        p["x_mm"] = m.x;
        p["field"] = std::string(field_name(m.field));
        p["baseline"] = m.pulses.baseline;
        p["peak_times"] = m.pulses.peak_times;
        p["amplitudes"] = m.pulses.peak_amplitudes;
        p["attenuation_ratios"] = m.pulses.attenuation_ratios;
        const double mean = mean_attenuation_ratio(m.pulses);
        p["mean_attenuation_ratio"] = std::isfinite(mean) ? Json(mean) : Json(nullptr);
        p["oscillation_count"] = m.oscillation_count;
        Json intervals = Json::array();
        for (const Interval& iv : m.growth_arrest) intervals.push_back(Json::array({iv.start, iv.end}));
        p["growth_arrest_intervals"] = intervals;
        probes.push_back(p);
    }
    doc["probes"] = probes;
    return doc;
}

inline void emit_metrics_json(const std::vector<ProbeMetrics>& metrics, const ExperimentConfig& config,
                              const Trajectory& traj, const std::filesystem::path& path) {
    const std::string text = metrics_json(metrics, config, traj).dump(2) + "\n";
    write_text_file(path, text);
}

namespace detail {

inline std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

/// Round tick step (1, 2 or 5 times a power of ten) giving about n ticks.
inline double tick_step(double span, int n) {
    const double raw = span / n;
    const double base = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0})
        if (m * base >= raw) return m * base;
    return 10.0 * base;
}

inline std::string tick_label(double v, double step) {
    const int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

}  // namespace detail

/// Line chart of one field at one probe, with dashed markers at stimulus
/// times.
inline std::string svg_plot(const Trajectory& traj, Field field, std::size_t probe) {
    const std::vector<SeriesPoint> s = traj.series(probe, field);
    if (s.empty()) throw ValidationError("svg", "no samples for the requested probe and field");

    constexpr double W = 720, H = 420, left = 80, right = 20, top = 40, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    double t0 = s.front().t, t1 = s.back().t;
    if (t1 <= t0) t1 = t0 + 1.0;
    double lo = s.front().value, hi = lo;
    for (const SeriesPoint& p : s) {
        lo = std::min(lo, p.value);
        hi = std::max(hi, p.value);
    }
    if (hi - lo < 1e-12) {
        lo -= 1.0;
        hi += 1.0;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    auto X = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };
    auto Y = [&](double v) { return top + (hi - v) / (hi - lo) * ph; };
    using detail::fmt2;

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(W) + "\" height=\"" + fmt2(H) +
           "\" viewBox=\"0 0 " + fmt2(W) + " " + fmt2(H) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const std::string name(field_name(field));
    const std::string unit(field_unit(field));
    out += "<text x=\"" + fmt2(W / 2) + "\" y=\"24.00\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\">" + name + " at x = " + format_fixed9(traj.probes.at(probe).x) + " mm</text>\n";

    // Axes and ticks.
    out += "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
    out += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top + ph) + "\" x2=\"" + fmt2(left + pw) + "\" y2=\"" +
           fmt2(top + ph) + "\"/>\n";
    out += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top) + "\" x2=\"" + fmt2(left) + "\" y2=\"" +
           fmt2(top + ph) + "\"/>\n";
    out += "</g>\n";
    out += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    const double tx = detail::tick_step(t1 - t0, 8);
    for (double t = std::ceil(t0 / tx) * tx; t <= t1 + 1e-9 * tx; t += tx) {
        out += "<line x1=\"" + fmt2(X(t)) + "\" y1=\"" + fmt2(top + ph) + "\" x2=\"" + fmt2(X(t)) + "\" y2=\"" +
               fmt2(top + ph + 5) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + fmt2(X(t)) + "\" y=\"" + fmt2(top + ph + 18) + "\" text-anchor=\"middle\">" +
               detail::tick_label(t, tx) + "</text>\n";
    }
    const double ty = detail::tick_step(hi - lo, 6);
    for (double v = std::ceil(lo / ty) * ty; v <= hi + 1e-9 * ty; v += ty) {
        out += "<line x1=\"" + fmt2(left - 5) + "\" y1=\"" + fmt2(Y(v)) + "\" x2=\"" + fmt2(left) + "\" y2=\"" +
               fmt2(Y(v)) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + fmt2(left - 8) + "\" y=\"" + fmt2(Y(v) + 4) + "\" text-anchor=\"end\">" +
               detail::tick_label(v, ty) + "</text>\n";
    }
    out += "</g>\n";
    out += "<text x=\"" + fmt2(left + pw / 2) + "\" y=\"" + fmt2(H - 15) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">time (hr)</text>\n";
    out += "<text x=\"18.00\" y=\"" + fmt2(top + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 18.00 " + fmt2(top + ph / 2) + ")\">" + name + " (" + unit +
           ")</text>\n";

    // Stimulus markers.
    for (double ts : traj.stimulus_times) {
        if (ts < t0 || ts > t1) continue;
        out += "<line class=\"stimulus\" x1=\"" + fmt2(X(ts)) + "\" y1=\"" + fmt2(top) + "\" x2=\"" + fmt2(X(ts)) +
               "\" y2=\"" + fmt2(top + ph) + "\" stroke=\"firebrick\" stroke-dasharray=\"4 3\"/>\n";
    }

    out += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ' ';
        out += fmt2(X(s[i].t)) + "," + fmt2(Y(s[i].value));
    }
    out += "\"/>\n</svg>\n";
    return out;
}

inline void emit_svg_plot(const Trajectory& traj, Field field, std::size_t probe, const std::filesystem::path& path) {
    write_text_file(path, svg_plot(traj, field, probe));
}

/// Writes every output the config enables.
inline void emit_all(const Trajectory& traj, const ExperimentConfig& config) {
    const std::vector<ProbeMetrics> metrics = compute_metrics(traj, config);
    emit_timeseries_csv(traj, config.outputs.timeseries_path);
    emit_metrics_json(metrics, config, traj, config.outputs.metrics_path);
    if (!config.outputs.spacetime_path.empty()) emit_spacetime_csv(traj, config.outputs.spacetime_path);
    if (!config.outputs.svg_path.empty()) emit_svg_plot(traj, config.metrics.field, 0, config.outputs.svg_path);
}

}  // namespace biofilm
