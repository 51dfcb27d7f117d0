#pragma once

// Experiment description: everything a run needs, plus where to write it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "biofilm/errors.hpp"
#include "biofilm/grid.hpp"
#include "biofilm/integrator.hpp"
#include "biofilm/observe.hpp"
#include "biofilm/signals.hpp"
#include "biofilm/types.hpp"

namespace biofilm {

inline constexpr std::array<std::string_view, 6> kPresetNames = {"quench-off", "quench-on",  "impulse",
                                                                 "impulse-train", "spacetime", "pulse-train"};

inline bool is_preset_name(std::string_view name) {
    return std::find(kPresetNames.begin(), kPresetNames.end(), name) != kPresetNames.end();
}

struct GridSpec {
    double dx = 0.05;         // mm
    double initial_L = 1.5;   // mm

    bool operator==(const GridSpec&) const = default;
};

struct SignalSet {
    InputSignal glutamate;
    InputSignal potassium;
    SourceMode source_mode = SourceMode::concentration;

    bool operator==(const SignalSet&) const = default;
};

/// Full-field K_e snapshots on a fixed raster over [0, x_max], taken at
/// t = k * every for t in [0, t_end).
struct SnapshotSpec {
    bool enabled = false;
    double every = 1.0;              // hr
    std::size_t raster_points = 100;
    double x_max = 1.0;              // mm

    bool operator==(const SnapshotSpec&) const = default;
};

struct MetricsSpec {
    Field field = Field::K_e;
    double min_prominence = 1.0;   // mM
    double baseline_window = 5.0;  // hr
    double threshold = 5.0;        // mM above baseline
    double transient_skip = 2.0;   // hr
    double stall_fraction = 0.25;

    bool operator==(const MetricsSpec&) const = default;
};

/// Output paths. An empty optional path disables that output.
struct OutputSpec {
    std::string timeseries_path = "timeseries.csv";
    std::string spacetime_path;
    std::string metrics_path = "metrics.json";
    std::string svg_path;

    bool operator==(const OutputSpec&) const = default;
};

inline StepControl default_step_control() {
    StepControl s;
    s.dt = 2.5e-4;
    s.t_end = 30.0;
    s.record_every = 0.01;
    s.bounds = BoundsPolicy::project;
    return s;
}

/// Defaults describe the unsupplied quench experiment.
struct ExperimentConfig {
    std::string scenario;
    std::string notes;
    Parameters parameters;
    bool allow_unusual = false;
    GridSpec grid;
    StepControl step = default_step_control();
    SignalSet signals;
    std::vector<Probe> probes{Probe{1.125, {Field::K_e, Field::V}}};
    SnapshotSpec snapshots;
    MetricsSpec metrics;
    OutputSpec outputs;
    std::vector<double> sweep_periods;  // hr, pulse-train period sweep

    bool operator==(const ExperimentConfig&) const = default;
};

/// Earliest potassium stimulus (impulse or pulse start), or +inf.
inline double first_stimulus_time(const ExperimentConfig& c) {
    const InputSignal& k = c.signals.potassium;
    if (k.kind == SignalKind::impulse_train && !k.event_times.empty()) return k.event_times.front();
    if (k.kind == SignalKind::pulse_train && k.count > 0) return k.event_times.front();
    return std::numeric_limits<double>::infinity();
}

/// Impulse times and pulse starts of the potassium input.
inline std::vector<double> stimulus_times(const ExperimentConfig& c) {
    const InputSignal& k = c.signals.potassium;
    std::vector<double> out;
    if (k.kind == SignalKind::impulse_train) out = k.event_times;
    if (k.kind == SignalKind::pulse_train)
        for (int i = 0; i < k.count; ++i) out.push_back(pulse_start(k, i));
    return out;
}

inline void validate(const ExperimentConfig& c) {
    if (!c.scenario.empty() && !is_preset_name(c.scenario))
        throw ValidationError("scenario", "unknown preset '" + c.scenario + "'");
    validate(c.parameters, c.allow_unusual);
    make_grid(c.grid.dx, c.grid.initial_L);
    validate(c.step, c.grid.dx, c.parameters);

    validate(c.signals.glutamate, "signals.glutamate");
    validate(c.signals.potassium, "signals.potassium");
    if (c.signals.glutamate.kind == SignalKind::impulse_train)
        throw ValidationError("signals.glutamate.kind", "glutamate is supplied continuously; impulses are not supported");

    if (c.probes.empty()) throw ValidationError("probes", "at least one probe is required");
    for (std::size_t i = 0; i < c.probes.size(); ++i) {
        const std::string path = "probes[" + std::to_string(i) + "]";
        const Probe& p = c.probes[i];
        if (!(p.x >= 0.0) || !std::isfinite(p.x)) throw ValidationError(path + ".x", "must be finite and >= 0");
        if (p.fields.empty()) throw ValidationError(path + ".fields", "must name at least one field");
        for (std::size_t a = 0; a < p.fields.size(); ++a)
            for (std::size_t b = a + 1; b < p.fields.size(); ++b)
                if (p.fields[a] == p.fields[b]) throw ValidationError(path + ".fields", "duplicate field");
    }

    if (c.snapshots.enabled) {
        if (!(c.snapshots.every > 0.0) || !std::isfinite(c.snapshots.every))
            throw ValidationError("snapshots.every", "must be > 0");
        if (c.snapshots.raster_points < 2) throw ValidationError("snapshots.raster_points", "must be >= 2");
        if (!(c.snapshots.x_max > 0.0) || !std::isfinite(c.snapshots.x_max))
            throw ValidationError("snapshots.x_max", "must be > 0");
    }

    const MetricsSpec& m = c.metrics;
    const std::pair<const char*, double> nonnegative[] = {{"metrics.min_prominence", m.min_prominence},
                                                          {"metrics.baseline_window", m.baseline_window},
                                                          {"metrics.threshold", m.threshold},
                                                          {"metrics.transient_skip", m.transient_skip}};
    for (const auto& [name, value] : nonnegative)
        if (!(value >= 0.0) || !std::isfinite(value)) throw ValidationError(name, "must be finite and >= 0");
    if (!(m.stall_fraction >= 0.0 && m.stall_fraction <= 1.0))
        throw ValidationError("metrics.stall_fraction", "must lie in [0, 1]");

    if (c.outputs.timeseries_path.empty()) throw ValidationError("outputs.timeseries_path", "must not be empty");
    if (c.outputs.metrics_path.empty()) throw ValidationError("outputs.metrics_path", "must not be empty");
    if (c.snapshots.enabled && c.outputs.spacetime_path.empty())
        throw ValidationError("outputs.spacetime_path", "required when snapshots are enabled");
    if (!c.snapshots.enabled && !c.outputs.spacetime_path.empty())
        throw ValidationError("outputs.spacetime_path", "snapshots are disabled");

    for (double T : c.sweep_periods) {
        if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("sweep.periods", "periods must be > 0");
        if (c.signals.potassium.kind == SignalKind::pulse_train && T < c.signals.potassium.width)
            throw ValidationError("sweep.periods", "periods must be >= the pulse width");
    }
}

}  // namespace biofilm
