#pragma once

// Experiment loop: fixed-step RK4 that lands exactly on every impulse,
// pulse edge, record time and snapshot time.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "biofilm/config.hpp"
#include "biofilm/config_io.hpp"
#include "biofilm/grid.hpp"
#include "biofilm/integrator.hpp"
#include "biofilm/observe.hpp"
#include "biofilm/signals.hpp"

namespace biofilm {

/// Optional callbacks into the run loop.
struct RunHooks {
    /// Called immediately before and after the impulses at one event time
    /// are applied.
    std::function<void(const BiofilmState&, const Grid&, bool after)> on_impulse;
    /// Called at every record time, after the probes are sampled.
    std::function<void(const BiofilmState&, const Grid&)> on_record;
    /// Called at every snapshot time, after the snapshot is taken.
    std::function<void(const BiofilmState&, const Grid&)> on_snapshot;
};

namespace detail {

/// Times k * every in [0, limit], or [0, limit) when half_open, with the
/// last one snapped to limit when it lands within rounding of it.
inline std::vector<double> cadence(double every, double limit, bool half_open) {
    std::vector<double> out;
    const double slack = 1e-9 * every;
    for (std::size_t k = 0;; ++k) {
        double t = static_cast<double>(k) * every;
        if (std::abs(t - limit) <= slack) {
            if (!half_open) out.push_back(limit);
            break;
        }
        if (t > limit) break;
        out.push_back(t);
    }
    return out;
}

/// Forward-only cursor over a sorted list of times.
class Landmarks {
public:
    explicit Landmarks(std::vector<double> times) : times_(std::move(times)) {}

    double next() const { return i_ < times_.size() ? times_[i_] : std::numeric_limits<double>::infinity(); }
    bool at(double t) const { return i_ < times_.size() && times_[i_] == t; }
    void pop() { ++i_; }

private:
    std::vector<double> times_;
    std::size_t i_ = 0;
};

inline Snapshot take_snapshot(const BiofilmState& state, const Grid& g, const SnapshotSpec& spec) {
    Snapshot s;
    s.t = state.t;
    s.L = state.L;
    const std::size_t n = spec.raster_points;
    s.x.resize(n);
    s.K_e.resize(n);
    s.in_biofilm.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = spec.x_max * static_cast<double>(j) / static_cast<double>(n - 1);
        const ProbeValue v = sample_field(state, g, x, Field::K_e);
        s.x[j] = x;
        s.K_e[j] = v.value;
        s.in_biofilm[j] = !v.out_of_domain;
    }
    return s;
}

}  // namespace detail

inline BiofilmState initial_state(const Grid& g) {
    BiofilmState s;
    s.nodes.assign(g.n_nodes, initial_node_state());
    s.L = g.L;
    s.t = 0.0;
    return s;
}

/// Integrates the experiment from the standard initial condition to t_end.
/// Identical configs produce bit-identical trajectories.
inline Trajectory run(const ExperimentConfig& config, const RunHooks& hooks = {}) {
    validate(config);
    const Parameters& p = config.parameters;
    const StepControl& step = config.step;
    const InputSignal& glu = config.signals.glutamate;
    const InputSignal& pot = config.signals.potassium;
    const SourceMode mode = config.signals.source_mode;

    Grid g = make_grid(config.grid.dx, config.grid.initial_L);
    BiofilmState state = initial_state(g);

    Trajectory traj;
    traj.probes = config.probes;
    traj.params = p;
    traj.config_hash = config_hash(config);
    traj.stimulus_times = stimulus_times(config);

    std::vector<double> impulse_times;
    for (const Impulse& e : pending_impulses(pot, -1.0, step.t_end)) impulse_times.push_back(e.time);
    std::vector<double> edges = signal_breakpoints(glu);
    for (double t : signal_breakpoints(pot)) edges.push_back(t);
    std::sort(edges.begin(), edges.end());

    detail::Landmarks impulses(impulse_times);
    detail::Landmarks breakpoints(edges);
    detail::Landmarks records(detail::cadence(step.record_every, step.t_end, false));
    detail::Landmarks snapshots(config.snapshots.enabled ? detail::cadence(config.snapshots.every, step.t_end, true)
                                                         : std::vector<double>{});

    auto process_landmarks = [&](double t) {
        if (impulses.at(t)) {
            if (hooks.on_impulse) hooks.on_impulse(state, g, false);
            std::vector<double> K_e(state.nodes.size());
            for (std::size_t i = 0; i < K_e.size(); ++i) K_e[i] = state.nodes[i].K_e;
            apply_delta_source(K_e, g, pot.impulse_magnitude, mode);
            for (std::size_t i = 0; i < K_e.size(); ++i) state.nodes[i].K_e = K_e[i];
            impulses.pop();
            if (hooks.on_impulse) hooks.on_impulse(state, g, true);
        }
        while (breakpoints.at(t)) breakpoints.pop();
        if (records.at(t)) {
            for (std::size_t k = 0; k < config.probes.size(); ++k) {
                const Probe& probe = config.probes[k];
                const std::vector<ProbeValue> values = sample_probe(state, g, probe);
                for (std::size_t f = 0; f < probe.fields.size(); ++f)
                    traj.samples.push_back({t, k, probe.fields[f], values[f].value, values[f].out_of_domain});
            }
            traj.L_series.push_back({t, state.L});
            records.pop();
            if (hooks.on_record) hooks.on_record(state, g);
        }
        if (snapshots.at(t)) {
            traj.snapshots.push_back(detail::take_snapshot(state, g, config.snapshots));
            snapshots.pop();
            if (hooks.on_snapshot) hooks.on_snapshot(state, g);
        }
    };

    process_landmarks(0.0);
    const double merge_slack = 1e-9 * step.dt;
    while (state.t < step.t_end) {
        const double landmark = std::min({impulses.next(), breakpoints.next(), records.next(), snapshots.next(),
                                          step.t_end});
        double target = state.t + step.dt;
        if (target >= landmark - merge_slack) target = landmark;
        const double h = target - state.t;
        const double mid = state.t + 0.5 * h;
        state = rk4_step(state, h, g, p, continuous_rate(glu, mid), continuous_rate(pot, mid), mode, step.bounds);
        state.t = target;
        if (target == landmark) process_landmarks(target);
    }
    return traj;
}

struct ProbeMetrics {
    double x = 0.0;  // mm
    Field field = Field::K_e;
    PulseMetrics pulses;
    int oscillation_count = 0;
    std::vector<Interval> growth_arrest;
};

/// Configured metrics for every probe that records the metrics field.
inline std::vector<ProbeMetrics> compute_metrics(const Trajectory& traj, const ExperimentConfig& config) {
    const MetricsSpec& m = config.metrics;
    const std::vector<Interval> arrest =
        growth_arrest_intervals(traj.L_series, m.stall_fraction, first_stimulus_time(config));
    std::vector<ProbeMetrics> out;
    for (std::size_t k = 0; k < traj.probes.size(); ++k) {
        const auto& fields = traj.probes[k].fields;
        if (std::find(fields.begin(), fields.end(), m.field) == fields.end()) continue;
        const std::vector<SeriesPoint> series = traj.series(k, m.field);
        if (series.empty()) throw ValidationError("metrics", "trajectory has no samples");
        ProbeMetrics pm;
        pm.x = traj.probes[k].x;
        pm.field = m.field;
        pm.pulses = detect_peaks(series, m.min_prominence, m.baseline_window);
        pm.oscillation_count = count_oscillations(series, m.threshold, m.transient_skip);
        pm.growth_arrest = arrest;
        out.push_back(std::move(pm));
    }
    return out;
}

}  // namespace biofilm
