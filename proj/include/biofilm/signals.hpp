#pragma once

// Stimulation applied at x = 0.

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biofilm/errors.hpp"
#include "biofilm/grid.hpp"

namespace biofilm {

enum class SignalKind { constant_supply, impulse_train, pulse_train };

inline constexpr std::string_view signal_kind_name(SignalKind k) {
    switch (k) {
        case SignalKind::constant_supply: return "constant_supply";
        case SignalKind::impulse_train: return "impulse_train";
        case SignalKind::pulse_train: return "pulse_train";
    }
    return "?";
}

/// How a point source at x = 0 is put on the grid.
enum class SourceMode {
    /// The amount (or rate) is a concentration increment at node 0.
    concentration,
    /// The amount is a mass per unit cross-section, spread over one cell.
    mass,
};

struct InputSignal {
    SignalKind kind = SignalKind::constant_supply;
    double rate = 0.0;               // mM/hr, constant_supply and pulse_train
    double impulse_magnitude = 0.0;  // mM, impulse_train
    std::vector<double> event_times; // hr; impulse times, or the single pulse-train start
    double width = 0.0;              // hr, pulse_train
    double period = 0.0;             // hr, pulse_train
    int count = 0;                   // pulse_train

    bool operator==(const InputSignal&) const = default;

    static InputSignal none() { return {}; }
    static InputSignal constant(double rate) {
        InputSignal s;
        s.rate = rate;
        return s;
    }
    static InputSignal impulses(double magnitude, std::vector<double> times) {
        InputSignal s;
        s.kind = SignalKind::impulse_train;
        s.impulse_magnitude = magnitude;
        s.event_times = std::move(times);
        return s;
    }
    static InputSignal pulses(double rate, double start, double width, double period, int count) {
        InputSignal s;
        s.kind = SignalKind::pulse_train;
        s.rate = rate;
        s.event_times = {start};
        s.width = width;
        s.period = period;
        s.count = count;
        return s;
    }
};

inline void validate(const InputSignal& s, const std::string& path) {
    if (!(s.rate >= 0.0) || !std::isfinite(s.rate)) throw ValidationError(path + ".rate", "must be >= 0");
    if (!(s.impulse_magnitude >= 0.0) || !std::isfinite(s.impulse_magnitude))
        throw ValidationError(path + ".impulse_magnitude", "must be >= 0");
    for (std::size_t i = 0; i < s.event_times.size(); ++i) {
        if (!std::isfinite(s.event_times[i]) || s.event_times[i] < 0.0)
            throw ValidationError(path + ".event_times", "times must be finite and >= 0");
        if (i > 0 && !(s.event_times[i] > s.event_times[i - 1]))
            throw ValidationError(path + ".event_times", "must be strictly increasing");
    }
    if (s.kind == SignalKind::pulse_train) {
        if (s.event_times.size() != 1)
            throw ValidationError(path + ".event_times", "pulse_train takes exactly one start time");
        if (!(s.width > 0.0)) throw ValidationError(path + ".width", "must be > 0");
        if (!(s.period >= s.width)) throw ValidationError(path + ".period", "must be >= width");
        if (s.count < 0) throw ValidationError(path + ".count", "must be >= 0");
    }
}

/// Start time of pulse k of a pulse train.
inline double pulse_start(const InputSignal& s, int k) { return s.event_times.front() + k * s.period; }

/// Continuous source rate at time t, mM/hr. Impulses carry no rate.
inline double continuous_rate(const InputSignal& s, double t) {
    switch (s.kind) {
        case SignalKind::constant_supply: return s.rate;
        case SignalKind::impulse_train: return 0.0;
        case SignalKind::pulse_train: {
            if (s.count <= 0 || t < s.event_times.front()) return 0.0;
            const int k = static_cast<int>(std::floor((t - s.event_times.front()) / s.period));
            // floor can land one pulse late when t sits exactly on a start.
            for (int j = std::max(k - 1, 0); j <= k && j < s.count; ++j) {
                const double t0 = pulse_start(s, j);
                if (t >= t0 && t < t0 + s.width) return s.rate;
            }
            return 0.0;
        }
    }
    return 0.0;
}

struct Impulse {
    double time;       // hr
    double magnitude;  // mM

    bool operator==(const Impulse&) const = default;
};

/// Impulses with time in (t0, t1].
inline std::vector<Impulse> pending_impulses(const InputSignal& s, double t0, double t1) {
    std::vector<Impulse> out;
    if (s.kind != SignalKind::impulse_train) return out;
    for (double t : s.event_times)
        if (t > t0 && t <= t1) out.push_back({t, s.impulse_magnitude});
    return out;
}

/// Times at which the signal switches on or off; the integrator lands on
/// these so no step straddles a discontinuity.
inline std::vector<double> signal_breakpoints(const InputSignal& s) {
    std::vector<double> out;
    switch (s.kind) {
        case SignalKind::constant_supply: break;
        case SignalKind::impulse_train: out = s.event_times; break;
        case SignalKind::pulse_train:
            for (int k = 0; k < s.count; ++k) {
                out.push_back(pulse_start(s, k));
                out.push_back(pulse_start(s, k) + s.width);
            }
            break;
    }
    return out;
}

/// Adds a point source at x = 0 into `field` (a concentration, or a rate
/// when `field` holds derivatives).
inline void apply_delta_source(std::span<double> field, const Grid& g, double amount_or_rate,
                               SourceMode mode = SourceMode::concentration) {
    if (field.empty()) throw StateFault("apply_delta_source: empty field");
    field[0] += mode == SourceMode::concentration ? amount_or_rate : amount_or_rate / g.dx;
}

}  // namespace biofilm
