#pragma once

// Probes, recorded trajectories and the signal metrics computed from them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biofilm/errors.hpp"
#include "biofilm/grid.hpp"
#include "biofilm/types.hpp"

namespace biofilm {

struct Probe {
    double x = 0.0;  // mm
    std::vector<Field> fields{Field::K_e, Field::V};

    bool operator==(const Probe&) const = default;
};

struct ProbeValue {
    double value = 0.0;
    bool out_of_domain = false;
};

/// Value of one field at coordinate x. Inside [0, L] it interpolates
/// linearly between the bracketing nodes (the partial cell past the last
/// node takes the last node's value). Beyond L it returns the last node's
/// value with the out-of-domain flag set.
inline ProbeValue sample_field(const BiofilmState& state, const Grid& g, double x, Field f) {
    const std::size_t n = state.nodes.size();
    if (n == 0) throw StateFault("sample_field: empty state");
    const double last = get(state.nodes.back(), f);
    if (x > state.L) return {last, true};
    const double s = x / g.dx;
    const double nearest = std::round(s);
    if (std::abs(s - nearest) <= kGridLineSlack * std::max(1.0, nearest)) {
        const auto i = static_cast<std::size_t>(std::max(nearest, 0.0));
        return {i < n ? get(state.nodes[i], f) : last, false};
    }
    const auto i = static_cast<std::size_t>(std::floor(std::max(s, 0.0)));
    if (i + 1 >= n) return {last, false};
    const double w = s - static_cast<double>(i);
    return {(1.0 - w) * get(state.nodes[i], f) + w * get(state.nodes[i + 1], f), false};
}

/// One value per recorded field of the probe, in the probe's field order.
inline std::vector<ProbeValue> sample_probe(const BiofilmState& state, const Grid& g, const Probe& probe) {
    std::vector<ProbeValue> out;
    out.reserve(probe.fields.size());
    for (Field f : probe.fields) out.push_back(sample_field(state, g, probe.x, f));
    return out;
}

struct ProbeSample {
    double t = 0.0;  // hr
    std::size_t probe = 0;
    Field field = Field::K_e;
    double value = 0.0;
    bool out_of_domain = false;

    bool operator==(const ProbeSample&) const = default;
};

/// K_e on the fixed output raster at one instant.
struct Snapshot {
    double t = 0.0;  // hr
    double L = 0.0;  // mm
    std::vector<double> x;        // mm
    std::vector<double> K_e;      // mM
    std::vector<bool> in_biofilm;
};

struct LengthSample {
    double t = 0.0;  // hr
    double L = 0.0;  // mm
};

struct SeriesPoint {
    double t = 0.0;
    double value = 0.0;
};

struct Trajectory {
    std::vector<Probe> probes;
    std::vector<ProbeSample> samples;  // time-ordered
    std::vector<Snapshot> snapshots;
    std::vector<LengthSample> L_series;
    std::vector<double> stimulus_times;  // hr, impulse times and pulse starts
    std::string config_hash;
    Parameters params;

    /// Time series of one field at one probe.
    std::vector<SeriesPoint> series(std::size_t probe, Field f) const {
        std::vector<SeriesPoint> out;
        for (const ProbeSample& s : samples)
            if (s.probe == probe && s.field == f) out.push_back({s.t, s.value});
        return out;
    }
};

struct PulseMetrics {
    double baseline = 0.0;                   // mM
    std::vector<double> peak_times;          // hr
    std::vector<double> peak_amplitudes;     // mM above baseline
    std::vector<double> prominences;         // mM
    std::vector<double> attenuation_ratios;  // amplitude_k / amplitude_1, k >= 2
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) throw EmptySeries("median of an empty set");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

/// Height of the peak at i above the higher of its two flanking minima. Each
/// flank extends until the series rises above the peak or ends.
inline double prominence(std::span<const SeriesPoint> s, std::size_t i) {
    const double h = s[i].value;
    double left_min = h;
    for (std::size_t j = i; j-- > 0;) {
        if (s[j].value > h) break;
        left_min = std::min(left_min, s[j].value);
    }
    double right_min = h;
    for (std::size_t j = i + 1; j < s.size(); ++j) {
        if (s[j].value > h) break;
        right_min = std::min(right_min, s[j].value);
    }
    return h - std::max(left_min, right_min);
}

}  // namespace detail

/// Baseline is the median of the samples in [t_0, t_0 + baseline_window)
/// (at least the first sample). Peaks are strict local maxima at or after
/// t_0 + baseline_window whose prominence exceeds min_prominence; a flat
/// top counts once, at its first sample.
inline PulseMetrics detect_peaks(std::span<const SeriesPoint> series, double min_prominence,
                                 double baseline_window) {
    if (series.empty()) throw EmptySeries("detect_peaks: empty series");
    const double t0 = series.front().t;
    const double detect_from = t0 + baseline_window;

    std::vector<double> window;
    for (const SeriesPoint& p : series)
        if (p.t < detect_from || window.empty()) window.push_back(p.value);
    PulseMetrics m;
    m.baseline = detail::median(std::move(window));

    for (std::size_t i = 1; i + 1 < series.size(); ++i) {
        if (!(series[i].value > series[i - 1].value)) continue;
        std::size_t j = i + 1;
        while (j < series.size() && series[j].value == series[i].value) ++j;
        if (j == series.size() || !(series[j].value < series[i].value)) continue;
        if (series[i].t < detect_from) continue;
        const double prom = detail::prominence(series, i);
        if (!(prom > min_prominence)) continue;
        m.peak_times.push_back(series[i].t);
        m.peak_amplitudes.push_back(std::max(series[i].value - m.baseline, 0.0));
        m.prominences.push_back(prom);
    }
    if (m.peak_amplitudes.size() >= 2 && m.peak_amplitudes.front() > 0.0) {
        for (std::size_t k = 1; k < m.peak_amplitudes.size(); ++k)
            m.attenuation_ratios.push_back(m.peak_amplitudes[k] / m.peak_amplitudes.front());
    }
    return m;
}

/// Mean of the attenuation ratios, NaN when there are none.
inline double mean_attenuation_ratio(const PulseMetrics& m) {
    if (m.attenuation_ratios.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (double r : m.attenuation_ratios) sum += r;
    return sum / static_cast<double>(m.attenuation_ratios.size());
}

/// Counts excursions after transient_skip that rise above
/// baseline + threshold, where baseline is the median of the post-skip
/// samples. A new excursion is only counted once the series has returned to
/// the baseline, so the count never grows with the threshold.
inline int count_oscillations(std::span<const SeriesPoint> series, double threshold, double transient_skip) {
    if (series.empty()) return 0;
    const double from = series.front().t + transient_skip;
    std::vector<double> tail;
    for (const SeriesPoint& p : series)
        if (p.t >= from) tail.push_back(p.value);
    if (tail.empty()) return 0;
    const double baseline = detail::median(tail);
    const double level = baseline + threshold;
    bool armed = tail.front() <= baseline;
    int count = 0;
    for (double v : tail) {
        if (armed && v > level) {
            ++count;
            armed = false;
        } else if (v <= baseline) {
            armed = true;
        }
    }
    return count;
}

struct Interval {
    double start = 0.0;  // hr
    double end = 0.0;    // hr

    bool operator==(const Interval&) const = default;
};

/// Centered finite-difference growth rate, one-sided at the ends.
inline std::vector<double> growth_rates(std::span<const LengthSample> L) {
    std::vector<double> r(L.size(), 0.0);
    if (L.size() < 2) return r;
    for (std::size_t i = 0; i < L.size(); ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = i + 1 == L.size() ? i : i + 1;
        r[i] = (L[b].L - L[a].L) / (L[b].t - L[a].t);
    }
    return r;
}

/// Maximal runs of samples whose growth rate is at most
/// stall_fraction times the mean rate before stimulus_time (the whole
/// series when nothing precedes it).
inline std::vector<Interval> growth_arrest_intervals(std::span<const LengthSample> L, double stall_fraction,
                                                     double stimulus_time = std::numeric_limits<double>::infinity()) {
    std::vector<Interval> out;
    if (L.size() < 2) return out;
    const std::vector<double> r = growth_rates(L);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < L.size(); ++i) {
        if (L[i].t < stimulus_time) {
            sum += r[i];
            ++count;
        }
    }
    if (count == 0) {
        for (double v : r) sum += v;
        count = r.size();
    }
    const double limit = stall_fraction * sum / static_cast<double>(count);
    for (std::size_t i = 0; i < L.size();) {
        if (!(r[i] <= limit)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < L.size() && r[j + 1] <= limit) ++j;
        out.push_back({L[i].t, L[j].t});
        i = j + 1;
    }
    return out;
}

}  // namespace biofilm
