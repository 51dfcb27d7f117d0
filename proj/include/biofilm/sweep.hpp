#pragma once

// Pulse-period sweep: independent runs executed on a bounded worker pool and
// merged in period order.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "biofilm/config.hpp"
#include "biofilm/errors.hpp"
#include "biofilm/run.hpp"

namespace biofilm {

inline constexpr const char* kThreadsEnv = "BIOFILM_ECOM_THREADS";

/// Parses the worker cap from the environment variable's value. Unset means
/// no cap.
inline std::optional<unsigned> parse_thread_cap(const char* value) {
    if (value == nullptr || *value == '\0') return std::nullopt;
    const std::string_view s(value);
    unsigned n = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc() || end != s.data() + s.size() || n == 0)
        throw ValidationError(kThreadsEnv, "must be a positive integer, got '" + std::string(s) + "'");
    return n;
}

inline unsigned worker_count(std::size_t jobs, std::optional<unsigned> cap) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (cap) n = std::min(n, *cap);
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Copy of a pulse-train config with the inter-pulse period replaced.
inline ExperimentConfig with_period(ExperimentConfig c, double period) {
    if (c.signals.potassium.kind != SignalKind::pulse_train)
        throw ValidationError("signals.potassium.kind", "a period override needs a pulse_train input");
    c.signals.potassium.period = period;
    validate(c);
    return c;
}

struct SweepRun {
    double period = 0.0;  // hr
    ExperimentConfig config;
    Trajectory trajectory;
    std::vector<ProbeMetrics> metrics;
};

/// Runs `base` once per period. Results come back in the order of
/// `periods`, independent of scheduling. The first failure (in period order)
/// is rethrown after all workers finish.
inline std::vector<SweepRun> run_sweep(const ExperimentConfig& base, const std::vector<double>& periods,
                                       unsigned workers) {
    if (periods.empty()) throw ValidationError("sweep.periods", "no periods given");
    std::vector<SweepRun> runs(periods.size());
    for (std::size_t i = 0; i < periods.size(); ++i) {
        runs[i].period = periods[i];
        runs[i].config = with_period(base, periods[i]);
    }
    std::vector<std::exception_ptr> errors(periods.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < runs.size();) {
            try {
                runs[i].trajectory = run(runs[i].config);
                runs[i].metrics = compute_metrics(runs[i].trajectory, runs[i].config);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(runs.size())));
    if (n == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < n; ++k) pool.emplace_back(work);
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return runs;
}

}  // namespace biofilm
