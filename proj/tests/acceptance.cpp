// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "biofilm/biofilm.hpp"
#include "support.hpp"

using namespace biofilm;
using namespace biofilm::model;
namespace fs = std::filesystem;

namespace {

/// Collects the reasons a criterion failed, plus informational notes.
struct Report {
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void note(const std::string& s) { notes.push_back(s); }
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct PresetRun {
    ExperimentConfig config;
    Trajectory trajectory;
    std::vector<ProbeMetrics> metrics;
    fs::path dir;
    double seconds = 0.0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Points every output of a preset into `dir`.
ExperimentConfig placed(ExperimentConfig c, const fs::path& dir) {
    auto put = [&](std::string& path) {
        if (!path.empty()) path = (dir / fs::path(path).filename()).string();
    };
    put(c.outputs.timeseries_path);
    put(c.outputs.metrics_path);
    put(c.outputs.spacetime_path);
    put(c.outputs.svg_path);
    return c;
}

PresetRun run_preset(std::string_view name, const fs::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    PresetRun r;
    r.config = placed(preset(name), dir);
    r.dir = dir;
    r.trajectory = run(r.config);
    r.metrics = compute_metrics(r.trajectory, r.config);
    emit_all(r.trajectory, r.config);
    r.seconds = seconds_since(t0);
    return r;
}

std::map<std::string, PresetRun, std::less<>> g_runs;

const PresetRun& first_run(std::string_view name) {
    auto it = g_runs.find(name);
    if (it == g_runs.end())
        it = g_runs.emplace(std::string(name), run_preset(name, testing_support::scratch_dir("acceptance_a_" + std::string(name)))).first;
    return it->second;
}

double median_before(const std::vector<SeriesPoint>& s, double t) {
    std::vector<double> v;
    for (const SeriesPoint& p : s)
        if (p.t < t) v.push_back(p.value);
    return detail::median(v);
}

// 1. Term-level equivalence with the independent reference.
void oracle_equivalence(Report& r) {
    const auto t0 = std::chrono::steady_clock::now();
    const Parameters p;
    std::mt19937_64 rng(1);
    double worst = 0.0;
    auto track = [&](long double got, long double want, long double scale = 0) {
        worst = std::max(worst, testing_support::rel_error(got, want, scale));
    };
    for (int k = 0; k < 1000; ++k) {
        const NodeState s = testing_support::random_state(rng, p);
        using oracle::R;
        track(uptake_sigmoid(s.V, p), oracle::sigmoid(s.V, p));
        track(glutamate_uptake(s.G_e, s.G_i, s.V, p), oracle::uptake(s.G_e, s.G_i, s.V, p));
        const ReversalPotentials rev = reversal_potentials(s.K_e, s.K_ac, p);
        track(rev.V_K, oracle::V_K(s.K_e, p), std::abs(p.V_K0) + std::abs(p.delta_K * s.K_e));
        track(rev.V_L, oracle::V_L(s.K_e, s.K_ac, p),
              std::abs(p.V_L0) + std::abs(p.delta_L) * (std::abs(s.K_e) + std::abs(s.K_ac)));
        const R vk = oracle::V_K(s.K_e, p), vl = oracle::V_L(s.K_e, s.K_ac, p);
        track(potassium_channel_flux(s.V, s.n, rev.V_K, p), oracle::channel(s.V, s.n, vk, p),
              p.g_K * std::pow(s.n, 4) * (std::abs(s.V) + std::abs(rev.V_K)));
        track(leak_flux(s.V, rev.V_L, p), oracle::leak(s.V, vl, p), p.g_L * (std::abs(s.V) + std::abs(rev.V_L)));
        track(pump_rate(s.K_e, s.K_i, p), oracle::pump(s.K_e, s.K_i, p), p.gamma_K * s.K_e * (p.K_m + s.K_i));
        track(growth_propensity(s.G_i, s.V, p), oracle::M_g(s.G_i, s.V, p));
        track(gate_opening_activation(s.G_i, p), oracle::gate(s.G_i, p));
        const NodeDerivative d = node_reaction_rhs(s, p);
        const oracle::Rhs o = oracle::rhs(s, p);
        track(d.dG_e, o.dG_e, o.sG_e);
        track(d.dK_e, o.dK_e, o.sK_e);
        track(d.dG_i, o.dG_i, o.sG_i);
        track(d.dK_i, o.dK_i, o.sK_i);
        track(d.dK_ac, o.dK_ac, o.sK_ac);
        track(d.dV, o.dV, o.sV);
        track(d.dn, o.dn, o.sn);
    }
    const double secs = seconds_since(t0);
    r.check(worst < 1e-12, "max relative error " + num(worst));
    r.check(secs < 1.0, "runtime " + num(secs) + " s");
    r.note("max rel err " + num(worst) + ", " + num(secs) + " s");
}

// 2. Exchange and coupling invariants.
void exchange_invariants(Report& r) {
    const Parameters p;
    std::mt19937_64 rng(2);
    int bad = 0;
    for (int k = 0; k < 1000; ++k) {
        const NodeState s = testing_support::random_state(rng, p);
        const NodeDerivative d = node_reaction_rhs(s, p);
        const double U = glutamate_uptake(s.G_e, s.G_i, s.V, p);
        const double uptake_sum = (-U) + (d.dG_i + p.gamma_G * s.G_i * (growth_propensity(s.G_i, s.V, p) + p.r_b));
        if (d.dK_e + d.dK_i != 0.0) ++bad;
        if (d.dV != d.dK_i / p.F) ++bad;
        if (d.dG_e != -U) ++bad;
        if (std::abs(uptake_sum) > 1e-14 * std::max(1.0, U)) ++bad;
    }
    r.check(bad == 0, std::to_string(bad) + " violations");
    r.note("1000 states, " + std::to_string(bad) + " violations");
}

Grid grid_of(std::size_t n, double dx) { return {dx, n, static_cast<double>(n - 1) * dx}; }

// 3. Diffusion operator.
void diffusion_operator(Report& r) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> errors;
    for (double dx : {0.1, 0.05, 0.025}) {
        const std::size_t n = static_cast<std::size_t>(std::lround(2.0 / dx)) + 1;
        const Grid g = grid_of(n, dx);
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = std::sin(g.x(i));
        const auto lap = laplacian_with_bcs(f, g, BoundarySpec{1.0, 1.0, 1.0, 0.0});
        double err = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) err = std::max(err, std::abs(lap[i] + std::sin(g.x(i))));
        errors.push_back(err);
    }
    double min_order = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < errors.size(); ++k)
        min_order = std::min(min_order, std::log2(errors[k] / errors[k + 1]));
    r.check(min_order >= 1.9, "observed order " + num(min_order));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + trial % 60;
        const Grid g = grid_of(n, 0.05);
        std::vector<double> f(n);
        for (double& v : f) v = u(rng);
        const auto lap = laplacian_with_bcs(f, g, BoundarySpec{0.5, 0.0, 0.5, 0.0});
        double sum = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
            sum += w * lap[i];
            scale += std::abs(w * lap[i]);
        }
        worst = std::max(worst, std::abs(sum) / scale);
    }
    r.check(worst <= 1e-12, "zero-flux relative imbalance " + num(worst));

    const auto lap = laplacian_with_bcs(std::vector<double>(6, 7.0), grid_of(6, 0.1), BoundarySpec{0.497, 4.97, 0.5, 8.0});
    bool interior_zero = true;
    for (std::size_t i = 0; i + 1 < lap.size(); ++i) interior_zero = interior_zero && lap[i] == 0.0;
    r.check(interior_zero && lap.back() == 400.0, "ghost value " + num(lap.back()));
    const double secs = seconds_since(t0);
    r.check(secs < 5.0, "runtime " + num(secs) + " s");
    r.note("order " + num(min_order) + ", imbalance " + num(worst) + ", ghost " + num(lap.back()));
}

std::vector<double> probe_K_e(const ExperimentConfig& c) {
    std::vector<double> v;
    for (const SeriesPoint& p : run(c).series(0, Field::K_e)) v.push_back(p.value);
    return v;
}

// 4. Integrator order and impulse-preset self-convergence.
void integrator_order(Report& r) {
    const auto t0 = std::chrono::steady_clock::now();
    // With only the acclimation term active, K_ac obeys dy/dt = -y.
    Parameters p;
    p.eta_K = 1.0;
    p.g_L = 0.0;
    p.alpha = 0.0;
    p.K_0 = 0.0;
    p.G_0 = 0.0;
    Grid g = make_grid(0.05, 0.2);
    BiofilmState s;
    s.nodes.assign(g.n_nodes, {.G_e = 0.0, .K_e = 0.0, .G_i = 0.0, .K_i = 100.0, .K_ac = 1.0, .V = -156.0, .n = 0.0});
    s.L = g.L;
    std::vector<double> err;
    for (int steps : {10, 20, 40}) {
        BiofilmState x = s;
        Grid grid = g;
        for (int k = 0; k < steps; ++k) x = rk4_step(x, 1.0 / steps, grid, p, 0.0, 0.0);
        err.push_back(std::abs(x.nodes[0].K_ac - std::exp(-1.0)));
    }
    double order = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < err.size(); ++k) order = std::min(order, std::log2(err[k] / err[k + 1]));
    r.check(order >= 3.9, "RK4 observed order " + num(order));

    ExperimentConfig c = preset("impulse");
    const std::vector<double> coarse = probe_K_e(c);
    c.step.dt /= 2.0;
    const std::vector<double> fine = probe_K_e(c);
    double num2 = 0.0, den2 = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        num2 += (coarse[i] - fine[i]) * (coarse[i] - fine[i]);
        den2 += fine[i] * fine[i];
    }
    const double rel = std::sqrt(num2 / den2);
    r.check(coarse.size() == fine.size() && rel < 1e-3, "dt-halving relative L2 " + num(rel));
    const double secs = seconds_since(t0);
    r.check(secs < 120.0, "runtime " + num(secs) + " s");
    r.note("order " + num(order) + ", dt-halving L2 " + num(rel) + ", " + num(secs) + " s");
}

// 5. Glutamate supply quenches the oscillation.
void quench(Report& r) {
    const auto t0 = std::chrono::steady_clock::now();
    const int off = first_run("quench-off").metrics.at(0).oscillation_count;
    const int on = first_run("quench-on").metrics.at(0).oscillation_count;
    const double secs = seconds_since(t0);
    r.check(off >= 3, "quench-off oscillation_count " + std::to_string(off));
    r.check(on == 0, "quench-on oscillation_count " + std::to_string(on));
    r.check(secs < 300.0, "runtime " + num(secs) + " s");
    r.note("off " + std::to_string(off) + ", on " + std::to_string(on) + ", " + num(secs) + " s");
}

// 6. Single impulse response shape.
void impulse_response(Report& r) {
    const auto t0 = std::chrono::steady_clock::now();
    const PresetRun& run = first_run("impulse");
    const double t_stim = run.config.signals.potassium.event_times.at(0);
    const auto K = run.trajectory.series(0, Field::K_e);
    const auto V = run.trajectory.series(0, Field::V);
    const double K_base = median_before(K, t_stim);
    const double V_base = median_before(V, t_stim);

    std::size_t i_peak = 0;
    double K_peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < K.size(); ++i)
        if (K[i].t > t_stim && K[i].value > K_peak) K_peak = K[i].value, i_peak = i;
    const bool is_local_max = i_peak > 0 && i_peak + 1 < K.size() && K[i_peak].value > K[i_peak - 1].value &&
                              K[i_peak].value >= K[i_peak + 1].value;
    double K_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = i_peak; i < K.size(); ++i) K_min = std::min(K_min, K[i].value);
    const double K_end = K.back().value;
    r.check(is_local_max && K_peak > K_base, "no K_e maximum after the stimulus");
    r.check(K_min < K_base, "no undershoot after the peak (min " + num(K_min) + ", baseline " + num(K_base) + ")");
    r.check(std::abs(K_end - K_base) <= 0.1 * std::abs(K_base), "final K_e " + num(K_end) + " vs baseline " + num(K_base));

    std::size_t i_rise = 0;
    double V_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < V.size(); ++i)
        if (V[i].t > t_stim && V[i].value > V_max) V_max = V[i].value, i_rise = i;
    double V_min_after = std::numeric_limits<double>::infinity();
    for (std::size_t i = i_rise; i < V.size(); ++i) V_min_after = std::min(V_min_after, V[i].value);
    r.check(V_max > V_base, "no depolarization (max " + num(V_max) + ", baseline " + num(V_base) + ")");
    r.check(V_min_after < V_base, "no hyperpolarization after the rise");
    const double secs = seconds_since(t0);
    r.check(secs < 300.0, "runtime " + num(secs) + " s");
    r.note("K_e base " + num(K_base) + " peak " + num(K_peak) + " @ " + num(K[i_peak].t) + " min " + num(K_min) +
           " end " + num(K_end) + "; V base " + num(V_base) + " max " + num(V_max) + " then " + num(V_min_after));
}

// 7. Impulse series gives one release peak per impulse.
void impulse_series(Report& r) {
    const PulseMetrics& m = first_run("impulse-train").metrics.at(0).pulses;
    r.check(m.peak_times.size() == 3, std::to_string(m.peak_times.size()) + " peaks detected");
    for (std::size_t k = 0; k + 1 < m.peak_times.size(); ++k) {
        const double gap = m.peak_times[k + 1] - m.peak_times[k];
        r.check(gap > 0.0 && std::abs(gap - 5.0) <= 1.0, "peak separation " + num(gap));
    }
    std::string times;
    for (double t : m.peak_times) times += (times.empty() ? "" : ", ") + num(t);
    r.note("peaks at [" + times + "]");
}

// 8. Growth arrest coincides with wave arrival at the edge.
void growth_arrest(Report& r) {
    const PresetRun& run = first_run("spacetime");
    const Trajectory& traj = run.trajectory;
    const std::vector<double> stim = traj.stimulus_times;

    // K_e at the outermost raster point inside the biofilm.
    std::vector<SeriesPoint> edge;
    for (const Snapshot& s : traj.snapshots) {
        std::size_t j = 0;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (s.in_biofilm[i]) j = i;
        edge.push_back({s.t, s.K_e[j]});
    }
    const double base = median_before(edge, stim.front());
    // The wave is present while edge K_e stands above baseline by more than
    // the peak-detection floor.
    const double floor = run.config.metrics.min_prominence;
    const std::vector<Interval>& arrest = run.metrics.at(0).growth_arrest;

    std::string windows;
    for (std::size_t k = 0; k < stim.size(); ++k) {
        const double stop = k + 1 < stim.size() ? stim[k + 1] : run.config.step.t_end;
        double first = NAN, last = NAN;
        for (const SeriesPoint& p : edge) {
            if (p.t < stim[k] || p.t >= stop || p.value - base <= floor) continue;
            if (std::isnan(first)) first = p.t;
            last = p.t;
        }
        if (std::isnan(first)) {
            r.check(false, "wave " + std::to_string(k + 1) + " never reaches the edge");
            continue;
        }
        bool overlaps = false;
        for (const Interval& iv : arrest) overlaps = overlaps || (iv.start <= last && iv.end >= first);
        r.check(overlaps, "no arrest overlapping arrival window [" + num(first) + ", " + num(last) + "]");
        windows += " [" + num(first) + ", " + num(last) + "]";
    }
    bool monotone = true;
    for (std::size_t i = 1; i < traj.L_series.size(); ++i)
        monotone = monotone && traj.L_series[i].L >= traj.L_series[i - 1].L;
    r.check(monotone, "L decreases");
    std::string arrests;
    for (const Interval& iv : arrest) arrests += " [" + num(iv.start) + ", " + num(iv.end) + "]";
    r.note("arrival" + windows + "; arrest" + arrests);
}

// 9. Short inter-pulse periods attenuate later peaks.
void period_sweep(Report& r) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentConfig base = preset("pulse-train");
    const auto [lo, hi] = std::minmax_element(base.sweep_periods.begin(), base.sweep_periods.end());
    const std::vector<SweepRun> runs =
        run_sweep(base, {*lo, *hi}, worker_count(2, parse_thread_cap(std::getenv(kThreadsEnv))));
    const double small = mean_attenuation_ratio(runs[0].metrics.at(0).pulses);
    const double large = mean_attenuation_ratio(runs[1].metrics.at(0).pulses);
    const double secs = seconds_since(t0);
    r.check(std::isfinite(small) && std::isfinite(large) && small < large,
            "small-period ratio " + num(small) + " not below large-period ratio " + num(large));
    r.check(large >= 0.8, "large-period ratio " + num(large));
    r.check(small <= 0.6, "small-period ratio " + num(small));
    r.check(secs < 900.0, "runtime " + num(secs) + " s");
    r.note("T_p " + num(*lo) + ": " + num(small) + ", T_p " + num(*hi) + ": " + num(large) + ", " + num(secs) + " s");
}

// 10. Determinism and lossless CSV round trip.
void determinism(Report& r) {
    std::size_t files = 0;
    for (std::string_view name : kPresetNames) {
        const PresetRun& a = first_run(name);
        const PresetRun b = run_preset(name, testing_support::scratch_dir("acceptance_b_" + std::string(name)));
        for (const auto& entry : fs::directory_iterator(a.dir)) {
            const fs::path other = b.dir / entry.path().filename();
            r.check(fs::exists(other) && read_text_file(entry.path()) == read_text_file(other),
                    std::string(name) + ": " + entry.path().filename().string() + " differs");
            ++files;
        }
        const std::string text = read_text_file(a.config.outputs.timeseries_path);
        Trajectory back;
        back.probes = a.config.probes;
        for (const CsvRow& row : parse_timeseries_csv(text)) {
            std::size_t k = 0;
            while (k < back.probes.size() && format_fixed9(back.probes[k].x) != format_fixed9(row.x)) ++k;
            back.samples.push_back({row.t, k, row.field, row.value, row.out_of_domain});
        }
        r.check(timeseries_csv(back) == text, std::string(name) + ": CSV round trip is lossy");
    }
    r.note(std::to_string(files) + " files compared");
}

}  // namespace

int main() {
    const std::pair<const char*, void (*)(Report&)> criteria[] = {
        {"term-level oracle equivalence", oracle_equivalence},
        {"exchange and coupling invariants", exchange_invariants},
        {"diffusion operator", diffusion_operator},
        {"integrator order and self-convergence", integrator_order},
        {"glutamate supply quenches oscillation", quench},
        {"single impulse response", impulse_response},
        {"impulse series peaks", impulse_series},
        {"growth arrest at wave arrival", growth_arrest},
        {"pulse period attenuation", period_sweep},
        {"determinism and formats", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [title, fn] : criteria) {
        ++index;
        Report rep;
        try {
            fn(rep);
        } catch (const std::exception& e) {
            rep.failures.push_back(std::string("exception: ") + e.what());
        }
        const bool ok = rep.failures.empty();
        failed += ok ? 0 : 1;
        std::ostringstream line;
        line << (ok ? "PASS" : "FAIL") << " criterion " << index << ": " << title;
        for (const std::string& n : rep.notes) line << " | " << n;
        for (const std::string& f : rep.failures) line << " | FAILED: " << f;
        std::printf("%s\n", line.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", index - failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
