// Command-line front end: run presets or config files, sweep pulse periods,
// validate configs.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biofilm/biofilm.hpp"

namespace fs = std::filesystem;
using namespace biofilm;

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kStability = 3, kIo = 4 };

/// Output files of a preset run are named <stem>.<kind> inside out_dir.
void place_outputs(ExperimentConfig& c, const fs::path& out_dir, const std::string& stem) {
    c.outputs.timeseries_path = (out_dir / (stem + ".timeseries.csv")).string();
    c.outputs.metrics_path = (out_dir / (stem + ".metrics.json")).string();
    c.outputs.spacetime_path = c.snapshots.enabled ? (out_dir / (stem + ".spacetime.csv")).string() : "";
    c.outputs.svg_path = (out_dir / (stem + ".svg")).string();
}

/// Re-roots every configured output under out_dir.
void reroot_outputs(ExperimentConfig& c, const fs::path& out_dir) {
    for (std::string* p : {&c.outputs.timeseries_path, &c.outputs.metrics_path, &c.outputs.spacetime_path,
                           &c.outputs.svg_path})
        if (!p->empty()) *p = (out_dir / fs::path(*p).filename()).string();
}

std::string period_tag(double period) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", period);
    return buf;
}

void report(const ExperimentConfig& c, const Trajectory& traj, const std::vector<ProbeMetrics>& metrics) {
    std::cout << (c.scenario.empty() ? "config" : c.scenario) << ": t_end=" << c.step.t_end
              << " hr, final L=" << (traj.L_series.empty() ? 0.0 : traj.L_series.back().L) << " mm\n";
    for (const ProbeMetrics& m : metrics) {
        std::cout << "  probe x=" << m.x << " mm " << field_name(m.field) << ": peaks=" << m.pulses.peak_times.size()
                  << " oscillations=" << m.oscillation_count
                  << " growth_arrests=" << m.growth_arrest.size();
        const double r = mean_attenuation_ratio(m.pulses);
        if (std::isfinite(r)) std::cout << " mean_attenuation=" << r;
        std::cout << "\n";
    }
    std::cout << "  wrote " << c.outputs.timeseries_path << ", " << c.outputs.metrics_path;
    if (!c.outputs.spacetime_path.empty()) std::cout << ", " << c.outputs.spacetime_path;
    if (!c.outputs.svg_path.empty()) std::cout << ", " << c.outputs.svg_path;
    std::cout << "\n";
}

struct Options {
    std::string config_path;
    std::string preset_name;
    std::string preset_dir = default_preset_dir().string();
    std::string out_dir;
    double period = 0.0;
    std::vector<double> periods;
};

ExperimentConfig resolve(const Options& o, CLI::Option* period_opt) {
    ExperimentConfig c = o.config_path.empty() ? preset(o.preset_name, o.preset_dir) : load_config(o.config_path);
    if (period_opt && period_opt->count() > 0) c = with_period(std::move(c), o.period);
    return c;
}

int simulate(const Options& o, CLI::Option* period_opt) {
    ExperimentConfig c = resolve(o, period_opt);
    if (!o.preset_name.empty()) {
        std::string stem = o.preset_name;
        if (period_opt->count() > 0) stem += "_T" + period_tag(o.period);
        place_outputs(c, o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir), stem);
    } else if (!o.out_dir.empty()) {
        reroot_outputs(c, o.out_dir);
    }
    validate(c);
    const Trajectory traj = run(c);
    const std::vector<ProbeMetrics> metrics = compute_metrics(traj, c);
    emit_all(traj, c);
    report(c, traj, metrics);
    return kOk;
}

int sweep(const Options& o) {
    ExperimentConfig base = o.config_path.empty() ? preset(o.preset_name, o.preset_dir) : load_config(o.config_path);
    const std::vector<double> periods = o.periods.empty() ? base.sweep_periods : o.periods;
    const fs::path out_dir = o.out_dir.empty() ? fs::path(".") : fs::path(o.out_dir);
    const std::string stem = base.scenario.empty() ? "sweep" : base.scenario;

    const unsigned workers = worker_count(periods.size(), parse_thread_cap(std::getenv(kThreadsEnv)));
    std::vector<SweepRun> runs = run_sweep(base, periods, workers);

    Json summary;
    summary["scenario"] = base.scenario;
    Json rows = Json::array();
    for (SweepRun& r : runs) {
        place_outputs(r.config, out_dir, stem + "_T" + period_tag(r.period));
        emit_all(r.trajectory, r.config);
        Json row;
        row["period"] = r.period;
        row["metrics_file"] = fs::path(r.config.outputs.metrics_path).filename().string();
        if (!r.metrics.empty()) {
            const PulseMetrics& m = r.metrics.front().pulses;
            row["peak_times"] = m.peak_times;
            row["amplitudes"] = m.peak_amplitudes;
            row["attenuation_ratios"] = m.attenuation_ratios;
            const double mean = mean_attenuation_ratio(m);
            row["mean_attenuation_ratio"] = std::isfinite(mean) ? Json(mean) : Json(nullptr);
        }
        rows.push_back(row);
        std::cout << "T_p=" << r.period << " hr: ";
        if (!r.metrics.empty()) {
            const double mean = mean_attenuation_ratio(r.metrics.front().pulses);
            std::cout << "peaks=" << r.metrics.front().pulses.peak_times.size() << " mean_attenuation="
                      << (std::isfinite(mean) ? std::to_string(mean) : std::string("n/a"));
        }
        std::cout << "\n";
    }
    summary["runs"] = rows;
    const fs::path summary_path = out_dir / (stem + ".sweep.json");
    write_text_file(summary_path, summary.dump(2) + "\n");
    std::cout << "wrote " << summary_path.string() << " (" << workers << " worker"
              << (workers == 1 ? "" : "s") << ")\n";
    return kOk;
}

int validate_only(const Options& o) {
    const ExperimentConfig c = o.config_path.empty() ? preset(o.preset_name, o.preset_dir) : load_config(o.config_path);
    std::cout << "ok: " << (o.config_path.empty() ? o.preset_name : o.config_path) << " (hash " << config_hash(c)
              << ")\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biofilm potassium-signaling simulator"};
    app.require_subcommand(1);
    Options o;

    auto source = [&](CLI::App* sub) {
        auto* cfg = sub->add_option("--config", o.config_path, "Experiment config (JSON)");
        auto* pre = sub->add_option("--preset", o.preset_name, "Named preset");
        cfg->excludes(pre);
        pre->excludes(cfg);
        sub->add_option("--preset-dir", o.preset_dir, "Directory holding preset JSON files");
    };

    CLI::App* sim = app.add_subcommand("simulate", "Run one experiment");
    source(sim);
    CLI::Option* period_opt = sim->add_option("--period", o.period, "Inter-pulse period T_p override, hr");
    sim->add_option("--out-dir", o.out_dir, "Directory for output files");

    CLI::App* swp = app.add_subcommand("sweep", "Run a pulse train over several periods");
    source(swp);
    swp->add_option("--periods", o.periods, "Comma-separated periods, hr")->delimiter(',');
    swp->add_option("--out-dir", o.out_dir, "Directory for output files");

    CLI::App* val = app.add_subcommand("validate", "Check a config without running it");
    source(val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        if (o.config_path.empty() && o.preset_name.empty())
            throw ValidationError("--config/--preset", "one of them is required");
        if (cmd == sim) return simulate(o, period_opt);
        if (cmd == swp) return sweep(o);
        return validate_only(o);
    } catch (const StabilityFault& e) {
        std::cerr << "stability fault: " << e.what() << "\n";
        return kStability;
    } catch (const StateFault& e) {
        std::cerr << "state fault: " << e.what() << "\n";
        return kStability;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const Error& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return kValidation;
    }
}
