#include "ecosim/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <thread>

#include "CLI11.hpp"

namespace ecosim {

namespace fs = std::filesystem;

ExitCode exit_code_for(const std::exception_ptr& error) {
    try {
        std::rethrow_exception(error);
    } catch (const ConfigError&) {
        return ExitCode::ConfigError;
    } catch (const UsageError&) {
        return ExitCode::ConfigError;
    } catch (const IoError&) {
        return ExitCode::IoError;
    } catch (const CsvError&) {
        return ExitCode::IoError;
    } catch (const fs::filesystem_error&) {
        return ExitCode::IoError;
    } catch (const std::ios_base::failure&) {
        return ExitCode::IoError;
    } catch (...) {
        return ExitCode::InternalError;
    }
}

int guarded(const std::function<void()>& body, std::ostream& err) {
    try {
        body();
        return static_cast<int>(ExitCode::Ok);
    } catch (const std::exception& e) {
        const ExitCode code = exit_code_for(std::current_exception());
        const char* kind = code == ExitCode::ConfigError ? "configuration error"
                           : code == ExitCode::IoError   ? "I/O error"
                                                         : "internal error";
        err << "ecosim: " << kind << ": " << e.what() << '\n';
        return static_cast<int>(code);
    } catch (...) {
        err << "ecosim: internal error: unknown exception\n";
        return static_cast<int>(ExitCode::InternalError);
    }
}

namespace {

fs::path default_out_dir() {
    if (const char* env = std::getenv("ECOSIM_OUT_DIR"); env && *env) return env;
    return "ecosim-out";
}

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<ScenarioPreset> collect_scenarios(const std::vector<std::string>& presets,
                                              const std::vector<std::string>& configs) {
    std::vector<ScenarioPreset> out;
    for (const auto& name : presets) out.push_back(preset(name));
    for (const auto& file : configs) out.push_back({fs::path(file).stem().string(), load_config_file(file)});
    return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Agent-based simulator of a three-link service ecosystem", "ecosim"};
    app.require_subcommand(1);

    // run
    std::vector<std::string> run_presets, run_configs;
    std::string run_seeds = "20";
    std::optional<int> run_ticks;
    std::string run_out;
    bool run_snapshots = false;
    unsigned run_jobs = default_jobs();
    auto* run = app.add_subcommand("run", "Run presets or config files over a batch of seeds");
    run->add_option("--preset", run_presets, "Preset name (repeatable)");
    run->add_option("--config", run_configs, "Config file (repeatable)");
    run->add_option("--seeds", run_seeds, "Seed count N (seeds 1..N) or comma-separated list")->capture_default_str();
    run->add_option("--ticks", run_ticks, "Ticks per run (overrides config)")->check(CLI::PositiveNumber);
    run->add_option("--out", run_out, "Output directory");
    run->add_flag("--snapshots", run_snapshots, "Also write per-tick node snapshots");
    run->add_option("--jobs", run_jobs, "Worker threads")->check(CLI::PositiveNumber);

    // sweep
    std::string sweep_preset, sweep_config, sweep_out;
    SweepSpec spec;
    std::optional<int> sweep_ticks;
    unsigned sweep_jobs = default_jobs();
    auto* sweep = app.add_subcommand("sweep", "Maximize the final value ratio over one parameter");
    auto* sp = sweep->add_option("--preset", sweep_preset, "Base preset");
    sweep->add_option("--config", sweep_config, "Base config file")->excludes(sp);
    sweep->add_option("--param", spec.param, "Dotted parameter path, e.g. competition.link1_share")->required();
    sweep->add_option("--min", spec.min, "Grid start")->required();
    sweep->add_option("--max", spec.max, "Grid end")->required();
    sweep->add_option("--step", spec.step, "Grid step")->required();
    sweep->add_option("--replicates", spec.replicates, "Seeds per grid point")->capture_default_str();
    sweep->add_option("--ticks", sweep_ticks, "Ticks per run")->check(CLI::PositiveNumber);
    sweep->add_option("--out", sweep_out, "Output directory");
    sweep->add_option("--jobs", sweep_jobs, "Worker threads")->check(CLI::PositiveNumber);

    // report
    std::string report_runs, report_out;
    ReportOptions report_opts;
    auto* report = app.add_subcommand("report", "Summarize run artifacts");
    report->add_option("runs", report_runs, "Directory written by `run` (default: output directory)");
    report->add_option("--out", report_out, "Report directory (default: <runs>/report)");
    report->add_option("--window", report_opts.trend_window, "Trailing window for trend classes")
        ->check(CLI::Range(2, 1 << 20))
        ->capture_default_str();
    report->add_option("--epsilon", report_opts.fairness_epsilon, "Fairness tolerance")->capture_default_str();
    report->add_option("--explosion", report_opts.explosion_threshold, "Value explosion threshold")
        ->capture_default_str();

    auto* list = app.add_subcommand("preset-list", "List the built-in presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "ecosim: " << e.what() << '\n';
        return static_cast<int>(ExitCode::ConfigError);
    }

    if (run->parsed()) {
        return guarded(
            [&] {
                RunManifest m;
                m.scenarios = collect_scenarios(run_presets, run_configs);
                m.seeds = parse_seeds(run_seeds);
                m.ticks = run_ticks;
                m.out_dir = run_out.empty() ? default_out_dir() : fs::path(run_out);
                m.snapshots = run_snapshots;
                m.workers = run_jobs;
                run_command(m, out);
            },
            err);
    }
    if (sweep->parsed()) {
        return guarded(
            [&] {
                SweepRequest r;
                if (!sweep_config.empty())
                    r.base = {fs::path(sweep_config).stem().string(), load_config_file(sweep_config)};
                else
                    r.base = preset(sweep_preset.empty() ? "case1-moderate" : sweep_preset);
                r.spec = spec;
                r.ticks = sweep_ticks;
                r.out_dir = sweep_out.empty() ? default_out_dir() / "sweep" : fs::path(sweep_out);
                r.workers = sweep_jobs;
                sweep_command(r, out);
            },
            err);
    }
    if (report->parsed()) {
        return guarded(
            [&] {
                const fs::path runs = report_runs.empty() ? default_out_dir() : fs::path(report_runs);
                const fs::path dest = report_out.empty() ? runs / "report" : fs::path(report_out);
                const Report r = build_report(runs, report_opts);
                write_report(r, runs, dest);
                out << "report for " << r.scenarios.size() << " scenario(s) -> " << dest.string() << '\n';
            },
            err);
    }
    if (list->parsed()) {
        for (const auto& p : StrategyCatalog::builtin().presets()) {
            out << p.name << "  " << to_string(p.case_mode) << "  ";
            if (p.case_mode == CaseMode::Case1) {
                const auto& r = p.competition.ratio;
                out << "ratio " << format_real(r[0]) << ':' << format_real(r[1]) << ':' << format_real(r[2]);
            } else {
                out << to_string(p.convergence.kind);
            }
            out << '\n';
        }
        return 0;
    }
    return 0;
}

}  // namespace ecosim
