#include "ecosim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace ecosim {

namespace fs = std::filesystem;

namespace {

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw IoError("cannot write " + path.string());
}

void make_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

/// Runs `jobs` tasks on up to `workers` threads. The first failure in job
/// order is rethrown once every thread has finished.
void parallel_for(std::size_t jobs, unsigned workers, const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(jobs, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double sample_stddev(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

ExperimentConfig base_config() { return ExperimentConfig{}; }

std::vector<std::string> preset_names() { return StrategyCatalog::builtin().names(); }

ScenarioPreset preset(std::string_view name) {
    const StrategyPreset* p = StrategyCatalog::builtin().find(name);
    if (!p)
        throw UsageError("unknown preset '" + std::string(name) + "'; valid presets: " + join(preset_names(), ", "));
    ScenarioPreset out{p->name, base_config()};
    out.config.case_mode = p->case_mode;
    out.config.demand.spawn_rule = spawn_rule_for(p->case_mode);
    out.config.competition = p->competition;
    out.config.convergence = p->convergence;
    return out;
}

ExperimentConfig load_config_file(const fs::path& path) {
    ParseResult parsed = parse_config(read_text_file(path));
    if (auto* v = std::get_if<std::vector<Violation>>(&parsed)) throw ConfigError(std::move(*v));
    ExperimentConfig config = std::get<ExperimentConfig>(std::move(parsed));
    validated(config);
    return config;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
    auto parse_one = [&](std::string_view tok) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size())
            throw UsageError("invalid seed '" + std::string(tok) + "' in --seeds " + std::string(text));
        return v;
    };

    std::vector<std::uint64_t> seeds;
    if (text.find(',') == std::string_view::npos) {
        const std::uint64_t count = parse_one(text);
        if (count == 0) throw UsageError("--seeds count must be at least 1");
        if (count > 1'000'000) throw UsageError("--seeds count is too large");
        for (std::uint64_t s = 1; s <= count; ++s) seeds.push_back(s);
        return seeds;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string_view tok = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (!tok.empty()) seeds.push_back(parse_one(tok));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (seeds.empty()) throw UsageError("--seeds list is empty");
    std::set<std::uint64_t> seen;
    for (auto s : seeds)
        if (!seen.insert(s).second) throw UsageError("duplicate seed " + std::to_string(s));
    return seeds;
}

std::vector<std::string> aggregate_columns() {
    const auto& cols = metric_columns();
    std::vector<std::string> out{cols.front()};
    for (std::size_t i = 1; i < cols.size(); ++i) {
        out.push_back(cols[i] + "_mean");
        out.push_back(cols[i] + "_std");
    }
    return out;
}

void write_aggregate_csv(std::ostream& os, const std::vector<MetricSeries>& runs) {
    if (runs.empty()) throw std::invalid_argument("aggregate of zero runs");
    const std::size_t rows = runs.front().rows.size();
    for (const auto& r : runs)
        if (r.rows.size() != rows) throw std::invalid_argument("aggregate of runs with different lengths");

    os << join(aggregate_columns(), ",") << '\n';
    const std::size_t width = metric_columns().size();
    std::vector<std::vector<double>> values(runs.size());
    for (std::size_t t = 0; t < rows; ++t) {
        for (std::size_t r = 0; r < runs.size(); ++r) values[r] = metric_values(runs[r].rows[t]);
        os << format_real(values.front()[0]);
        std::vector<double> col(runs.size());
        for (std::size_t c = 1; c < width; ++c) {
            double sum = 0.0;
            for (std::size_t r = 0; r < runs.size(); ++r) {
                col[r] = values[r][c];
                sum += col[r];
            }
            const double mean = sum / static_cast<double>(runs.size());
            os << ',' << format_real(mean) << ',' << format_real(sample_stddev(col, mean));
        }
        os << '\n';
    }
}

void run_command(const RunManifest& manifest, std::ostream& log) {
    if (manifest.scenarios.empty()) throw UsageError("nothing to run: give at least one --preset or --config");
    if (manifest.seeds.empty()) throw UsageError("seed list is empty");
    {
        std::set<std::uint64_t> seen;
        for (auto s : manifest.seeds)
            if (!seen.insert(s).second) throw UsageError("duplicate seed " + std::to_string(s));
        std::set<std::string> names;
        for (const auto& sc : manifest.scenarios)
            if (!names.insert(sc.name).second) throw UsageError("scenario '" + sc.name + "' given twice");
    }

    std::vector<ValidatedConfig> configs;
    for (const auto& sc : manifest.scenarios) {
        ExperimentConfig c = sc.config;
        if (manifest.ticks) c.ticks = *manifest.ticks;
        configs.push_back(validated(c));
    }
    for (const auto& sc : manifest.scenarios) make_directory(manifest.out_dir / sc.name);

    const std::size_t n_seeds = manifest.seeds.size();
    const std::size_t jobs = configs.size() * n_seeds;
    std::vector<MetricSeries> series(jobs);
    std::vector<std::string> snapshots(manifest.snapshots ? jobs : 0);

    parallel_for(jobs, manifest.workers, [&](std::size_t j) {
        ExperimentConfig c = configs[j / n_seeds].get();
        c.seed = manifest.seeds[j % n_seeds];
        RunOptions opts;
        std::ostringstream snap;
        if (manifest.snapshots) {
            write_snapshot_header(snap);
            opts.on_tick = [&snap](const WorldState& w, const TickReport&) { write_snapshot_rows(snap, w); };
        }
        series[j] = run(validated(c), opts).series;
        if (manifest.snapshots) snapshots[j] = snap.str();
    });

    for (std::size_t s = 0; s < configs.size(); ++s) {
        const fs::path dir = manifest.out_dir / manifest.scenarios[s].name;
        ExperimentConfig c = configs[s].get();
        c.seed = manifest.seeds.front();
        write_text_file(dir / "config.json", serialize_config(c));

        std::vector<MetricSeries> runs;
        for (std::size_t k = 0; k < n_seeds; ++k) {
            const std::size_t j = s * n_seeds + k;
            const std::string stem = "seed_" + std::to_string(manifest.seeds[k]);
            std::ostringstream csv;
            write_series_csv(csv, series[j]);
            write_text_file(dir / (stem + ".csv"), csv.str());
            if (manifest.snapshots) write_text_file(dir / (stem + "_snapshots.csv"), snapshots[j]);
            runs.push_back(std::move(series[j]));
        }
        std::ostringstream agg;
        write_aggregate_csv(agg, runs);
        write_text_file(dir / "aggregate.csv", agg.str());
        log << manifest.scenarios[s].name << ": " << n_seeds << " run(s), " << c.ticks << " ticks -> "
            << dir.string() << '\n';
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

SweepResult sweep_command(const SweepRequest& request, std::ostream& log) {
    if (std::string why = check_sweep_spec(request.spec); !why.empty()) throw UsageError("invalid sweep: " + why);

    ExperimentConfig base = request.base.config;
    if (request.ticks) base.ticks = *request.ticks;

    const auto grid = sweep_grid(request.spec);
    for (double x : grid) {
        ExperimentConfig c = base;
        if (!set_parameter(c, request.spec.param, x)) {
            ExperimentConfig probe = base;
            if (!set_parameter(probe, request.spec.param, 0.5) && !set_parameter(probe, request.spec.param, 1.0))
                throw UsageError("unknown sweep parameter '" + request.spec.param + "'");
            throw UsageError("sweep parameter '" + request.spec.param + "' cannot take the value " + format_real(x));
        }
        if (auto v = validate_config(c); std::holds_alternative<std::vector<Violation>>(v)) {
            auto violations = std::get<std::vector<Violation>>(v);
            for (auto& viol : violations) viol.message += " (at " + request.spec.param + " = " + format_real(x) + ")";
            throw ConfigError(std::move(violations));
        }
    }

    const SweepObjective objective = [&](double x, std::size_t replicate) {
        ExperimentConfig c = base;
        set_parameter(c, request.spec.param, x);
        c.seed = base.seed + replicate;
        return run(validated(c)).series.rows.back().value_ratio;
    };
    SweepResult result = sweep_maximize(objective, request.spec, request.workers);

    make_directory(request.out_dir);
    std::ostringstream csv;
    csv << "param,mean_value,std_value,replicates,best\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& row = result.rows[i];
        csv << format_real(row.param) << ',' << format_real(row.mean) << ',' << format_real(row.stddev) << ','
            << row.samples.size() << ',' << (i == result.best_index ? 1 : 0) << '\n';
    }
    write_text_file(request.out_dir / "sweep.csv", csv.str());

    log << request.spec.param << "  mean_value  std_value  replicates\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& row = result.rows[i];
        log << format_real(row.param) << "  " << format_real(row.mean) << "  " << format_real(row.stddev) << "  "
            << row.samples.size() << (i == result.best_index ? "  <- argmax" : "") << '\n';
    }
    log << "argmax " << request.spec.param << " = " << format_real(result.best_param)
        << " (value " << format_real(result.best_value) << ")\n";
    return result;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

const std::vector<std::string>& ordering_metrics() {
    static const std::vector<std::string> m{
        "alive_total",
        "total_capital",
        "mean_node_search_cost",
        "value_ratio",
        "cum_orders_completed",
        "cum_orders_captured",
        "cross_area_fraction",
        "mean_avg_profit_link1",
        "mean_avg_profit_link2",
        "mean_avg_profit_link3",
    };
    return m;
}

double ScenarioSummary::final_mean(std::string_view metric) const {
    for (const auto& [name, v] : final_means)
        if (name == metric) return v;
    throw std::out_of_range("no summary metric named " + std::string(metric));
}

namespace {

struct ScenarioData {
    std::string name;
    std::optional<CaseMode> case_mode;
    std::vector<CsvTable> runs;
    std::vector<std::string> files;
};

bool is_seed_csv(const fs::path& p) {
    const std::string f = p.filename().string();
    return f.rfind("seed_", 0) == 0 && p.extension() == ".csv" && f.find("_snapshots") == std::string::npos;
}

std::vector<ScenarioData> load_runs(const fs::path& run_dir) {
    std::error_code ec;
    if (!fs::is_directory(run_dir, ec)) throw IoError("run directory not found: " + run_dir.string());

    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(run_dir, ec))
        if (entry.is_directory()) dirs.push_back(entry.path());
    if (ec) throw IoError("cannot list " + run_dir.string());
    std::sort(dirs.begin(), dirs.end());

    std::vector<ScenarioData> out;
    for (const auto& dir : dirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && is_seed_csv(entry.path())) files.push_back(entry.path());
        if (files.empty()) continue;
        std::sort(files.begin(), files.end());

        ScenarioData s;
        s.name = dir.filename().string();
        if (fs::exists(dir / "config.json")) {
            ParseResult parsed = parse_config(read_text_file(dir / "config.json"));
            if (!std::holds_alternative<ExperimentConfig>(parsed))
                throw IoError((dir / "config.json").string() + ": " +
                              format_violations(std::get<std::vector<Violation>>(parsed)));
            s.case_mode = std::get<ExperimentConfig>(parsed).case_mode;
        }
        for (const auto& f : files) {
            std::ifstream in(f, std::ios::binary);
            if (!in) throw IoError("cannot open " + f.string());
            CsvTable t = read_csv(in, f.string());
            for (const auto& col : metric_columns())
                if (t.column(col) < 0) throw CsvError(f.string(), 1, "missing column '" + col + "'");
            if (t.rows.empty()) throw CsvError(f.string(), 2, "no data rows");
            if (!s.runs.empty() && t.rows.size() != s.runs.front().rows.size())
                throw CsvError(f.string(), t.rows.size() + 1,
                               "run length differs from " + s.files.front() + " (" +
                                   std::to_string(s.runs.front().rows.size()) + " rows)");
            s.runs.push_back(std::move(t));
            s.files.push_back(f.string());
        }
        out.push_back(std::move(s));
    }
    if (out.empty()) throw IoError("no seed_*.csv run files under " + run_dir.string());
    return out;
}

/// Per-tick mean across runs of one column.
std::vector<double> mean_series(const ScenarioData& s, std::string_view column) {
    std::vector<double> mean(s.runs.front().rows.size(), 0.0);
    for (const auto& t : s.runs) {
        const auto v = t.column_values(column);
        for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
    }
    for (double& m : mean) m /= static_cast<double>(s.runs.size());
    return mean;
}

std::optional<TrendClass> safe_trend(const std::vector<double>& series, std::size_t window, const TrendThresholds& th) {
    const std::size_t w = std::min(window, series.size());
    try {
        return classify_trend(series, w, th);
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

std::string group_of(const ScenarioSummary& s) {
    if (!s.case_mode) return "all";
    return *s.case_mode == CaseMode::Case1 ? "case1" : "case2";
}

constexpr std::array<std::pair<int, int>, 3> kLinkPairs{{{0, 1}, {0, 2}, {1, 2}}};

}  // namespace

Report build_report(const fs::path& run_dir, const ReportOptions& options) {
    Report report;
    for (const ScenarioData& data : load_runs(run_dir)) {
        ScenarioSummary s;
        s.name = data.name;
        s.case_mode = data.case_mode;
        s.runs = data.runs.size();

        const auto ticks = mean_series(data, "tick");
        s.final_tick = static_cast<int>(ticks.back());
        for (std::size_t c = 1; c < metric_columns().size(); ++c) {
            const auto& col = metric_columns()[c];
            s.final_means.emplace_back(col, mean_series(data, col).back());
        }
        s.final_means.emplace_back("alive_total",
                                   s.final_mean("alive_link1") + s.final_mean("alive_link2") + s.final_mean("alive_link3"));
        for (int k = 1; k <= 3; ++k) {
            const auto series = mean_series(data, "avg_profit_link" + std::to_string(k));
            double avg = 0.0;
            if (series.size() > 1)
                avg = std::accumulate(series.begin() + 1, series.end(), 0.0) / static_cast<double>(series.size() - 1);
            s.final_means.emplace_back("mean_avg_profit_link" + std::to_string(k), avg);
        }

        s.capital_trend = safe_trend(mean_series(data, "total_capital"), options.trend_window, options.thresholds);
        s.value_trend = safe_trend(mean_series(data, "value_ratio"), options.trend_window, options.thresholds);
        s.value_state = classify_value_state(s.final_mean("value_ratio"), options.explosion_threshold);

        std::array<double, 3> profit{}, cost{};
        for (int k = 0; k < 3; ++k) {
            profit[k] = s.final_mean("cum_profit_link" + std::to_string(k + 1));
            cost[k] = s.final_mean("cum_cost_link" + std::to_string(k + 1));
            s.link_value_ratio[k] = cost[k] > 0.0 ? profit[k] / cost[k] : 0.0;
        }
        for (std::size_t p = 0; p < kLinkPairs.size(); ++p) {
            const auto [a, b] = kLinkPairs[p];
            if (cost[a] > 0.0 && cost[b] > 0.0)
                s.fairness[p] = fairness_gap({profit[a], cost[a], profit[b], cost[b]}, options.fairness_epsilon);
            else
                s.fairness[p] = {std::nan(""), false};
        }
        report.scenarios.push_back(std::move(s));
    }

    std::map<std::string, std::vector<const ScenarioSummary*>> groups;
    for (const auto& s : report.scenarios) groups[group_of(s)].push_back(&s);
    for (const auto& [group, members] : groups) {
        for (const auto& metric : ordering_metrics()) {
            auto ranked = members;
            std::stable_sort(ranked.begin(), ranked.end(), [&](const ScenarioSummary* a, const ScenarioSummary* b) {
                return a->final_mean(metric) > b->final_mean(metric);
            });
            OrderingRow row{metric, group, {}};
            for (const auto* s : ranked) row.ranked.push_back(s->name);
            report.orderings.push_back(std::move(row));
        }
    }
    return report;
}

void write_report(const Report& report, const fs::path& run_dir, const fs::path& out_dir) {
    make_directory(out_dir);
    using nlohmann::ordered_json;
    const auto num = [](double v) -> ordered_json { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
    const auto trend = [](const std::optional<TrendClass>& t) -> ordered_json {
        if (!t) return nullptr;
        return std::string(1, trend_letter(*t)) + " " + std::string(to_string(*t));
    };
    static constexpr std::array<const char*, 3> kPairNames{"link1-link2", "link1-link3", "link2-link3"};

    ordered_json json;
    json["schema_version"] = std::string(kCsvSchemaVersion);
    json["scenarios"] = ordered_json::array();
    for (const auto& s : report.scenarios) {
        ordered_json js;
        js["name"] = s.name;
        js["case_mode"] = s.case_mode ? ordered_json(std::string(to_string(*s.case_mode))) : ordered_json(nullptr);
        js["runs"] = s.runs;
        js["final_tick"] = s.final_tick;
        ordered_json finals;
        for (const auto& [k, v] : s.final_means) finals[k] = num(v);
        js["final_means"] = finals;
        js["capital_trend"] = trend(s.capital_trend);
        js["value_trend"] = trend(s.value_trend);
        js["value_state"] = std::string(to_string(s.value_state));
        js["link_value_ratio"] = {num(s.link_value_ratio[0]), num(s.link_value_ratio[1]), num(s.link_value_ratio[2])};
        ordered_json fair;
        for (std::size_t p = 0; p < 3; ++p)
            fair[kPairNames[p]] = {{"gap", num(s.fairness[p].gap)}, {"sustained", s.fairness[p].sustained}};
        js["fairness"] = fair;
        json["scenarios"].push_back(js);
    }
    json["orderings"] = ordered_json::array();
    for (const auto& o : report.orderings)
        json["orderings"].push_back({{"metric", o.metric}, {"group", o.group}, {"ranked", o.ranked}});
    write_text_file(out_dir / "summary.json", json.dump(2) + "\n");

    std::ostringstream md;
    md << "# Run summary\n\n";
    md << "| scenario | runs | tick | alive | total_capital | value_ratio | value state | capital trend | value trend |"
          " search cost/node | completed | processed | cross-area |\n";
    md << "|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    const auto trend_text = [](const std::optional<TrendClass>& t) {
        return t ? std::string(1, trend_letter(*t)) + " " + std::string(to_string(*t)) : std::string("n/a");
    };
    for (const auto& s : report.scenarios) {
        md << "| " << s.name << " | " << s.runs << " | " << s.final_tick << " | " << format_real(s.final_mean("alive_total"))
           << " | " << format_real(s.final_mean("total_capital")) << " | " << format_real(s.final_mean("value_ratio"))
           << " | " << to_string(s.value_state) << " | " << trend_text(s.capital_trend) << " | "
           << trend_text(s.value_trend) << " | " << format_real(s.final_mean("mean_node_search_cost")) << " | "
           << format_real(s.final_mean("cum_orders_completed")) << " | "
           << format_real(s.final_mean("cum_orders_captured")) << " | "
           << format_real(s.final_mean("cross_area_fraction")) << " |\n";
    }
    md << "\n## Per-link value and fairness\n\n";
    md << "| scenario | v1 | v2 | v3 | gap 1-2 | gap 1-3 | gap 2-3 |\n|---|---|---|---|---|---|---|\n";
    for (const auto& s : report.scenarios) {
        md << "| " << s.name;
        for (double v : s.link_value_ratio) md << " | " << format_real(v);
        for (const auto& f : s.fairness)
            md << " | " << (std::isfinite(f.gap) ? format_real(f.gap) + (f.sustained ? " (sustained)" : "") : "n/a");
        md << " |\n";
    }
    md << "\n## Orderings (descending)\n\n| group | metric | ranking |\n|---|---|---|\n";
    for (const auto& o : report.orderings) md << "| " << o.group << " | " << o.metric << " | " << join(o.ranked, " > ") << " |\n";
    write_text_file(out_dir / "summary.md", md.str());

    std::ostringstream plot;
    plot << "scenario,tick,metric,value\n";
    for (const ScenarioData& data : load_runs(run_dir)) {
        const auto ticks = mean_series(data, "tick");
        std::vector<std::vector<double>> cols;
        for (std::size_t c = 1; c < metric_columns().size(); ++c) cols.push_back(mean_series(data, metric_columns()[c]));
        for (std::size_t t = 0; t < ticks.size(); ++t)
            for (std::size_t c = 0; c < cols.size(); ++c)
                plot << data.name << ',' << format_real(ticks[t]) << ',' << metric_columns()[c + 1] << ','
                     << format_real(cols[c][t]) << '\n';
    }
    write_text_file(out_dir / "plot_data.csv", plot.str());
}

}  // namespace ecosim
