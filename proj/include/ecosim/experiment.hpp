#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ecosim/analysis.hpp"
#include "ecosim/config.hpp"
#include "ecosim/metrics.hpp"
#include "ecosim/strategy.hpp"

namespace ecosim {

/// Process exit statuses of the CLI.
enum class ExitCode : int { Ok = 0, ConfigError = 1, IoError = 2, InternalError = 3 };

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown preset names, unresolvable sweep parameters and malformed flags.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

/// Defaults of every field; the base profile all presets start from.
ExperimentConfig base_config();

struct ScenarioPreset {
    std::string name;
    ExperimentConfig config;
};

/// Base profile with the named catalog strategy applied. Throws UsageError
/// listing the valid names when `name` is unknown.
ScenarioPreset preset(std::string_view name);

std::vector<std::string> preset_names();

/// Reads and validates a config file. Throws IoError or ConfigError.
ExperimentConfig load_config_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunManifest {
    std::vector<ScenarioPreset> scenarios;
    std::vector<std::uint64_t> seeds;  // non-empty, unique
    std::optional<int> ticks;          // overrides the scenario configs
    std::filesystem::path out_dir;
    bool snapshots = false;
    unsigned workers = 1;
};

/// "20" means seeds 1..20; "3,5,8" is an explicit list (a trailing comma
/// marks a single explicit seed, e.g. "42,"). Throws UsageError.
std::vector<std::uint64_t> parse_seeds(std::string_view text);

/// Writes <out>/<scenario>/seed_<seed>.csv per run, <out>/<scenario>/aggregate.csv
/// (per-tick mean and sample std of every metric) and <out>/<scenario>/config.json.
/// Throws ConfigError, IoError or InvariantViolation.
void run_command(const RunManifest& manifest, std::ostream& log);

/// Aggregate table over equally long series: tick, then <metric>_mean and
/// <metric>_std for every other column.
std::vector<std::string> aggregate_columns();
void write_aggregate_csv(std::ostream& os, const std::vector<MetricSeries>& runs);

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepRequest {
    SweepSpec spec;
    ScenarioPreset base;
    std::optional<int> ticks;
    std::filesystem::path out_dir;
    unsigned workers = 1;
};

/// Objective: final cumulative value ratio of one run. Replicate r runs with
/// seed base.seed + r. Writes <out>/sweep.csv and returns the result.
SweepResult sweep_command(const SweepRequest& request, std::ostream& log);

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOptions {
    std::size_t trend_window = 20;
    TrendThresholds thresholds;
    double explosion_threshold = kDefaultExplosionThreshold;
    double fairness_epsilon = 0.1;
};

struct ScenarioSummary {
    std::string name;
    std::optional<CaseMode> case_mode;  // from config.json when present
    std::size_t runs = 0;
    int final_tick = 0;
    std::vector<std::pair<std::string, double>> final_means;  // metric -> mean over runs at the last tick
    std::optional<TrendClass> capital_trend;                  // unset if the window mean is not positive
    std::optional<TrendClass> value_trend;
    ValueState value_state = ValueState::ValueCapturing;
    std::array<double, 3> link_value_ratio{};  // cumulative profit / cost per link
    std::array<FairnessGap, 3> fairness{};     // pairs (1,2), (1,3), (2,3)

    double final_mean(std::string_view metric) const;
};

struct OrderingRow {
    std::string metric;
    std::string group;                // "case1", "case2" or "all"
    std::vector<std::string> ranked;  // scenario names, descending
};

struct Report {
    std::vector<ScenarioSummary> scenarios;
    std::vector<OrderingRow> orderings;
};

/// Reads every <run_dir>/<scenario>/seed_*.csv. Throws IoError/CsvError.
Report build_report(const std::filesystem::path& run_dir, const ReportOptions& options = {});

/// Writes summary.md, summary.json and plot_data.csv (scenario,tick,metric,value)
/// into `out_dir`.
void write_report(const Report& report, const std::filesystem::path& run_dir, const std::filesystem::path& out_dir);

/// Metrics compared across scenarios in the ordering table.
const std::vector<std::string>& ordering_metrics();

}  // namespace ecosim
