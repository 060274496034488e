#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ecosim/engine.hpp"

namespace ecosim {

/// Indicator vector for one tick. Per-tick quantities refer to the step that
/// ended at `tick`; cumulative ones run from tick 0. Averages over an empty
/// population are 0.
struct TickMetrics {
    int tick = 0;
    std::array<std::uint64_t, 3> alive_per_link{};
    double avg_cost_per_node = 0.0;    // (movement + operation) this tick / alive
    double avg_profit_per_node = 0.0;  // credits this tick / alive
    double total_capital = 0.0;
    std::uint64_t orders_spawned = 0;
    std::uint64_t orders_captured = 0;
    std::uint64_t orders_completed = 0;
    std::uint64_t orders_expired = 0;
    std::array<double, 3> gini_per_link{};  // over cumulative captures of alive same-role nodes
    double value_ratio = 0.0;               // cumulative outcome / cost, 0 while cost is 0

    std::array<double, 3> avg_profit_per_link{};  // credits this tick to the link / alive of the link
    std::array<double, 3> cum_profit_per_link{};
    std::array<double, 3> cum_cost_per_link{};
    std::uint64_t cum_orders_captured = 0;
    std::uint64_t cum_orders_completed = 0;
    double search_cost_rate = 0.0;          // cumulative movement cost / cumulative node-ticks
    double mean_node_search_cost = 0.0;     // mean over alive nodes of their lifetime movement cost
    double cross_area_fraction = 0.0;       // cumulative cross-area captures / captures

    bool operator==(const TickMetrics&) const = default;
};

struct MetricSeries {
    std::vector<TickMetrics> rows;  // rows[0] is the initial state
};

/// `report == nullptr` yields the tick-0 row.
TickMetrics collect_tick_metrics(const WorldState& world, const TickReport* report, double satisfaction_weight = 0.0);

// ---------------------------------------------------------------------------
// CSV contract: UTF-8, header row, fixed column order, '.' decimals, LF.
// Reals use the shortest representation that round-trips.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvSchemaVersion = "1";

const std::vector<std::string>& metric_columns();

/// Values of one row in metric_columns() order.
std::vector<double> metric_values(const TickMetrics& m);

std::string format_real(double v);

void write_series_csv(std::ostream& os, const MetricSeries& series);

/// Parsed numeric CSV (header + rows); parse errors carry file and line.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Column index or -1.
    int column(std::string_view name) const;
    std::vector<double> column_values(std::string_view name) const;
};

class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
};

CsvTable read_csv(std::istream& is, const std::string& source_name);

// ---------------------------------------------------------------------------
// Whole runs
// ---------------------------------------------------------------------------

struct RunResult {
    MetricSeries series;
    WorldState final_world;
    std::vector<TickReport> reports;  // filled only when keep_reports is set
};

struct RunOptions {
    bool keep_reports = false;
    /// Throw InvariantViolation if a tick breaks capital conservation.
    bool check_conservation = true;
    /// Called after every step, e.g. for snapshot export.
    std::function<void(const WorldState&, const TickReport&)> on_tick;
};

RunResult run(const ValidatedConfig& config, const RunOptions& options = {});

/// Per-tick node positions and capitals: tick,node_id,role,x,y,capital.
void write_snapshot_header(std::ostream& os);
void write_snapshot_rows(std::ostream& os, const WorldState& world);

}  // namespace ecosim
