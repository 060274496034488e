#include "ecosim/metrics.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "ecosim/analysis.hpp"

namespace ecosim {

TickMetrics collect_tick_metrics(const WorldState& world, const TickReport* report, double satisfaction_weight) {
    TickMetrics m;
    m.tick = world.tick;
    const auto& L = world.ledgers;

    std::array<std::vector<double>, 3> captures_by_link;
    for (const auto& n : world.nodes) {
        const std::size_t r = index_of(n.role);
        ++m.alive_per_link[r];
        captures_by_link[r].push_back(static_cast<double>(n.orders_captured));
        m.total_capital += n.capital;
        m.mean_node_search_cost += n.cumulative_search_cost;
    }
    if (!world.nodes.empty()) m.mean_node_search_cost /= static_cast<double>(world.nodes.size());
    for (std::size_t r = 0; r < 3; ++r)
        m.gini_per_link[r] = captures_by_link[r].empty() ? 0.0 : gini(captures_by_link[r]);

    const double alive = static_cast<double>(world.nodes.size());
    if (report) {
        m.orders_spawned = report->orders_spawned;
        m.orders_captured = report->captures.size();
        m.orders_completed = report->completed_orders.size();
        m.orders_expired = report->expired_orders.size();
        if (alive > 0) {
            m.avg_cost_per_node = (report->movement_cost_total + report->operation_cost_total) / alive;
            m.avg_profit_per_node = report->credited_total / alive;
        }
        std::array<double, 3> credit_by_link{};
        for (const auto& c : report->credits) credit_by_link[index_of(c.link)] += c.amount;
        for (std::size_t r = 0; r < 3; ++r)
            if (m.alive_per_link[r] > 0)
                m.avg_profit_per_link[r] = credit_by_link[r] / static_cast<double>(m.alive_per_link[r]);
    }

    const double cost = L.movement_cost + L.operation_cost;
    const double outcome = L.credited + satisfaction_weight * static_cast<double>(L.orders_completed);
    m.value_ratio = cost > 0.0 ? value_ratio(outcome, cost) : 0.0;

    m.cum_profit_per_link = L.profit_by_link;
    m.cum_cost_per_link = L.cost_by_link;
    m.cum_orders_captured = L.orders_captured;
    m.cum_orders_completed = L.orders_completed;
    if (L.node_ticks > 0) m.search_cost_rate = L.movement_cost / static_cast<double>(L.node_ticks);
    if (L.orders_captured > 0)
        m.cross_area_fraction = static_cast<double>(L.cross_area_captures) / static_cast<double>(L.orders_captured);
    return m;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& metric_columns() {
    static const std::vector<std::string> cols{
        "tick",
        "alive_link1", "alive_link2", "alive_link3",
        "avg_cost_per_node", "avg_profit_per_node", "total_capital",
        "orders_spawned", "orders_captured", "orders_completed", "orders_expired",
        "gini_link1", "gini_link2", "gini_link3",
        "value_ratio",
        "avg_profit_link1", "avg_profit_link2", "avg_profit_link3",
        "cum_profit_link1", "cum_profit_link2", "cum_profit_link3",
        "cum_cost_link1", "cum_cost_link2", "cum_cost_link3",
        "cum_orders_captured", "cum_orders_completed",
        "search_cost_rate", "mean_node_search_cost", "cross_area_fraction",
    };
    return cols;
}

std::vector<double> metric_values(const TickMetrics& m) {
    const auto d = [](auto v) { return static_cast<double>(v); };
    return {
        d(m.tick),
        d(m.alive_per_link[0]), d(m.alive_per_link[1]), d(m.alive_per_link[2]),
        m.avg_cost_per_node, m.avg_profit_per_node, m.total_capital,
        d(m.orders_spawned), d(m.orders_captured), d(m.orders_completed), d(m.orders_expired),
        m.gini_per_link[0], m.gini_per_link[1], m.gini_per_link[2],
        m.value_ratio,
        m.avg_profit_per_link[0], m.avg_profit_per_link[1], m.avg_profit_per_link[2],
        m.cum_profit_per_link[0], m.cum_profit_per_link[1], m.cum_profit_per_link[2],
        m.cum_cost_per_link[0], m.cum_cost_per_link[1], m.cum_cost_per_link[2],
        d(m.cum_orders_captured), d(m.cum_orders_completed),
        m.search_cost_rate, m.mean_node_search_cost, m.cross_area_fraction,
    };
}

std::string format_real(double v) {
    if (v == 0.0) return "0";  // also folds -0
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

void write_series_csv(std::ostream& os, const MetricSeries& series) {
    const auto& cols = metric_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& row : series.rows) {
        const auto vals = metric_values(row);
        for (std::size_t i = 0; i < vals.size(); ++i) os << (i ? "," : "") << format_real(vals[i]);
        os << '\n';
    }
}

int CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> CsvTable::column_values(std::string_view name) const {
    const int c = column(name);
    if (c < 0) throw std::out_of_range("no CSV column named " + std::string(name));
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[std::size_t(c)]);
    return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

CsvTable read_csv(std::istream& is, const std::string& source) {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            t.header = split_fields(line);
            if (t.header.empty() || t.header[0].empty()) throw CsvError(source, lineno, "missing header row");
            continue;
        }
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != t.header.size())
            throw CsvError(source, lineno,
                           "expected " + std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty())
                throw CsvError(source, lineno, "malformed number '" + f + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (lineno == 0) throw CsvError(source, 1, "empty file");
    return t;
}

// ---------------------------------------------------------------------------

RunResult run(const ValidatedConfig& config, const RunOptions& options) {
    RunResult result;
    result.final_world = make_world(config);
    WorldState& world = result.final_world;
    const double omega = config->demand.satisfaction_weight;

    result.series.rows.reserve(std::size_t(config->ticks) + 1);
    result.series.rows.push_back(collect_tick_metrics(world, nullptr, omega));
    for (int t = 0; t < config->ticks; ++t) {
        TickReport report = step(world, config);
        if (options.check_conservation && !conservation_holds(report))
            throw InvariantViolation("capital conservation broken at tick " + std::to_string(report.tick));
        result.series.rows.push_back(collect_tick_metrics(world, &report, omega));
        if (options.on_tick) options.on_tick(world, report);
        if (options.keep_reports) result.reports.push_back(std::move(report));
    }
    return result;
}

void write_snapshot_header(std::ostream& os) { os << "tick,node_id,role,x,y,capital\n"; }

void write_snapshot_rows(std::ostream& os, const WorldState& world) {
    for (const auto& n : world.nodes)
        os << world.tick << ',' << raw(n.id) << ',' << to_string(n.role) << ',' << n.pos.x << ',' << n.pos.y << ','
           << format_real(n.capital) << '\n';
}

}  // namespace ecosim
