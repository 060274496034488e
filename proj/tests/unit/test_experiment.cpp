#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "ecosim/experiment.hpp"
#include "support.hpp"

using namespace ecosim;
using namespace ecosim::test;

namespace {

RunManifest manifest_for(std::vector<std::string> presets, std::vector<std::uint64_t> seeds,
                         const std::filesystem::path& out, std::optional<int> ticks = std::nullopt) {
    RunManifest m;
    for (const auto& p : presets) m.scenarios.push_back(preset(p));
    m.seeds = std::move(seeds);
    m.out_dir = out;
    m.ticks = ticks;
    return m;
}

CsvTable load(const std::filesystem::path& p) {
    std::ifstream in(p);
    return read_csv(in, p.string());
}

std::ostream& quiet() {
    static std::ostringstream sink;
    sink.str("");
    return sink;
}

std::vector<std::uint64_t> seeds_upto(std::uint64_t n) {
    std::vector<std::uint64_t> s;
    for (std::uint64_t i = 1; i <= n; ++i) s.push_back(i);
    return s;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("preset lookup") {
    const auto low = preset("case1-low");
    CHECK(low.config.competition.ratio == std::array<double, 3>{1, 2, 7});
    CHECK(low.config.case_mode == CaseMode::Case1);
    const auto partial = preset("case2-partial");
    CHECK(partial.config.convergence.kind == ConvergenceKind::PartialConvergence);
    CHECK(partial.config.case_mode == CaseMode::Case2);
    CHECK(partial.config.demand.spawn_rule == SpawnRule::AllAreasFixed);
    try {
        preset("case9-x");
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        const std::string msg = e.what();
        for (const auto& name : preset_names()) CHECK(msg.find(name) != std::string::npos);
    }
    CHECK(preset_names().size() == 6);
}

TEST_CASE("presets differ from the base only in strategy fields") {
    const ExperimentConfig base = base_config();
    for (const auto& name : preset_names()) {
        ExperimentConfig c = preset(name).config;
        CHECK(std::holds_alternative<ValidatedConfig>(validate_config(c)));
        c.competition = base.competition;
        c.convergence = base.convergence;
        c.case_mode = base.case_mode;
        c.demand.spawn_rule = base.demand.spawn_rule;
        CHECK(c == base);
    }
}

TEST_CASE("seed lists") {
    CHECK(parse_seeds("3") == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(parse_seeds("7,2,9") == std::vector<std::uint64_t>{7, 2, 9});
    CHECK(parse_seeds("42,") == std::vector<std::uint64_t>{42});
    CHECK(parse_seeds("18446744073709551615,0") == std::vector<std::uint64_t>{18446744073709551615ull, 0});
    CHECK_THROWS_AS(parse_seeds("0"), UsageError);
    CHECK_THROWS_AS(parse_seeds("1,1"), UsageError);
    CHECK_THROWS_AS(parse_seeds("x"), UsageError);
    CHECK_THROWS_AS(parse_seeds(","), UsageError);
    CHECK_THROWS_AS(parse_seeds("-3"), UsageError);
}

TEST_CASE("config files") {
    TempDir dir;
    spit(dir / "ok.json", R"({"ticks": 12, "competition": {"ratio": [3, 3, 4]}})");
    const auto c = load_config_file(dir / "ok.json");
    CHECK(c.ticks == 12);
    CHECK(c.competition.ratio == std::array<double, 3>{3, 3, 4});
    spit(dir / "bad.json", R"({"death_threshold": 300, "reproduction_threshold": 20})");
    CHECK_THROWS_AS(load_config_file(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(load_config_file(dir / "missing.json"), IoError);
}

TEST_CASE("run writes one row per tick plus the initial state") {
    TempDir dir;
    run_command(manifest_for({"case1-high"}, {1}, dir.path(), 100), quiet());
    const auto t = load(dir / "case1-high/seed_1.csv");
    CHECK(t.rows.size() == 101);
    CHECK(t.header == metric_columns());
    CHECK(std::filesystem::exists(dir / "case1-high/aggregate.csv"));
    const auto cfg = load_config_file(dir / "case1-high/config.json");
    CHECK(cfg.competition.ratio == std::array<double, 3>{3, 3, 4});
}

TEST_CASE("same manifest twice gives byte-identical CSVs regardless of workers") {
    TempDir a, b;
    auto m = manifest_for({"case1-low", "case2-full"}, {4, 9, 11}, a.path(), 60);
    m.workers = 1;
    std::ostringstream log;
    run_command(m, log);
    m.out_dir = b.path();
    m.workers = 6;
    run_command(m, log);
    for (const char* sc : {"case1-low", "case2-full"})
        for (const char* f : {"seed_4.csv", "seed_9.csv", "seed_11.csv", "aggregate.csv", "config.json"}) {
            const auto rel = std::filesystem::path(sc) / f;
            CHECK(slurp(a.path() / rel) == slurp(b.path() / rel));
            CHECK_FALSE(slurp(a.path() / rel).empty());
        }
}

TEST_CASE("aggregate equals an independent re-aggregation of the per-run CSVs") {
    TempDir dir;
    const std::vector<std::uint64_t> seeds{3, 1, 8, 5};
    run_command(manifest_for({"case2-partial"}, seeds, dir.path(), 30), quiet());
    std::vector<CsvTable> runs;
    for (auto s : seeds) runs.push_back(load(dir / ("case2-partial/seed_" + std::to_string(s) + ".csv")));
    const auto agg = load(dir / "case2-partial/aggregate.csv");
    CHECK(agg.header == aggregate_columns());
    REQUIRE(agg.rows.size() == 31);
    for (std::size_t t = 0; t < agg.rows.size(); ++t) {
        CHECK(agg.rows[t][0] == double(t));
        for (std::size_t c = 1; c < metric_columns().size(); ++c) {
            double mean = 0;
            for (const auto& r : runs) mean += r.rows[t][c];
            mean /= double(runs.size());
            double ss = 0;
            for (const auto& r : runs) ss += (r.rows[t][c] - mean) * (r.rows[t][c] - mean);
            const double sd = std::sqrt(ss / double(runs.size() - 1));
            const double got_mean = agg.rows[t][2 * c - 1], got_sd = agg.rows[t][2 * c];
            CHECK(got_mean == doctest::Approx(mean).epsilon(1e-12));
            CHECK(got_sd == doctest::Approx(sd).epsilon(1e-9).scale(1e-12));
        }
    }
}

TEST_CASE("snapshots are optional") {
    TempDir dir;
    auto m = manifest_for({"case2-non"}, {2}, dir.path(), 5);
    run_command(m, quiet());
    CHECK_FALSE(std::filesystem::exists(dir / "case2-non/seed_2_snapshots.csv"));
    m.snapshots = true;
    run_command(m, quiet());
    const std::string snap = slurp(dir / "case2-non/seed_2_snapshots.csv");
    CHECK(snap.rfind("tick,node_id,role,x,y,capital\n", 0) == 0);
}

TEST_CASE("run errors") {
    TempDir dir;
    auto bad = manifest_for({"case1-low"}, {1}, dir.path());
    bad.scenarios[0].config.death_threshold = 500;
    CHECK_THROWS_AS(run_command(bad, quiet()), ConfigError);
    CHECK_FALSE(std::filesystem::exists(dir / "case1-low"));

    spit(dir / "blocker", "x");
    CHECK_THROWS_AS(run_command(manifest_for({"case1-low"}, {1}, dir / "blocker", 2), quiet()), IoError);

    CHECK_THROWS_AS(run_command(manifest_for({"case1-low"}, {1, 1}, dir.path(), 2), quiet()), UsageError);
    CHECK_THROWS_AS(run_command(manifest_for({}, {1}, dir.path(), 2), quiet()), UsageError);
    CHECK_THROWS_AS(run_command(manifest_for({"case1-low", "case1-low"}, {1}, dir.path(), 2), quiet()), UsageError);
}

TEST_CASE("high fair keeps more nodes alive than low fair") {
    TempDir dir;
    run_command(manifest_for({"case1-low", "case1-high"}, seeds_upto(20), dir.path()), quiet());
    const auto low = load(dir / "case1-low/aggregate.csv");
    const auto high = load(dir / "case1-high/aggregate.csv");
    double alive_low = 0, alive_high = 0;
    for (const char* c : {"alive_link1_mean", "alive_link2_mean", "alive_link3_mean"}) {
        alive_low += low.column_values(c).back();
        alive_high += high.column_values(c).back();
    }
    CHECK(alive_high > alive_low);
}

TEST_CASE("sweep over the link-1 share") {
    TempDir dir;
    SweepRequest req{{"competition.link1_share", 0.1, 0.3, 0.1, 5}, preset("case1-moderate"), std::nullopt, dir.path(), 4};
    std::ostringstream log;
    const auto res = sweep_command(req, log);
    REQUIRE(res.rows.size() == 3);
    for (const auto& row : res.rows) CHECK(row.samples.size() == 5);

    // Independent evaluation of the same grid.
    std::size_t best = 0;
    std::vector<double> means;
    for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0;
        for (std::uint64_t r = 0; r < 5; ++r) {
            ExperimentConfig c = preset("case1-moderate").config;
            const double f = 0.1 + 0.1 * double(i);
            c.competition.ratio = {f, (1 - f) / 2, (1 - f) / 2};
            c.seed = 1 + r;
            sum += run(validated(c)).series.rows.back().value_ratio;
        }
        means.push_back(sum / 5);
        CHECK(res.rows[i].mean == doctest::Approx(means.back()).epsilon(1e-12));
        if (means[i] > means[best]) best = i;
    }
    CHECK(res.best_index == best);
    CHECK(res.best_param == doctest::Approx(0.3));

    const auto table = load(dir / "sweep.csv");
    CHECK(table.header == std::vector<std::string>{"param", "mean_value", "std_value", "replicates", "best"});
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[2][4] == 1.0);
    CHECK(log.str().find("argmax") != std::string::npos);
}

TEST_CASE("sweep degenerate grid and errors") {
    TempDir dir;
    SweepRequest req{{"demand.base_n", 90, 95, 10, 1}, preset("case1-high"), 10, dir.path(), 1};
    std::ostringstream log;
    const auto res = sweep_command(req, log);
    REQUIRE(res.rows.size() == 1);
    CHECK(res.best_param == 90);

    req.spec.param = "demand.no_such_field";
    try {
        sweep_command(req, log);
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("demand.no_such_field") != std::string::npos);
    }
    req.spec = {"death_threshold", 100, 400, 100, 1};
    CHECK_THROWS_AS(sweep_command(req, log), ConfigError);
    req.spec = {"death_threshold", 10, 5, 1, 1};
    CHECK_THROWS_AS(sweep_command(req, log), UsageError);
}

TEST_CASE("report on a constant synthetic run") {
    TempDir dir;
    std::filesystem::create_directories(dir / "flat");
    MetricSeries s;
    for (int t = 0; t <= 30; ++t) {
        TickMetrics m;
        m.tick = t;
        m.total_capital = 1000;
        m.value_ratio = 1.2;
        m.alive_per_link = {10, 10, 10};
        m.cum_profit_per_link = {10, 10, 10};
        m.cum_cost_per_link = {5, 10, 20};
        s.rows.push_back(m);
    }
    std::ostringstream csv;
    write_series_csv(csv, s);
    spit(dir / "flat/seed_1.csv", csv.str());

    const Report r = build_report(dir.path());
    REQUIRE(r.scenarios.size() == 1);
    const auto& sc = r.scenarios[0];
    CHECK(sc.name == "flat");
    CHECK_FALSE(sc.case_mode.has_value());
    REQUIRE(sc.capital_trend.has_value());
    CHECK(*sc.capital_trend == TrendClass::Steady);
    CHECK(*sc.value_trend == TrendClass::Steady);
    CHECK(sc.value_state == ValueState::ValueCapturing);
    CHECK(sc.final_tick == 30);
    CHECK(sc.final_mean("alive_total") == 30);
    CHECK(sc.link_value_ratio == std::array<double, 3>{2, 1, 0.5});
    CHECK(sc.fairness[0].gap == 0.5);
    CHECK(sc.fairness[1].gap == 0.75);
    CHECK(sc.fairness[2].gap == 0.5);

    write_report(r, dir.path(), dir / "report");
    std::istringstream plot(slurp(dir / "report/plot_data.csv"));
    std::string line;
    std::getline(plot, line);
    CHECK(line == "scenario,tick,metric,value");
    std::size_t rows = 0;
    while (std::getline(plot, line)) {
        if (rows == 0) CHECK(line == "flat,0,alive_link1,10");
        ++rows;
    }
    CHECK(rows == 31 * (metric_columns().size() - 1));
    CHECK(std::filesystem::exists(dir / "report/summary.json"));
    CHECK(slurp(dir / "report/summary.md").find("C steady") != std::string::npos);
}

TEST_CASE("report on case 2 runs") {
    TempDir dir;
    run_command(manifest_for({"case2-non", "case2-partial", "case2-full"}, seeds_upto(20), dir.path()), quiet());
    const Report r = build_report(dir.path());
    REQUIRE(r.scenarios.size() == 3);
    const auto find = [&](const std::string& name) -> const ScenarioSummary& {
        for (const auto& s : r.scenarios)
            if (s.name == name) return s;
        throw std::runtime_error("missing " + name);
    };
    CHECK(find("case2-non").final_mean("cross_area_fraction") == 0.0);
    CHECK(find("case2-full").final_mean("cross_area_fraction") > 0.0);
    CHECK(find("case2-full").case_mode == CaseMode::Case2);
    CHECK(find("case2-full").runs == 20);

    const auto ranking = [&](const std::string& metric) {
        for (const auto& o : r.orderings)
            if (o.metric == metric && o.group == "case2") return o.ranked;
        return std::vector<std::string>{};
    };
    CHECK(ranking("cum_orders_captured") == std::vector<std::string>{"case2-full", "case2-partial", "case2-non"});
    CHECK(ranking("cross_area_fraction") == std::vector<std::string>{"case2-full", "case2-partial", "case2-non"});
    CHECK(ranking("cum_orders_completed").size() == 3);
}

TEST_CASE("case 2 completed-order ranking" * doctest::should_fail()) {
    // Known divergence: independent orders complete once their time runs out
    // with any part served, which every regime achieves at about the same
    // rate, so this ranking is not produced.
    TempDir dir;
    run_command(manifest_for({"case2-non", "case2-partial", "case2-full"}, seeds_upto(20), dir.path()), quiet());
    const Report r = build_report(dir.path());
    std::vector<std::string> ranked;
    for (const auto& o : r.orderings)
        if (o.metric == "cum_orders_completed") ranked = o.ranked;
    CHECK(ranked == std::vector<std::string>{"case2-full", "case2-partial", "case2-non"});
}

TEST_CASE("report errors carry file and line") {
    TempDir dir;
    CHECK_THROWS_AS(build_report(dir / "absent"), IoError);
    CHECK_THROWS_AS(build_report(dir.path()), IoError);

    run_command(manifest_for({"case1-low"}, {1, 2}, dir.path(), 5), quiet());
    std::string text = slurp(dir / "case1-low/seed_2.csv");
    const std::size_t third = text.find('\n', text.find('\n', text.find('\n') + 1) + 1);
    text.insert(third, ",extra");
    spit(dir / "case1-low/seed_2.csv", text);
    try {
        build_report(dir.path());
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        const std::string expected = (dir / "case1-low/seed_2.csv").string() + ":3:";
        CHECK(std::string(e.what()).rfind(expected, 0) == 0);
    }

    spit(dir / "case1-low/seed_2.csv", "tick,alive_link1\n0,5\n");
    CHECK_THROWS_AS(build_report(dir.path()), CsvError);
}

}  // TEST_SUITE
