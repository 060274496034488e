#include "ecosim/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <numeric>

namespace ecosim {

std::string_view to_string(LinkRole r) {
    switch (r) {
        case LinkRole::Link1: return "link1";
        case LinkRole::Link2: return "link2";
        case LinkRole::Link3: return "link3";
    }
    return "?";
}

std::string_view to_string(AreaId a) {
    switch (a) {
        case AreaId::Area1: return "area1";
        case AreaId::Area2: return "area2";
        case AreaId::Area3: return "area3";
    }
    return "?";
}

std::string_view to_string(ConvergenceKind k) {
    switch (k) {
        case ConvergenceKind::NonConvergence: return "non";
        case ConvergenceKind::PartialConvergence: return "partial";
        case ConvergenceKind::FullConvergence: return "full";
    }
    return "?";
}

std::string_view to_string(CaseMode m) { return m == CaseMode::Case1 ? "case1" : "case2"; }

std::optional<ConvergenceKind> parse_convergence_kind(std::string_view s) {
    if (s == "non") return ConvergenceKind::NonConvergence;
    if (s == "partial") return ConvergenceKind::PartialConvergence;
    if (s == "full") return ConvergenceKind::FullConvergence;
    return std::nullopt;
}

std::optional<CaseMode> parse_case_mode(std::string_view s) {
    if (s == "case1") return CaseMode::Case1;
    if (s == "case2") return CaseMode::Case2;
    return std::nullopt;
}

ProfitShares profit_split(double total, const std::array<double, 3>& ratio) {
    const double sum = ratio[0] + ratio[1] + ratio[2];
    ProfitShares s;
    s.k[0] = total * ratio[0] / sum;
    s.k[1] = total * ratio[1] / sum;
    s.k[2] = total - s.k[0] - s.k[1];
    return s;
}

AreaSet allowed_areas(LinkRole role, ConvergenceKind kind) {
    switch (kind) {
        case ConvergenceKind::NonConvergence:
            return AreaSet{home_area(role)};
        case ConvergenceKind::PartialConvergence:
            if (role == LinkRole::Link3) return AreaSet{AreaId::Area3};
            return AreaSet{AreaId::Area1, AreaId::Area2};
        case ConvergenceKind::FullConvergence:
            return AreaSet{AreaId::Area1, AreaId::Area2, AreaId::Area3};
    }
    return {};
}

std::string check_sweep_spec(const SweepSpec& spec) {
    if (!std::isfinite(spec.min) || !std::isfinite(spec.max) || !std::isfinite(spec.step))
        return "sweep bounds must be finite";
    if (spec.min > spec.max) return "sweep min must not exceed max";
    if (!(spec.step > 0.0)) return "sweep step must be positive";
    if (spec.replicates == 0) return "sweep replicates must be at least 1";
    return {};
}

std::vector<double> sweep_grid(const SweepSpec& spec) {
    std::vector<double> grid;
    const double slack = 1e-9 * std::max({std::abs(spec.max), std::abs(spec.min), spec.step});
    for (std::size_t i = 0;; ++i) {
        const double x = spec.min + static_cast<double>(i) * spec.step;
        if (x > spec.max + slack) break;
        grid.push_back(x);
    }
    return grid;
}

namespace {

SweepRow evaluate_point(const SweepObjective& objective, double param, std::size_t replicates) {
    SweepRow row;
    row.param = param;
    row.samples.reserve(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
        double v = 0.0;
        try {
            v = objective(param, r);
        } catch (const std::exception& e) {
            throw SweepError(param, r, "objective failed at param=" + std::to_string(param) +
                                           " replicate=" + std::to_string(r) + ": " + e.what());
        }
        if (!std::isfinite(v))
            throw SweepError(param, r, "objective is not finite at param=" + std::to_string(param) +
                                           " replicate=" + std::to_string(r));
        row.samples.push_back(v);
    }
    const double n = static_cast<double>(replicates);
    row.mean = std::accumulate(row.samples.begin(), row.samples.end(), 0.0) / n;
    if (replicates > 1) {
        double ss = 0.0;
        for (double v : row.samples) ss += (v - row.mean) * (v - row.mean);
        row.stddev = std::sqrt(ss / (n - 1.0));
    }
    return row;
}

}  // namespace

SweepResult sweep_maximize(const SweepObjective& objective, const SweepSpec& spec, unsigned workers) {
    if (auto why = check_sweep_spec(spec); !why.empty()) throw std::invalid_argument(why);
    const auto grid = sweep_grid(spec);

    SweepResult result;
    result.rows.resize(grid.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            result.rows[i] = evaluate_point(objective, grid[i], spec.replicates);
    } else {
        for (std::size_t base = 0; base < grid.size(); base += workers) {
            std::vector<std::future<SweepRow>> batch;
            const std::size_t end = std::min(grid.size(), base + workers);
            for (std::size_t i = base; i < end; ++i)
                batch.push_back(std::async(std::launch::async, evaluate_point, std::cref(objective),
                                           grid[i], spec.replicates));
            for (std::size_t i = base; i < end; ++i) result.rows[i] = batch[i - base].get();
        }
    }

    // strict > keeps the earliest (smallest) parameter on ties
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        if (i == 0 || result.rows[i].mean > result.best_value) {
            result.best_index = i;
            result.best_value = result.rows[i].mean;
            result.best_param = result.rows[i].param;
        }
    }
    return result;
}

StrategyCatalog::StrategyCatalog(std::vector<StrategyPreset> presets) {
    for (auto& p : presets) add(std::move(p));
}

void StrategyCatalog::add(StrategyPreset preset) {
    if (find(preset.name) != nullptr)
        throw std::invalid_argument("duplicate preset name: " + preset.name);
    presets_.push_back(std::move(preset));
}

const StrategyPreset* StrategyCatalog::find(std::string_view name) const {
    auto it = std::find_if(presets_.begin(), presets_.end(),
                           [&](const StrategyPreset& p) { return p.name == name; });
    return it == presets_.end() ? nullptr : &*it;
}

std::vector<std::string> StrategyCatalog::names() const {
    std::vector<std::string> out;
    out.reserve(presets_.size());
    for (const auto& p : presets_) out.push_back(p.name);
    return out;
}

const StrategyCatalog& StrategyCatalog::builtin() {
    static const StrategyCatalog catalog = [] {
        using K = ConvergenceKind;
        const CompetitionStrategy equal{{1.0, 1.0, 1.0}};
        return StrategyCatalog({
            {"case1-low", CaseMode::Case1, {{1.0, 2.0, 7.0}}, {K::NonConvergence, 0.0}},
            {"case1-moderate", CaseMode::Case1, {{2.0, 2.0, 6.0}}, {K::NonConvergence, 0.0}},
            {"case1-high", CaseMode::Case1, {{3.0, 3.0, 4.0}}, {K::NonConvergence, 0.0}},
            {"case2-non", CaseMode::Case2, equal, {K::NonConvergence, 0.0}},
            {"case2-partial", CaseMode::Case2, equal, {K::PartialConvergence, 0.0}},
            {"case2-full", CaseMode::Case2, equal, {K::FullConvergence, 0.0}},
        });
    }();
    return catalog;
}

const StrategyPreset& select_best(const StrategyCatalog& catalog,
                                  const std::function<double(const StrategyPreset&)>& score) {
    const auto& presets = catalog.presets();
    if (presets.empty()) throw std::invalid_argument("empty strategy catalog");
    std::size_t best = 0;
    double best_score = score(presets[0]);
    for (std::size_t i = 1; i < presets.size(); ++i) {
        const double s = score(presets[i]);
        if (s > best_score) {
            best = i;
            best_score = s;
        }
    }
    return presets[best];
}

}  // namespace ecosim
