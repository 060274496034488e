#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ecosim/world.hpp"

namespace ecosim {

/// Profit-sharing proportions across the three links. Only proportions
/// matter: (1,2,7) and (2,4,14) describe the same strategy.
struct CompetitionStrategy {
    std::array<double, 3> ratio{1.0, 1.0, 1.0};

    bool operator==(const CompetitionStrategy&) const = default;
};

enum class ConvergenceKind : std::uint8_t { NonConvergence, PartialConvergence, FullConvergence };

/// Cross-area order-sharing regime. `guidance_fee` is the fraction of a
/// share withheld when a node captures outside its home area.
struct ConvergenceStrategy {
    ConvergenceKind kind = ConvergenceKind::NonConvergence;
    double guidance_fee = 0.0;

    bool operator==(const ConvergenceStrategy&) const = default;
};

enum class CaseMode : std::uint8_t {
    Case1,  ///< chain orders, competition strategies
    Case2,  ///< independent orders, convergence strategies
};

std::string_view to_string(ConvergenceKind k);
std::string_view to_string(CaseMode m);
std::optional<ConvergenceKind> parse_convergence_kind(std::string_view s);
std::optional<CaseMode> parse_case_mode(std::string_view s);

/// k_i = total * r_i / (r1 + r2 + r3). The last share is computed as the
/// remainder so the three parts always sum to `total`.
ProfitShares profit_split(double total, const std::array<double, 3>& ratio);

AreaSet allowed_areas(LinkRole role, ConvergenceKind kind);

// ---------------------------------------------------------------------------
// Parameter sweep
// ---------------------------------------------------------------------------

struct SweepSpec {
    std::string param;
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;
    std::size_t replicates = 1;
};

/// Grid {min, min+step, ...} up to max. Points are computed as min + i*step
/// (not accumulated), with a 1e-9 relative slack on the upper bound.
std::vector<double> sweep_grid(const SweepSpec& spec);

/// Returns an empty string if the spec is usable, else the reason it is not.
std::string check_sweep_spec(const SweepSpec& spec);

struct SweepRow {
    double param = 0.0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation over replicates
    std::vector<double> samples;
};

struct SweepResult {
    double best_param = 0.0;
    double best_value = 0.0;
    std::size_t best_index = 0;
    std::vector<SweepRow> rows;  // grid order
};

class SweepError : public std::runtime_error {
public:
    SweepError(double param, std::size_t replicate, const std::string& what)
        : std::runtime_error(what), param_(param), replicate_(replicate) {}
    double param() const { return param_; }
    std::size_t replicate() const { return replicate_; }

private:
    double param_;
    std::size_t replicate_;
};

/// Objective evaluated at (parameter value, replicate index).
using SweepObjective = std::function<double(double, std::size_t)>;

/// Evaluates every grid point (averaging over replicates) and returns the
/// argmax, ties going to the smallest parameter. Grid points are evaluated on
/// up to `workers` threads; results are always reported in grid order.
SweepResult sweep_maximize(const SweepObjective& objective, const SweepSpec& spec,
                           unsigned workers = 1);

// ---------------------------------------------------------------------------
// Strategy catalog
// ---------------------------------------------------------------------------

struct StrategyPreset {
    std::string name;
    CaseMode case_mode = CaseMode::Case1;
    CompetitionStrategy competition;
    ConvergenceStrategy convergence;
};

class StrategyCatalog {
public:
    StrategyCatalog() = default;
    explicit StrategyCatalog(std::vector<StrategyPreset> presets);

    /// Throws std::invalid_argument on a duplicate name.
    void add(StrategyPreset preset);
    const StrategyPreset* find(std::string_view name) const;
    std::vector<std::string> names() const;
    const std::vector<StrategyPreset>& presets() const { return presets_; }

    /// The six built-in scenarios (case1-low ... case2-full).
    static const StrategyCatalog& builtin();

private:
    std::vector<StrategyPreset> presets_;
};

/// Exhaustive selection over the catalog: the preset with the highest score,
/// first in catalog order on ties. Throws std::invalid_argument if empty.
const StrategyPreset& select_best(const StrategyCatalog& catalog,
                                  const std::function<double(const StrategyPreset&)>& score);

}  // namespace ecosim
