#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ecosim/rng.hpp"
#include "ecosim/strategy.hpp"
#include "ecosim/world.hpp"

namespace ecosim {

enum class SpawnRule : std::uint8_t {
    Area1Only,      ///< uniform in Area1, chain orders
    AllAreasFixed,  ///< uniform over the whole grid, independent orders
};

/// Order arrival law Y = N + M sin(t), with t the tick index in radians.
struct DemandProfile {
    double base_n = 100.0;
    double amplitude_m = 5.0;
    SpawnRule spawn_rule = SpawnRule::Area1Only;
    int order_ttl = 40;  // ticks per stage; kNoExpiry disables expiry
    double total_order_profit = 20.0;
    double satisfaction_weight = 0.0;  // weight of completed orders in the value outcome

    bool operator==(const DemandProfile&) const = default;
};

struct ExperimentConfig {
    AreaLayout layout;
    DemandProfile demand;
    int initial_nodes_per_area = 50;
    double death_threshold = 20.0;
    double reproduction_threshold = 300.0;
    double distance_cost_k = 0.8;
    AttributeRanges attribute_ranges;
    CompetitionStrategy competition;
    ConvergenceStrategy convergence;
    CaseMode case_mode = CaseMode::Case1;
    int ticks = 100;
    std::uint64_t seed = 1;

    bool operator==(const ExperimentConfig&) const = default;
};

struct Violation {
    std::string field;  // dotted path, e.g. "demand.amplitude_m"
    std::string message;
};

std::string format_violations(const std::vector<Violation>& violations);

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<Violation> violations)
        : std::runtime_error(format_violations(violations)), violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// An ExperimentConfig known to satisfy every invariant. Only obtainable
/// through validate_config().
class ValidatedConfig {
public:
    const ExperimentConfig& get() const { return config_; }
    const ExperimentConfig* operator->() const { return &config_; }

private:
    explicit ValidatedConfig(ExperimentConfig c) : config_(std::move(c)) {}
    friend std::variant<ValidatedConfig, std::vector<Violation>> validate_config(const ExperimentConfig&);

    ExperimentConfig config_;
};

using ValidationResult = std::variant<ValidatedConfig, std::vector<Violation>>;

ValidationResult validate_config(const ExperimentConfig& config);

/// validate_config() that throws ConfigError on any violation.
ValidatedConfig validated(const ExperimentConfig& config);

/// Case-appropriate spawn rule for a case mode.
constexpr SpawnRule spawn_rule_for(CaseMode m) {
    return m == CaseMode::Case1 ? SpawnRule::Area1Only : SpawnRule::AllAreasFixed;
}

// ---------------------------------------------------------------------------
// Canonical text form (JSON, fixed key order). Parsing overlays the given keys
// onto the built-in defaults, so partial files are valid.
// ---------------------------------------------------------------------------

std::string serialize_config(const ExperimentConfig& config);

using ParseResult = std::variant<ExperimentConfig, std::vector<Violation>>;
ParseResult parse_config(const std::string& text);

/// Sets one numeric leaf addressed by a dotted path (e.g. "demand.base_n",
/// "attribute_ranges.speed.1"). Also accepts "competition.link1_share": the
/// link-1 fraction f with the remainder split equally, i.e. (f, (1-f)/2, (1-f)/2).
/// Returns false if the path does not name a numeric parameter.
bool set_parameter(ExperimentConfig& config, const std::string& path, double value);

// ---------------------------------------------------------------------------
// Initial population
// ---------------------------------------------------------------------------

/// initial_nodes_per_area nodes per role, placed uniformly in the role's home
/// area with attributes drawn uniformly from the configured ranges. Ids are
/// assigned sequentially from `first_id`.
std::vector<ServiceNode> spawn_initial_nodes(const ValidatedConfig& config, Rng& rng,
                                             std::uint64_t first_id = 0);

}  // namespace ecosim
