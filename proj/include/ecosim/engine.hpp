#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecosim/config.hpp"
#include "ecosim/rng.hpp"
#include "ecosim/strategy.hpp"
#include "ecosim/world.hpp"

namespace ecosim {

/// Raised when a run breaks one of its own accounting invariants.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Cumulative totals since tick 0, including nodes that have since died.
struct Ledgers {
    double credited = 0.0;  // net of guidance fees
    double fees = 0.0;
    double movement_cost = 0.0;
    double operation_cost = 0.0;
    double death_removed = 0.0;  // capital destroyed with dead nodes
    std::uint64_t orders_spawned = 0;
    std::uint64_t orders_captured = 0;  // captures (chain stages or independent parts)
    std::uint64_t orders_completed = 0;
    std::uint64_t orders_expired = 0;
    std::uint64_t cross_area_captures = 0;
    std::uint64_t births = 0;
    std::uint64_t deaths = 0;
    std::uint64_t node_ticks = 0;  // sum over ticks of the alive count at end of tick
    std::array<double, 3> profit_by_link{};
    std::array<double, 3> cost_by_link{};
    std::array<double, 3> fee_pool_by_area{};

    bool operator==(const Ledgers&) const = default;
};

struct WorldState {
    int tick = 0;
    std::vector<ServiceNode> nodes;
    std::vector<Order> orders;
    Rng rng;
    Ledgers ledgers;
    std::uint64_t next_node_id = 0;
    std::uint64_t next_order_id = 0;

    double total_capital() const;
};

/// Tick 0 world: seeded generator and the initial population.
WorldState make_world(const ValidatedConfig& config);

// ---------------------------------------------------------------------------
// Per-tick audit trail
// ---------------------------------------------------------------------------

struct Capture {
    NodeId node{};
    OrderId order{};
    LinkRole link = LinkRole::Link1;
    bool cross_area = false;  // order lies outside the capturer's home area
    bool operator==(const Capture&) const = default;
};

struct Credit {
    NodeId node{};
    LinkRole link = LinkRole::Link1;
    double amount = 0.0;  // net of guidance fee
    bool operator==(const Credit&) const = default;
};

struct Birth {
    NodeId parent{};
    NodeId child{};
    bool operator==(const Birth&) const = default;
};

struct TickReport {
    int tick = 0;
    std::size_t orders_spawned = 0;
    std::vector<Credit> credits;
    double credited_total = 0.0;
    double fees_total = 0.0;
    double movement_cost_total = 0.0;
    double operation_cost_total = 0.0;
    std::vector<Capture> captures;
    std::vector<OrderId> completed_orders;
    std::vector<NodeId> deaths;
    double death_removed_capital = 0.0;
    std::vector<Birth> births;
    std::vector<OrderId> expired_orders;
    double capital_before = 0.0;
    double capital_after = 0.0;

    bool operator==(const TickReport&) const = default;
};

// ---------------------------------------------------------------------------
// Spatial lookup
// ---------------------------------------------------------------------------

/// Cell buckets (CSR layout) over order and node vector indices. Built from a
/// snapshot; becomes stale once positions change.
class SpatialIndex {
public:
    SpatialIndex(const WorldState& world, const AreaLayout& layout);

    std::span<const std::uint32_t> orders_at(Position p) const { return bucket(order_start_, order_items_, p); }
    std::span<const std::uint32_t> nodes_at(Position p) const { return bucket(node_start_, node_items_, p); }

private:
    std::span<const std::uint32_t> bucket(const std::vector<std::uint32_t>& start,
                                          const std::vector<std::uint32_t>& items, Position p) const {
        const std::size_t c = layout_.cell_index(p);
        return {items.data() + start[c], items.data() + start[c + 1]};
    }

    AreaLayout layout_;
    std::vector<std::uint32_t> order_start_, order_items_;
    std::vector<std::uint32_t> node_start_, node_items_;
};

// ---------------------------------------------------------------------------
// Phases, in step() order
// ---------------------------------------------------------------------------

/// round(N + M sin(t)).
std::size_t spawn_count(int t, const DemandProfile& demand);

/// New orders for tick t. Ids are drawn from `next_order_id`.
std::vector<Order> demand_tick(int t, const DemandProfile& demand, const AreaLayout& layout,
                               const CompetitionStrategy& competition, std::uint64_t& next_order_id,
                               Rng& rng);

enum class MoveKind : std::uint8_t { SeekOrder, Imitate, RandomWalk };

struct MoveDecision {
    MoveKind kind = MoveKind::RandomWalk;
    std::uint64_t target = 0;  // order id (SeekOrder) or node id (Imitate)
    std::vector<Position> path;  // cells visited, excluding the start

    std::size_t cells_moved() const { return path.size(); }
};

/// Greedy Chebyshev path toward `target`: each step moves one cell on both
/// axes where possible, falling back to a single axis when the diagonal cell
/// is not allowed. Stops after `speed` steps, once within `stop_distance` of
/// the target, or when blocked.
std::vector<Position> greedy_path(Position from, Position target, int speed, int stop_distance,
                                  AreaSet allowed, const AreaLayout& layout);

/// Observational learning first (nearest eligible visible order, smaller id
/// on ties), then imitation (richest strictly-richer same-role node in
/// vision, smaller id on ties), else a one-cell random step.
MoveDecision perceive_and_choose(const ServiceNode& node, const WorldState& world, const SpatialIndex& index,
                                 AreaSet allowed, const AreaLayout& layout, Rng& rng);

/// Moves the node to the end of the path and charges k per cell. Returns the cost.
double apply_move(ServiceNode& node, const MoveDecision& decision, double distance_cost_k);

/// Each node in activation order claims up to `capacity` eligible orders
/// within Chebyshev distance 1 (nearest first, then smaller id). Claimed
/// chain orders and processed independent parts are unavailable to later
/// nodes. `activation` holds indices into world.nodes.
std::vector<Capture> capture_orders(WorldState& world, std::span<const std::size_t> activation,
                                    const SpatialIndex& index, ConvergenceKind convergence,
                                    const AreaLayout& layout);

struct Settlement {
    std::vector<Credit> credits;
    double credited_total = 0.0;
    double fees_total = 0.0;
    std::vector<OrderId> completed;
    std::vector<OrderId> forwarded;
};

/// Credits each capture's link share, forwards chain orders into the next
/// area, and retires completed orders.
Settlement settle_profits(std::span<const Capture> captures, const ConvergenceStrategy& convergence,
                          WorldState& world, const AreaLayout& layout);

/// Returns the total deducted.
double apply_operation_costs(std::span<ServiceNode> nodes);

/// Removes nodes with capital strictly below the threshold and returns them.
std::vector<ServiceNode> cull_dead(std::vector<ServiceNode>& nodes, double death_threshold);

/// Every node at or above the threshold spawns one mutated child, paying its
/// starting capital. Children are appended to `nodes`.
std::vector<Birth> reproduce(std::vector<ServiceNode>& nodes, double reproduction_threshold,
                             const AttributeRanges& ranges, ConvergenceKind convergence,
                             const AreaLayout& layout, std::uint64_t& next_node_id, Rng& rng);

struct ExpiryResult {
    std::vector<OrderId> expired;    // lost with nothing processed
    std::vector<OrderId> completed;  // independent orders that timed out partly served
};

/// Drops orders whose age exceeds their ttl and ages the survivors.
ExpiryResult expire_orders(std::vector<Order>& orders);

/// One full tick. Phases: demand, activation shuffle, perceive/move,
/// capture, settle, operation costs, cull, reproduce, expire.
TickReport step(WorldState& world, const ValidatedConfig& config);

/// |Δcapital - (credits - movement - operation - removed)| within 1e-9 relative.
bool conservation_holds(const TickReport& report, double rel_tol = 1e-9);

}  // namespace ecosim
