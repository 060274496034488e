#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string_view>

namespace ecosim {

// ---------------------------------------------------------------------------
// Roles and areas
// ---------------------------------------------------------------------------

/// Stage of the three-link order processing chain a provider can serve.
enum class LinkRole : std::uint8_t { Link1 = 0, Link2 = 1, Link3 = 2 };

/// One of the three vertical strips of the grid; Link_i's home is Area_i.
enum class AreaId : std::uint8_t { Area1 = 0, Area2 = 1, Area3 = 2 };

inline constexpr std::array<LinkRole, 3> kRoles{LinkRole::Link1, LinkRole::Link2, LinkRole::Link3};
inline constexpr std::array<AreaId, 3> kAreas{AreaId::Area1, AreaId::Area2, AreaId::Area3};

constexpr std::size_t index_of(LinkRole r) { return static_cast<std::size_t>(r); }
constexpr std::size_t index_of(AreaId a) { return static_cast<std::size_t>(a); }
constexpr AreaId home_area(LinkRole r) { return static_cast<AreaId>(index_of(r)); }

std::string_view to_string(LinkRole r);
std::string_view to_string(AreaId a);

/// Small value set of areas (bit i set iff Area_{i+1} is a member).
class AreaSet {
public:
    constexpr AreaSet() = default;
    constexpr AreaSet(std::initializer_list<AreaId> areas) {
        for (AreaId a : areas) insert(a);
    }

    constexpr void insert(AreaId a) { bits_ |= static_cast<std::uint8_t>(1u << index_of(a)); }
    constexpr bool contains(AreaId a) const { return (bits_ >> index_of(a)) & 1u; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr bool subset_of(AreaSet other) const { return (bits_ & ~other.bits_) == 0; }
    constexpr std::size_t size() const { return std::size_t((bits_ & 1u) + ((bits_ >> 1) & 1u) + ((bits_ >> 2) & 1u)); }

    constexpr bool operator==(const AreaSet&) const = default;

private:
    std::uint8_t bits_ = 0;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

struct Position {
    int x = 0;
    int y = 0;

    constexpr bool operator==(const Position&) const = default;
};

constexpr int chebyshev(Position a, Position b) {
    const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
    const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
    return dx > dy ? dx : dy;
}

/// Grid dimensions plus the two column splits that carve it into three
/// vertical strips: Area1 = [0, split1), Area2 = [split1, split2),
/// Area3 = [split2, grid_width).
struct AreaLayout {
    int grid_width = 200;
    int grid_height = 90;
    std::array<int, 2> split_columns{66, 133};

    constexpr bool contains(Position p) const {
        return p.x >= 0 && p.x < grid_width && p.y >= 0 && p.y < grid_height;
    }
    constexpr std::size_t cell_count() const { return std::size_t(grid_width) * std::size_t(grid_height); }
    constexpr std::size_t cell_index(Position p) const {
        return std::size_t(p.y) * std::size_t(grid_width) + std::size_t(p.x);
    }

    /// First column of the area.
    constexpr int first_column(AreaId a) const {
        return a == AreaId::Area1 ? 0 : split_columns[index_of(a) - 1];
    }
    /// One past the last column of the area.
    constexpr int end_column(AreaId a) const {
        return a == AreaId::Area3 ? grid_width : split_columns[index_of(a)];
    }

    constexpr bool operator==(const AreaLayout&) const = default;
};

constexpr AreaId area_of(Position pos, const AreaLayout& layout) {
    if (pos.x < layout.split_columns[0]) return AreaId::Area1;
    if (pos.x < layout.split_columns[1]) return AreaId::Area2;
    return AreaId::Area3;
}

constexpr bool cell_allowed(Position pos, AreaSet allowed, const AreaLayout& layout) {
    return layout.contains(pos) && allowed.contains(area_of(pos, layout));
}

// ---------------------------------------------------------------------------
// Agents and orders
// ---------------------------------------------------------------------------

enum class NodeId : std::uint64_t {};
enum class OrderId : std::uint64_t {};

constexpr std::uint64_t raw(NodeId id) { return static_cast<std::uint64_t>(id); }
constexpr std::uint64_t raw(OrderId id) { return static_cast<std::uint64_t>(id); }

template <class T>
struct Range {
    T lo{};
    T hi{};

    constexpr bool contains(T v) const { return v >= lo && v <= hi; }
    constexpr T clamp(T v) const { return std::clamp(v, lo, hi); }
    constexpr bool operator==(const Range&) const = default;
};

/// Bounded-random attribute ranges used at creation and as mutation clamps.
struct AttributeRanges {
    Range<int> speed{1, 4};
    Range<int> vision{3, 9};
    Range<int> capacity{2, 10};
    Range<double> op_cost{1.0, 5.0};
    Range<double> initial_capital{100.0, 120.0};
    Range<double> mutation{0.9, 1.1};

    bool operator==(const AttributeRanges&) const = default;
};

/// Movement heuristic of a node. Only one policy exists today: seek a visible
/// order, else follow a richer visible peer, else wander.
enum class MovePolicy : std::uint8_t { SeekImitateWander };

/// Inheritance rule applied when a node reproduces.
enum class Adaptation : std::uint8_t { MutateOnReproduce };

struct ServiceNode {
    NodeId id{};
    LinkRole role = LinkRole::Link1;
    Position pos;
    double capital = 0.0;
    int speed = 1;
    int vision = 3;
    int capacity = 2;
    double op_cost = 1.0;
    MovePolicy move_policy = MovePolicy::SeekImitateWander;
    Adaptation adaptation = Adaptation::MutateOnReproduce;
    double cumulative_profit = 0.0;
    double cumulative_cost = 0.0;
    double cumulative_search_cost = 0.0;  // movement part of cumulative_cost
    std::uint64_t orders_captured = 0;

    bool operator==(const ServiceNode&) const = default;
};

/// Per-link profit parts (k1, k2, k3) of one order.
struct ProfitShares {
    std::array<double, 3> k{};

    double operator[](LinkRole r) const { return k[index_of(r)]; }
    double total() const { return k[0] + k[1] + k[2]; }
    bool operator==(const ProfitShares&) const = default;
};

enum class OrderMode : std::uint8_t {
    Chain,        ///< processed Link1 -> Link2 -> Link3, forwarded between areas
    Independent,  ///< each link processes its own part, in any order
};

inline constexpr int kNoExpiry = std::numeric_limits<int>::max();

struct Order {
    OrderId id{};
    Position pos;
    double total_profit = 0.0;
    ProfitShares shares;
    OrderMode mode = OrderMode::Chain;
    LinkRole stage = LinkRole::Link1;                   // Chain: next required processor
    std::array<bool, 3> parts_remaining{true, true, true};  // Independent
    int age_in_stage = 0;
    int ttl = 40;
    bool claimed = false;  // Chain: taken this tick, awaiting settlement

    /// True if a node of `role` may still process this order.
    bool eligible_for(LinkRole role) const {
        if (mode == OrderMode::Chain) return !claimed && stage == role;
        return parts_remaining[index_of(role)];
    }
    bool any_part_done() const {
        return !(parts_remaining[0] && parts_remaining[1] && parts_remaining[2]);
    }
    bool all_parts_done() const {
        return !parts_remaining[0] && !parts_remaining[1] && !parts_remaining[2];
    }

    bool operator==(const Order&) const = default;
};

}  // namespace ecosim
