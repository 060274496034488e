#include "ecosim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace ecosim {

double WorldState::total_capital() const {
    double sum = 0.0;
    for (const auto& n : nodes) sum += n.capital;
    return sum;
}

WorldState make_world(const ValidatedConfig& config) {
    WorldState w;
    w.rng = Rng(config->seed);
    w.nodes = spawn_initial_nodes(config, w.rng, 0);
    w.next_node_id = w.nodes.size();
    return w;
}

// ---------------------------------------------------------------------------

namespace {

template <class Positions>
void build_buckets(const AreaLayout& layout, const Positions& items, std::vector<std::uint32_t>& start,
                   std::vector<std::uint32_t>& out) {
    const std::size_t cells = layout.cell_count();
    start.assign(cells + 1, 0);
    for (const auto& it : items) ++start[layout.cell_index(it.pos) + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    out.resize(items.size());
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    for (std::uint32_t i = 0; i < items.size(); ++i) out[fill[layout.cell_index(items[i].pos)]++] = i;
}

}  // namespace

SpatialIndex::SpatialIndex(const WorldState& world, const AreaLayout& layout) : layout_(layout) {
    build_buckets(layout, world.orders, order_start_, order_items_);
    build_buckets(layout, world.nodes, node_start_, node_items_);
}

// ---------------------------------------------------------------------------
// Demand
// ---------------------------------------------------------------------------

std::size_t spawn_count(int t, const DemandProfile& demand) {
    const double y = demand.base_n + demand.amplitude_m * std::sin(static_cast<double>(t));
    return static_cast<std::size_t>(std::max(0L, std::lround(y)));
}

std::vector<Order> demand_tick(int t, const DemandProfile& demand, const AreaLayout& layout,
                               const CompetitionStrategy& competition, std::uint64_t& next_order_id,
                               Rng& rng) {
    const std::size_t count = spawn_count(t, demand);
    const bool chain = demand.spawn_rule == SpawnRule::Area1Only;
    const int x_end = chain ? layout.end_column(AreaId::Area1) : layout.grid_width;
    const ProfitShares shares = profit_split(demand.total_order_profit, competition.ratio);

    std::vector<Order> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Order o;
        o.id = OrderId{next_order_id++};
        o.pos.x = static_cast<int>(rng.uniform_int(0, x_end - 1));
        o.pos.y = static_cast<int>(rng.uniform_int(0, layout.grid_height - 1));
        o.total_profit = demand.total_order_profit;
        o.shares = shares;
        o.mode = chain ? OrderMode::Chain : OrderMode::Independent;
        o.stage = LinkRole::Link1;
        o.ttl = demand.order_ttl;
        out.push_back(o);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Perception and movement
// ---------------------------------------------------------------------------

namespace {

constexpr int sign(int v) { return (v > 0) - (v < 0); }

constexpr std::array<Position, 8> kNeighbours{{{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

}  // namespace

std::vector<Position> greedy_path(Position from, Position target, int speed, int stop_distance,
                                  AreaSet allowed, const AreaLayout& layout) {
    std::vector<Position> path;
    Position cur = from;
    for (int s = 0; s < speed; ++s) {
        if (chebyshev(cur, target) <= stop_distance) break;
        const int dx = sign(target.x - cur.x);
        const int dy = sign(target.y - cur.y);
        const std::array<Position, 3> options{{{cur.x + dx, cur.y + dy}, {cur.x + dx, cur.y}, {cur.x, cur.y + dy}}};
        bool moved = false;
        for (const Position& next : options) {
            if (next == cur || !cell_allowed(next, allowed, layout)) continue;
            if (chebyshev(next, target) >= chebyshev(cur, target)) continue;
            cur = next;
            moved = true;
            break;
        }
        if (!moved) break;
        path.push_back(cur);
    }
    return path;
}

MoveDecision perceive_and_choose(const ServiceNode& node, const WorldState& world, const SpatialIndex& index,
                                 AreaSet allowed, const AreaLayout& layout, Rng& rng) {
    const int r = node.vision;
    const int x0 = std::max(0, node.pos.x - r), x1 = std::min(layout.grid_width - 1, node.pos.x + r);
    const int y0 = std::max(0, node.pos.y - r), y1 = std::min(layout.grid_height - 1, node.pos.y + r);

    // observational learning: nearest eligible order in sight
    const Order* best_order = nullptr;
    int best_dist = 0;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const Position cell{x, y};
            if (!allowed.contains(area_of(cell, layout))) continue;
            for (std::uint32_t oi : index.orders_at(cell)) {
                const Order& o = world.orders[oi];
                if (!o.eligible_for(node.role)) continue;
                const int d = chebyshev(node.pos, o.pos);
                if (!best_order || std::tie(d, o.id) < std::tie(best_dist, best_order->id)) {
                    best_order = &o;
                    best_dist = d;
                }
            }
        }
    }
    if (best_order) {
        MoveDecision dec{MoveKind::SeekOrder, raw(best_order->id), {}};
        dec.path = greedy_path(node.pos, best_order->pos, node.speed, 1, allowed, layout);
        return dec;
    }

    // imitation: follow the richest richer peer of the same role
    const ServiceNode* model = nullptr;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            for (std::uint32_t ni : index.nodes_at({x, y})) {
                const ServiceNode& other = world.nodes[ni];
                if (other.id == node.id || other.role != node.role || !(other.capital > node.capital)) continue;
                if (!model || other.capital > model->capital ||
                    (other.capital == model->capital && other.id < model->id))
                    model = &other;
            }
        }
    }
    if (model) {
        MoveDecision dec{MoveKind::Imitate, raw(model->id), {}};
        dec.path = greedy_path(node.pos, model->pos, node.speed, 1, allowed, layout);
        return dec;
    }

    MoveDecision dec{MoveKind::RandomWalk, 0, {}};
    const Position step = kNeighbours[static_cast<std::size_t>(rng.uniform_int(0, 7))];
    const Position next{node.pos.x + step.x, node.pos.y + step.y};
    if (cell_allowed(next, allowed, layout)) dec.path.push_back(next);
    return dec;
}

double apply_move(ServiceNode& node, const MoveDecision& decision, double distance_cost_k) {
    if (decision.path.empty()) return 0.0;
    node.pos = decision.path.back();
    const double cost = distance_cost_k * static_cast<double>(decision.cells_moved());
    node.capital -= cost;
    node.cumulative_cost += cost;
    node.cumulative_search_cost += cost;
    return cost;
}

// ---------------------------------------------------------------------------
// Capture and settlement
// ---------------------------------------------------------------------------

std::vector<Capture> capture_orders(WorldState& world, std::span<const std::size_t> activation,
                                    const SpatialIndex& index, ConvergenceKind convergence,
                                    const AreaLayout& layout) {
    std::vector<Capture> captures;
    struct Candidate {
        int dist;
        OrderId id;
        std::uint32_t index;
    };
    std::vector<Candidate> candidates;

    for (std::size_t ni : activation) {
        ServiceNode& node = world.nodes[ni];
        const AreaSet allowed = allowed_areas(node.role, convergence);
        candidates.clear();
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const Position cell{node.pos.x + dx, node.pos.y + dy};
                if (!cell_allowed(cell, allowed, layout)) continue;
                for (std::uint32_t oi : index.orders_at(cell)) {
                    if (world.orders[oi].eligible_for(node.role))
                        candidates.push_back({chebyshev(node.pos, cell), world.orders[oi].id, oi});
                }
            }
        }
        std::sort(candidates.begin(), candidates.end(),
                  [](const Candidate& a, const Candidate& b) { return std::tie(a.dist, a.id) < std::tie(b.dist, b.id); });
        const std::size_t take = std::min(candidates.size(), static_cast<std::size_t>(std::max(0, node.capacity)));
        for (std::size_t i = 0; i < take; ++i) {
            Order& o = world.orders[candidates[i].index];
            if (o.mode == OrderMode::Chain) o.claimed = true;
            else o.parts_remaining[index_of(node.role)] = false;
            ++node.orders_captured;
            captures.push_back({node.id, o.id, node.role, area_of(o.pos, layout) != home_area(node.role)});
        }
    }
    return captures;
}

namespace {

template <class T, class Id>
T* find_by_id(std::vector<T>& items, Id id) {
    auto it = std::lower_bound(items.begin(), items.end(), id, [](const T& a, Id b) { return a.id < b; });
    return (it != items.end() && it->id == id) ? &*it : nullptr;
}

}  // namespace

Settlement settle_profits(std::span<const Capture> captures, const ConvergenceStrategy& convergence,
                          WorldState& world, const AreaLayout& layout) {
    Settlement out;
    std::vector<OrderId> done;
    for (const Capture& c : captures) {
        ServiceNode* node = find_by_id(world.nodes, c.node);
        Order* order = find_by_id(world.orders, c.order);
        if (!node || !order) throw InvariantViolation("capture refers to an unknown node or order");

        const double share = order->shares[c.link];
        const double fee = c.cross_area ? share * convergence.guidance_fee : 0.0;
        const double net = share - fee;
        node->capital += net;
        node->cumulative_profit += net;
        out.credits.push_back({c.node, c.link, net});
        out.credited_total += net;
        out.fees_total += fee;

        auto& L = world.ledgers;
        L.credited += net;
        L.fees += fee;
        L.profit_by_link[index_of(c.link)] += net;
        L.fee_pool_by_area[index_of(home_area(node->role))] += fee;
        ++L.orders_captured;
        if (c.cross_area) ++L.cross_area_captures;

        if (order->mode == OrderMode::Chain) {
            if (order->stage != c.link) throw InvariantViolation("chain order credited out of stage order");
            if (c.link == LinkRole::Link3) {
                done.push_back(order->id);
                continue;
            }
            const auto next = static_cast<LinkRole>(index_of(c.link) + 1);
            const AreaId area = home_area(next);
            const int x = layout.first_column(area) + static_cast<int>(world.rng.uniform_int(1, 5));
            const int y = node->pos.y + static_cast<int>(world.rng.uniform_int(-3, 3));
            order->pos = {std::min(x, layout.end_column(area) - 1), std::clamp(y, 0, layout.grid_height - 1)};
            order->stage = next;
            order->age_in_stage = 0;
            order->claimed = false;
            out.forwarded.push_back(order->id);
        } else if (order->all_parts_done()) {
            done.push_back(order->id);
        }
    }

    if (!done.empty()) {
        std::sort(done.begin(), done.end());
        std::erase_if(world.orders, [&](const Order& o) { return std::binary_search(done.begin(), done.end(), o.id); });
        world.ledgers.orders_completed += done.size();
    }
    out.completed = std::move(done);
    return out;
}

// ---------------------------------------------------------------------------
// Costs, death, reproduction, expiry
// ---------------------------------------------------------------------------

double apply_operation_costs(std::span<ServiceNode> nodes) {
    double total = 0.0;
    for (auto& n : nodes) {
        n.capital -= n.op_cost;
        n.cumulative_cost += n.op_cost;
        total += n.op_cost;
    }
    return total;
}

std::vector<ServiceNode> cull_dead(std::vector<ServiceNode>& nodes, double death_threshold) {
    std::vector<ServiceNode> dead;
    auto alive_end = std::stable_partition(nodes.begin(), nodes.end(),
                                           [&](const ServiceNode& n) { return !(n.capital < death_threshold); });
    dead.assign(std::make_move_iterator(alive_end), std::make_move_iterator(nodes.end()));
    nodes.erase(alive_end, nodes.end());
    return dead;
}

std::vector<Birth> reproduce(std::vector<ServiceNode>& nodes, double reproduction_threshold,
                             const AttributeRanges& ranges, ConvergenceKind convergence,
                             const AreaLayout& layout, std::uint64_t& next_node_id, Rng& rng) {
    std::vector<Birth> births;
    std::vector<std::uint16_t> occupied(layout.cell_count(), 0);
    for (const auto& n : nodes) ++occupied[layout.cell_index(n.pos)];

    const std::size_t parents = nodes.size();
    std::vector<Position> free_cells;
    for (std::size_t i = 0; i < parents; ++i) {
        if (nodes[i].capital < reproduction_threshold) continue;
        ServiceNode child = nodes[i];
        ServiceNode& parent = nodes[i];

        child.id = NodeId{next_node_id++};
        child.capital = rng.uniform(ranges.initial_capital.lo, ranges.initial_capital.hi);
        parent.capital -= child.capital;

        const auto mutate_int = [&](int v, const Range<int>& r) {
            return r.clamp(static_cast<int>(std::lround(v * rng.uniform(ranges.mutation.lo, ranges.mutation.hi))));
        };
        child.speed = mutate_int(parent.speed, ranges.speed);
        child.vision = mutate_int(parent.vision, ranges.vision);
        child.capacity = mutate_int(parent.capacity, ranges.capacity);
        child.op_cost = ranges.op_cost.clamp(parent.op_cost * rng.uniform(ranges.mutation.lo, ranges.mutation.hi));
        child.cumulative_profit = 0.0;
        child.cumulative_cost = 0.0;
        child.cumulative_search_cost = 0.0;
        child.orders_captured = 0;

        const AreaSet allowed = allowed_areas(parent.role, convergence);
        free_cells.clear();
        for (const Position& d : kNeighbours) {
            const Position p{parent.pos.x + d.x, parent.pos.y + d.y};
            if (cell_allowed(p, allowed, layout) && occupied[layout.cell_index(p)] == 0) free_cells.push_back(p);
        }
        if (!free_cells.empty())
            child.pos = free_cells[static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(free_cells.size()) - 1))];
        ++occupied[layout.cell_index(child.pos)];

        births.push_back({parent.id, child.id});
        nodes.push_back(child);  // invalidates `parent`
    }
    return births;
}

ExpiryResult expire_orders(std::vector<Order>& orders) {
    ExpiryResult out;
    std::erase_if(orders, [&](Order& o) {
        if (o.age_in_stage > o.ttl) {
            if (o.mode == OrderMode::Independent && o.any_part_done()) out.completed.push_back(o.id);
            else out.expired.push_back(o.id);
            return true;
        }
        if (o.age_in_stage < kNoExpiry) ++o.age_in_stage;
        return false;
    });
    return out;
}

// ---------------------------------------------------------------------------

TickReport step(WorldState& world, const ValidatedConfig& vc) {
    const ExperimentConfig& cfg = vc.get();
    const AreaLayout& layout = cfg.layout;
    auto& L = world.ledgers;

    TickReport report;
    report.capital_before = world.total_capital();

    // demand
    auto fresh = demand_tick(world.tick, cfg.demand, layout, cfg.competition, world.next_order_id, world.rng);
    report.orders_spawned = fresh.size();
    L.orders_spawned += fresh.size();
    world.orders.insert(world.orders.end(), fresh.begin(), fresh.end());

    // activation order
    std::vector<std::size_t> activation(world.nodes.size());
    std::iota(activation.begin(), activation.end(), std::size_t{0});
    world.rng.shuffle(std::span<std::size_t>(activation));

    // perceive against the start-of-tick snapshot, then move
    const SpatialIndex index(world, layout);
    std::vector<MoveDecision> decisions(world.nodes.size());
    for (std::size_t i : activation) {
        const AreaSet allowed = allowed_areas(world.nodes[i].role, cfg.convergence.kind);
        decisions[i] = perceive_and_choose(world.nodes[i], world, index, allowed, layout, world.rng);
    }
    for (std::size_t i : activation) {
        ServiceNode& n = world.nodes[i];
        const double cost = apply_move(n, decisions[i], cfg.distance_cost_k);
        report.movement_cost_total += cost;
        L.movement_cost += cost;
        L.cost_by_link[index_of(n.role)] += cost;
    }

    // capture and settle (orders have not moved since the index was built)
    report.captures = capture_orders(world, activation, index, cfg.convergence.kind, layout);
    Settlement settled = settle_profits(report.captures, cfg.convergence, world, layout);
    report.credits = std::move(settled.credits);
    report.credited_total = settled.credited_total;
    report.fees_total = settled.fees_total;
    report.completed_orders = std::move(settled.completed);

    // operation costs
    for (const auto& n : world.nodes) L.cost_by_link[index_of(n.role)] += n.op_cost;
    report.operation_cost_total = apply_operation_costs(world.nodes);
    L.operation_cost += report.operation_cost_total;

    // death
    for (const auto& d : cull_dead(world.nodes, cfg.death_threshold)) {
        report.deaths.push_back(d.id);
        report.death_removed_capital += d.capital;
    }
    L.death_removed += report.death_removed_capital;
    L.deaths += report.deaths.size();

    // reproduction
    report.births = reproduce(world.nodes, cfg.reproduction_threshold, cfg.attribute_ranges, cfg.convergence.kind,
                              layout, world.next_node_id, world.rng);
    L.births += report.births.size();

    // expiry
    ExpiryResult expiry = expire_orders(world.orders);
    report.expired_orders = std::move(expiry.expired);
    L.orders_expired += report.expired_orders.size();
    L.orders_completed += expiry.completed.size();
    report.completed_orders.insert(report.completed_orders.end(), expiry.completed.begin(), expiry.completed.end());

    L.node_ticks += world.nodes.size();
    report.capital_after = world.total_capital();
    report.tick = ++world.tick;
    return report;
}

bool conservation_holds(const TickReport& r, double rel_tol) {
    const double delta = r.capital_after - r.capital_before;
    const double flows = r.credited_total - r.movement_cost_total - r.operation_cost_total - r.death_removed_capital;
    const double scale = std::max({1.0, std::abs(r.capital_before), std::abs(r.capital_after), r.credited_total,
                                   r.movement_cost_total + r.operation_cost_total, std::abs(r.death_removed_capital)});
    return std::abs(delta - flows) <= rel_tol * scale;
}

}  // namespace ecosim
