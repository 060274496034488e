#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "ecosim/config.hpp"
#include "ecosim/engine.hpp"

namespace ecosim::test {

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ecosim-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// A node with fixed attributes; nothing random.
inline ServiceNode make_node(std::uint64_t id, LinkRole role, Position pos, double capital = 110.0) {
    ServiceNode n;
    n.id = NodeId{id};
    n.role = role;
    n.pos = pos;
    n.capital = capital;
    n.speed = 1;
    n.vision = 5;
    n.capacity = 2;
    n.op_cost = 1.0;
    return n;
}

inline Order make_chain_order(std::uint64_t id, Position pos, LinkRole stage, const ProfitShares& shares) {
    Order o;
    o.id = OrderId{id};
    o.pos = pos;
    o.shares = shares;
    o.total_profit = shares.total();
    o.mode = OrderMode::Chain;
    o.stage = stage;
    return o;
}

inline Order make_independent_order(std::uint64_t id, Position pos, const ProfitShares& shares) {
    Order o = make_chain_order(id, pos, LinkRole::Link1, shares);
    o.mode = OrderMode::Independent;
    return o;
}

/// Config with an empty initial population and no demand noise, for
/// hand-built micro-worlds.
inline ExperimentConfig micro_config() {
    ExperimentConfig c;
    c.initial_nodes_per_area = 0;
    c.demand.amplitude_m = 0.0;
    return c;
}

}  // namespace ecosim::test
