#include "ecosim/config.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace ecosim {

using json = nlohmann::ordered_json;

std::string format_violations(const std::vector<Violation>& violations) {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << '\n';
        os << violations[i].field << ": " << violations[i].message;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

template <class T>
void check_range(const Range<T>& r, const std::string& field, bool require_positive,
                 std::vector<Violation>& out) {
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) {
            out.push_back({field, "range bounds must be finite"});
            return;
        }
    }
    if (r.lo > r.hi) out.push_back({field, "range must be ordered (lo <= hi)"});
    if (require_positive && r.lo <= T{0}) out.push_back({field, "range lower bound must be positive"});
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

ValidationResult validate_config(const ExperimentConfig& c) {
    std::vector<Violation> v;

    const auto& L = c.layout;
    if (L.grid_width <= 0) v.push_back({"layout.grid_width", "must be positive"});
    if (L.grid_height <= 0) v.push_back({"layout.grid_height", "must be positive"});
    if (!(0 < L.split_columns[0] && L.split_columns[0] < L.split_columns[1] &&
          L.split_columns[1] < L.grid_width))
        v.push_back({"layout.split_columns", "require 0 < split1 < split2 < grid_width"});

    const auto& D = c.demand;
    if (!finite(D.base_n) || !finite(D.amplitude_m))
        v.push_back({"demand.base_n", "demand law coefficients must be finite"});
    if (D.amplitude_m < 0.0) v.push_back({"demand.amplitude_m", "amplitude_m must be >= 0"});
    if (!(D.base_n > D.amplitude_m)) v.push_back({"demand.amplitude_m", "base_n > amplitude_m is required"});
    if (D.order_ttl < 0) v.push_back({"demand.order_ttl", "must be >= 0 (or null for no expiry)"});
    if (!finite(D.total_order_profit) || !(D.total_order_profit > 0.0))
        v.push_back({"demand.total_order_profit", "must be positive"});
    if (!finite(D.satisfaction_weight) || D.satisfaction_weight < 0.0)
        v.push_back({"demand.satisfaction_weight", "must be >= 0"});
    if (D.spawn_rule != spawn_rule_for(c.case_mode))
        v.push_back({"demand.spawn_rule", "spawn rule does not match case_mode"});

    if (c.initial_nodes_per_area < 0) v.push_back({"initial_nodes_per_area", "must be >= 0"});
    if (!finite(c.death_threshold) || !(c.death_threshold > 0.0))
        v.push_back({"death_threshold", "must be positive"});
    if (!finite(c.reproduction_threshold) || !(c.reproduction_threshold > 0.0))
        v.push_back({"reproduction_threshold", "must be positive"});
    if (!(c.death_threshold < c.reproduction_threshold))
        v.push_back({"death_threshold", "death_threshold < reproduction_threshold is required"});
    if (!finite(c.distance_cost_k) || c.distance_cost_k < 0.0)
        v.push_back({"distance_cost_k", "must be >= 0"});

    const auto& R = c.attribute_ranges;
    check_range(R.speed, "attribute_ranges.speed", true, v);
    check_range(R.vision, "attribute_ranges.vision", true, v);
    check_range(R.capacity, "attribute_ranges.capacity", true, v);
    check_range(R.op_cost, "attribute_ranges.op_cost", false, v);
    if (R.op_cost.lo < 0.0) v.push_back({"attribute_ranges.op_cost", "operation cost must be >= 0"});
    check_range(R.initial_capital, "attribute_ranges.initial_capital", true, v);
    check_range(R.mutation, "attribute_ranges.mutation", true, v);

    for (std::size_t i = 0; i < 3; ++i) {
        const double r = c.competition.ratio[i];
        if (!finite(r) || !(r > 0.0))
            v.push_back({"competition.ratio." + std::to_string(i), "ratio components must be positive"});
    }
    const double fee = c.convergence.guidance_fee;
    if (!finite(fee) || fee < 0.0 || fee >= 1.0)
        v.push_back({"convergence.guidance_fee", "must lie in [0, 1)"});

    if (c.ticks < 0) v.push_back({"ticks", "must be >= 0"});

    if (!v.empty()) return v;
    return ValidatedConfig(c);
}

ValidatedConfig validated(const ExperimentConfig& config) {
    auto result = validate_config(config);
    if (auto* bad = std::get_if<std::vector<Violation>>(&result)) throw ConfigError(std::move(*bad));
    return std::get<ValidatedConfig>(std::move(result));
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string_view to_string(SpawnRule r) { return r == SpawnRule::Area1Only ? "area1-only" : "all-areas-fixed"; }

template <class T>
json range_json(const Range<T>& r) {
    return json::array({r.lo, r.hi});
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["layout"] = {{"grid_width", c.layout.grid_width},
                   {"grid_height", c.layout.grid_height},
                   {"split_columns", json::array({c.layout.split_columns[0], c.layout.split_columns[1]})}};
    json demand;
    demand["base_n"] = c.demand.base_n;
    demand["amplitude_m"] = c.demand.amplitude_m;
    demand["spawn_rule"] = to_string(c.demand.spawn_rule);
    demand["order_ttl"] = c.demand.order_ttl == kNoExpiry ? json(nullptr) : json(c.demand.order_ttl);
    demand["total_order_profit"] = c.demand.total_order_profit;
    demand["satisfaction_weight"] = c.demand.satisfaction_weight;
    j["demand"] = demand;
    j["initial_nodes_per_area"] = c.initial_nodes_per_area;
    j["death_threshold"] = c.death_threshold;
    j["reproduction_threshold"] = c.reproduction_threshold;
    j["distance_cost_k"] = c.distance_cost_k;
    const auto& R = c.attribute_ranges;
    j["attribute_ranges"] = {{"speed", range_json(R.speed)},
                             {"vision", range_json(R.vision)},
                             {"capacity", range_json(R.capacity)},
                             {"op_cost", range_json(R.op_cost)},
                             {"initial_capital", range_json(R.initial_capital)},
                             {"mutation", range_json(R.mutation)}};
    j["competition"] = {{"ratio", json::array({c.competition.ratio[0], c.competition.ratio[1],
                                               c.competition.ratio[2]})}};
    j["convergence"] = {{"kind", to_string(c.convergence.kind)},
                        {"guidance_fee", c.convergence.guidance_fee}};
    j["case_mode"] = to_string(c.case_mode);
    j["ticks"] = c.ticks;
    j["seed"] = c.seed;
    return j;
}

/// Reads keys out of one JSON object, recording type errors and unknown keys.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path, std::vector<Violation>& out)
        : obj_(obj), path_(std::move(path)), out_(out) {
        if (!obj_.is_object()) out_.push_back({path_.empty() ? "<root>" : path_, "expected an object"});
    }

    ~ObjectReader() {
        if (!obj_.is_object()) return;
        for (const auto& [key, _] : obj_.items())
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
                out_.push_back({field(key), "unknown key"});
    }

    const json* get(const std::string& key) {
        seen_.push_back(key);
        if (!obj_.is_object() || !obj_.contains(key)) return nullptr;
        return &obj_.at(key);
    }

    void read(const std::string& key, double& dst) {
        if (const json* v = get(key)) {
            if (v->is_number()) dst = v->get<double>();
            else out_.push_back({field(key), "expected a number"});
        }
    }
    void read(const std::string& key, int& dst) {
        if (const json* v = get(key)) read_int(*v, field(key), dst);
    }
    void read(const std::string& key, std::uint64_t& dst) {
        if (const json* v = get(key)) {
            if (v->is_number_unsigned()) dst = v->get<std::uint64_t>();
            else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) dst = v->get<std::uint64_t>();
            else out_.push_back({field(key), "expected a non-negative integer"});
        }
    }
    template <class T>
    void read(const std::string& key, Range<T>& dst) {
        if (const json* v = get(key)) {
            std::array<T, 2> pair{dst.lo, dst.hi};
            if (read_array(*v, field(key), pair)) dst = {pair[0], pair[1]};
        }
    }
    template <class T, std::size_t N>
    void read(const std::string& key, std::array<T, N>& dst) {
        if (const json* v = get(key)) read_array(*v, field(key), dst);
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::vector<Violation>& violations() { return out_; }

private:
    void read_int(const json& v, const std::string& f, int& dst) {
        if (v.is_number_integer() && v.get<std::int64_t>() >= std::numeric_limits<int>::min() &&
            v.get<std::int64_t>() <= std::numeric_limits<int>::max())
            dst = v.get<int>();
        else
            out_.push_back({f, "expected an integer"});
    }
    template <class T, std::size_t N>
    bool read_array(const json& v, const std::string& f, std::array<T, N>& dst) {
        if (!v.is_array() || v.size() != N) {
            out_.push_back({f, "expected an array of " + std::to_string(N) + " numbers"});
            return false;
        }
        const std::size_t before = out_.size();
        for (std::size_t i = 0; i < N; ++i) {
            if constexpr (std::is_integral_v<T>) {
                read_int(v[i], f + "." + std::to_string(i), dst[i]);
            } else if (v[i].is_number()) {
                dst[i] = v[i].get<T>();
            } else {
                out_.push_back({f + "." + std::to_string(i), "expected a number"});
            }
        }
        return out_.size() == before;
    }

    const json& obj_;
    std::string path_;
    std::vector<Violation>& out_;
    std::vector<std::string> seen_;
};

void read_config(const json& root, ExperimentConfig& c, std::vector<Violation>& v) {
    ObjectReader top(root, "", v);
    if (const json* layout = top.get("layout")) {
        ObjectReader r(*layout, "layout", v);
        r.read("grid_width", c.layout.grid_width);
        r.read("grid_height", c.layout.grid_height);
        r.read("split_columns", c.layout.split_columns);
    }
    if (const json* demand = top.get("demand")) {
        ObjectReader r(*demand, "demand", v);
        r.read("base_n", c.demand.base_n);
        r.read("amplitude_m", c.demand.amplitude_m);
        if (const json* rule = r.get("spawn_rule")) {
            const std::string s = rule->is_string() ? rule->get<std::string>() : "";
            if (s == "area1-only") c.demand.spawn_rule = SpawnRule::Area1Only;
            else if (s == "all-areas-fixed") c.demand.spawn_rule = SpawnRule::AllAreasFixed;
            else v.push_back({"demand.spawn_rule", "expected \"area1-only\" or \"all-areas-fixed\""});
        }
        if (const json* ttl = r.get("order_ttl")) {
            if (ttl->is_null()) c.demand.order_ttl = kNoExpiry;
            else if (ttl->is_number_integer()) c.demand.order_ttl = ttl->get<int>();
            else v.push_back({"demand.order_ttl", "expected an integer or null"});
        }
        r.read("total_order_profit", c.demand.total_order_profit);
        r.read("satisfaction_weight", c.demand.satisfaction_weight);
    }
    top.read("initial_nodes_per_area", c.initial_nodes_per_area);
    top.read("death_threshold", c.death_threshold);
    top.read("reproduction_threshold", c.reproduction_threshold);
    top.read("distance_cost_k", c.distance_cost_k);
    if (const json* ranges = top.get("attribute_ranges")) {
        ObjectReader r(*ranges, "attribute_ranges", v);
        auto& R = c.attribute_ranges;
        r.read("speed", R.speed);
        r.read("vision", R.vision);
        r.read("capacity", R.capacity);
        r.read("op_cost", R.op_cost);
        r.read("initial_capital", R.initial_capital);
        r.read("mutation", R.mutation);
    }
    if (const json* comp = top.get("competition")) {
        ObjectReader r(*comp, "competition", v);
        r.read("ratio", c.competition.ratio);
    }
    if (const json* conv = top.get("convergence")) {
        ObjectReader r(*conv, "convergence", v);
        if (const json* kind = r.get("kind")) {
            auto k = kind->is_string() ? parse_convergence_kind(kind->get<std::string>()) : std::nullopt;
            if (k) c.convergence.kind = *k;
            else v.push_back({"convergence.kind", "expected \"non\", \"partial\" or \"full\""});
        }
        r.read("guidance_fee", c.convergence.guidance_fee);
    }
    if (const json* mode = top.get("case_mode")) {
        auto m = mode->is_string() ? parse_case_mode(mode->get<std::string>()) : std::nullopt;
        if (m) c.case_mode = *m;
        else v.push_back({"case_mode", "expected \"case1\" or \"case2\""});
    }
    top.read("ticks", c.ticks);
    top.read("seed", c.seed);
}

}  // namespace

std::string serialize_config(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

ParseResult parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        return std::vector<Violation>{{"<root>", std::string("malformed config: ") + e.what()}};
    }
    ExperimentConfig c;
    std::vector<Violation> v;
    read_config(root, c, v);
    // a file that only names case_mode gets the matching spawn rule
    if (root.is_object() && !(root.contains("demand") && root["demand"].contains("spawn_rule")))
        c.demand.spawn_rule = spawn_rule_for(c.case_mode);
    if (!v.empty()) return v;
    return c;
}

bool set_parameter(ExperimentConfig& config, const std::string& path, double value) {
    if (path == "competition.link1_share") {
        if (!(value > 0.0 && value < 1.0)) return false;
        const double rest = (1.0 - value) / 2.0;
        config.competition.ratio = {value, rest, rest};
        return true;
    }

    json root = to_json(config);
    json* node = &root;
    std::size_t start = 0;
    while (start <= path.size()) {
        const std::size_t dot = path.find('.', start);
        const std::string seg = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (seg.empty()) return false;
        if (node->is_object()) {
            if (!node->contains(seg)) return false;
            node = &(*node)[seg];
        } else if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(seg);
            } catch (...) {
                return false;
            }
            if (idx >= node->size()) return false;
            node = &(*node)[idx];
        } else {
            return false;
        }
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (node->is_number_integer() || node->is_number_unsigned()) {
        if (value != std::floor(value)) return false;
        *node = static_cast<std::int64_t>(value);
    } else if (node->is_number_float()) {
        *node = value;
    } else {
        return false;
    }

    ExperimentConfig updated;
    std::vector<Violation> v;
    read_config(root, updated, v);
    if (!v.empty()) return false;
    config = updated;
    return true;
}

// ---------------------------------------------------------------------------
// Initial population
// ---------------------------------------------------------------------------

std::vector<ServiceNode> spawn_initial_nodes(const ValidatedConfig& vc, Rng& rng, std::uint64_t first_id) {
    const ExperimentConfig& c = vc.get();
    const auto& R = c.attribute_ranges;
    std::vector<ServiceNode> nodes;
    nodes.reserve(std::size_t(c.initial_nodes_per_area) * 3);
    std::uint64_t next = first_id;
    for (LinkRole role : kRoles) {
        const AreaId home = home_area(role);
        const int x0 = c.layout.first_column(home);
        const int x1 = c.layout.end_column(home) - 1;
        for (int i = 0; i < c.initial_nodes_per_area; ++i) {
            ServiceNode n;
            n.id = NodeId{next++};
            n.role = role;
            n.pos.x = static_cast<int>(rng.uniform_int(x0, x1));
            n.pos.y = static_cast<int>(rng.uniform_int(0, c.layout.grid_height - 1));
            n.capital = rng.uniform(R.initial_capital.lo, R.initial_capital.hi);
            n.speed = static_cast<int>(rng.uniform_int(R.speed.lo, R.speed.hi));
            n.vision = static_cast<int>(rng.uniform_int(R.vision.lo, R.vision.hi));
            n.capacity = static_cast<int>(rng.uniform_int(R.capacity.lo, R.capacity.hi));
            n.op_cost = rng.uniform(R.op_cost.lo, R.op_cost.hi);
            nodes.push_back(n);
        }
    }
    return nodes;
}

}  // namespace ecosim
