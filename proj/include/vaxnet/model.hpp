#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace vaxnet {

using NodeIndex = std::size_t;
using ArcIndex = std::size_t;

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();
inline constexpr double kCubicCentimetresPerLitre = 1000.0;
inline constexpr double kDefaultAccessRadiusKm = 5.0;
inline constexpr double kDefaultEpsilon = 1e-3;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class NodeKind { CentralStore, RegionalCenter, DistrictStore, Clinic, OutreachPost, Community };
enum class ArcKind { Land, Drone, Access };
enum class CoordinateSystem { Planar, Geographic };
enum class StorageMode { Refrigerated, Frozen, Either };

inline std::string_view to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::CentralStore: return "central_store";
    case NodeKind::RegionalCenter: return "regional_center";
    case NodeKind::DistrictStore: return "district_store";
    case NodeKind::Clinic: return "clinic";
    case NodeKind::OutreachPost: return "outreach_post";
    case NodeKind::Community: return "community";
    }
    return "?";
}

inline std::string_view to_string(ArcKind kind) {
    switch (kind) {
    case ArcKind::Land: return "land";
    case ArcKind::Drone: return "drone";
    case ArcKind::Access: return "access";
    }
    return "?";
}

inline std::string_view to_string(CoordinateSystem cs) {
    return cs == CoordinateSystem::Planar ? "planar" : "geographic";
}

inline std::string_view to_string(StorageMode mode) {
    switch (mode) {
    case StorageMode::Refrigerated: return "refrigerated";
    case StorageMode::Frozen: return "frozen";
    case StorageMode::Either: return "either";
    }
    return "?";
}

inline std::optional<NodeKind> parse_node_kind(std::string_view s) {
    for (auto k : {NodeKind::CentralStore, NodeKind::RegionalCenter, NodeKind::DistrictStore,
                   NodeKind::Clinic, NodeKind::OutreachPost, NodeKind::Community})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

inline std::optional<ArcKind> parse_arc_kind(std::string_view s) {
    for (auto k : {ArcKind::Land, ArcKind::Drone, ArcKind::Access})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

inline std::optional<StorageMode> parse_storage_mode(std::string_view s) {
    for (auto m : {StorageMode::Refrigerated, StorageMode::Frozen, StorageMode::Either})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

/// Facilities with cold storage: they hold inventory and may host a drone hub.
inline bool has_cold_storage(NodeKind kind) {
    return kind == NodeKind::CentralStore || kind == NodeKind::RegionalCenter ||
           kind == NodeKind::DistrictStore || kind == NodeKind::Clinic;
}

inline bool is_vaccination_center(NodeKind kind) {
    return kind == NodeKind::Clinic || kind == NodeKind::OutreachPost;
}

/// Planar positions are kilometres; geographic positions are (longitude, latitude) in degrees.
struct Position {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Position&) const = default;
};

inline double haversine_km(const Position& a, const Position& b) {
    constexpr double kEarthRadiusKm = 6371.0088;
    constexpr double kRad = std::numbers::pi / 180.0;
    const double dlat = (b.y - a.y) * kRad;
    const double dlon = (b.x - a.x) * kRad;
    const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(a.y * kRad) * std::cos(b.y * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

inline double distance_km(const Position& a, const Position& b, CoordinateSystem cs) {
    if (cs == CoordinateSystem::Geographic) return haversine_km(a, b);
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Community;
    Position position;
    double storage_capacity_cm3 = 0.0;
    std::optional<double> hub_cost;          // present iff the facility is a hub candidate
    std::vector<double> storage_wastage;     // per vaccine, empty means none
    std::vector<double> ovw_rate;            // per vaccine override of Vaccine::ovw_rate
    std::optional<std::string> community;    // host community of a clinic or outreach post

    bool operator==(const Node&) const = default;
};

struct Arc {
    ArcKind kind = ArcKind::Land;
    NodeIndex from = 0;
    NodeIndex to = 0;
    double distance_km = 0.0;
    double transport_capacity_cm3 = kUnlimited;  // Land only
    std::vector<double> transit_wastage;         // per vaccine; Land and Drone only

    bool operator==(const Arc&) const = default;
};

struct Vaccine {
    std::string id;
    int doses_per_regimen = 1;
    double dose_volume_cm3 = 1.0;
    double diluent_volume_cm3 = 0.0;
    double ovw_rate = 0.0;
    StorageMode storage_mode = StorageMode::Refrigerated;
    int vial_size = 1;

    bool operator==(const Vaccine&) const = default;
};

struct DroneSpec {
    std::string name = "custom";
    double payload_cm3 = 2000.0;
    double speed_kmh = 75.0;
    double range_km = 75.0;
    double unit_cost = 30000.0;
    double hours_per_period = 8.0;

    bool operator==(const DroneSpec&) const = default;
};

/// The vaccine supply chain together with its planning data.
///
/// Period-indexed tables (demand rows, central supply, unassigned demand) are
/// flat vectors laid out as `[vaccine * horizon + period]`.
struct Instance {
    std::string name = "instance";
    CoordinateSystem coordinates = CoordinateSystem::Planar;
    std::vector<Node> nodes;
    std::vector<Arc> arcs;
    std::vector<Vaccine> vaccines;
    int horizon = 1;
    double budget = 0.0;
    DroneSpec drone;
    double epsilon = kDefaultEpsilon;
    double access_radius_km = kDefaultAccessRadiusKm;
    std::map<NodeIndex, std::vector<double>> demand;
    std::vector<double> central_supply;     // empty: derived by default_central_supply()
    std::vector<double> unassigned_demand;  // demand left without any vaccination center

    bool operator==(const Instance&) const = default;

    std::size_t vaccine_count() const { return vaccines.size(); }
    std::size_t period_count() const { return static_cast<std::size_t>(horizon); }
    std::size_t table_size() const { return vaccine_count() * period_count(); }
    std::size_t slot(std::size_t l, std::size_t t) const { return l * period_count() + t; }

    /// m: the largest fleet the budget could buy.
    long max_drones() const {
        if (drone.unit_cost <= 0.0 || budget <= 0.0) return 0;
        return static_cast<long>(std::floor(budget / drone.unit_cost + 1e-9));
    }

    std::optional<NodeIndex> find(std::string_view id) const {
        for (NodeIndex i = 0; i < nodes.size(); ++i)
            if (nodes[i].id == id) return i;
        return std::nullopt;
    }

    NodeIndex central_store() const {
        for (NodeIndex i = 0; i < nodes.size(); ++i)
            if (nodes[i].kind == NodeKind::CentralStore) return i;
        throw Error("instance has no central store");
    }

    double demand_at(NodeIndex node, std::size_t l, std::size_t t) const {
        auto it = demand.find(node);
        return it == demand.end() ? 0.0 : it->second[slot(l, t)];
    }

    double horizon_demand(NodeIndex node, std::size_t l) const {
        double total = 0.0;
        for (std::size_t t = 0; t < period_count(); ++t) total += demand_at(node, l, t);
        return total;
    }

    double storage_wastage(NodeIndex node, std::size_t l) const {
        const auto& w = nodes[node].storage_wastage;
        return w.empty() ? 0.0 : w[l];
    }

    double transit_wastage(ArcIndex arc, std::size_t l) const {
        const auto& w = arcs[arc].transit_wastage;
        return w.empty() ? 0.0 : w[l];
    }

    double ovw_rate(NodeIndex node, std::size_t l) const {
        const auto& w = nodes[node].ovw_rate;
        return w.empty() ? vaccines[l].ovw_rate : w[l];
    }

    double distance(NodeIndex a, NodeIndex b) const {
        return distance_km(nodes[a].position, nodes[b].position, coordinates);
    }

    bool has_demand_on_centers() const {
        for (const auto& [node, row] : demand)
            if (is_vaccination_center(nodes[node].kind)) return true;
        return false;
    }

    bool has_community_demand() const {
        for (const auto& [node, row] : demand)
            if (nodes[node].kind == NodeKind::Community) return true;
        return false;
    }
};

/// Total demand per (vaccine, period) across all demand nodes.
inline std::vector<double> total_demand_by_slot(const Instance& inst) {
    std::vector<double> total(inst.table_size(), 0.0);
    for (const auto& [node, row] : inst.demand)
        for (std::size_t s = 0; s < row.size(); ++s) total[s] += row[s];
    return total;
}

/// Doses injected at the central store when none are given: the horizon
/// demand of each vaccine, inflated to cover the worst-case losses along a
/// four-echelon path, all made available in the first period.
inline std::vector<double> default_central_supply(const Instance& inst) {
    const std::size_t L = inst.vaccine_count();
    const std::size_t T = inst.period_count();
    std::vector<double> supply(inst.table_size(), 0.0);
    double worst_storage = 0.0;
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
        for (std::size_t l = 0; l < L; ++l) worst_storage = std::max(worst_storage, inst.storage_wastage(i, l));
    double worst_transit = 0.0;
    for (ArcIndex a = 0; a < inst.arcs.size(); ++a)
        for (std::size_t l = 0; l < L; ++l) worst_transit = std::max(worst_transit, inst.transit_wastage(a, l));
    constexpr int kEchelons = 4;
    const auto totals = total_demand_by_slot(inst);
    for (std::size_t l = 0; l < L; ++l) {
        double worst_ovw = inst.vaccines[l].ovw_rate;
        for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
            if (is_vaccination_center(inst.nodes[i].kind)) worst_ovw = std::max(worst_ovw, inst.ovw_rate(i, l));
        double horizon_total = 0.0;
        for (std::size_t t = 0; t < T; ++t) horizon_total += totals[inst.slot(l, t)];
        if (worst_ovw >= 1.0) continue;  // rejected by validation
        const double inflation = 1.0 / ((1.0 - worst_ovw) *
                                        std::pow(1.0 - worst_storage, static_cast<double>(T + kEchelons)) *
                                        std::pow(1.0 - worst_transit, static_cast<double>(kEchelons)));
        supply[inst.slot(l, 0)] = horizon_total * inflation;
    }
    return supply;
}

inline std::vector<double> effective_central_supply(const Instance& inst) {
    return inst.central_supply.empty() ? default_central_supply(inst) : inst.central_supply;
}

// --------------------------------------------------------------------------
// Solutions

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, NoSolution };

inline std::string_view to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NoSolution: return "no_solution";
    }
    return "?";
}

/// Semantic values of a solved network model.
///
/// Arc-indexed flows hold S on Land arcs, D on Drone arcs and the
/// community-resolved X on Access arcs. Centre-resolved X (aggregated
/// networks) lives in `administered`.
struct Solution {
    SolveStatus status = SolveStatus::NoSolution;
    double objective = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    std::size_t vaccines = 0;
    std::size_t periods = 0;

    std::vector<int> hub_open;        // Y, per node
    long drones = 0;                  // Z
    std::vector<long> drones_used;    // V, [node * T + t]
    std::vector<double> arc_flow;     // S / D / X on arcs, [(arc * L + l) * T + t]
    std::vector<double> inventory;    // I, [(node * L + l) * T + t]
    std::vector<double> administered; // X at centres, [(node * L + l) * T + t]
    std::vector<double> immunized;    // N, per node
    std::vector<double> receipts;     // doses drawn from central supply, [l * T + t]

    bool operator==(const Solution&) const = default;

    static Solution empty_for(const Instance& inst) {
        Solution s;
        s.vaccines = inst.vaccine_count();
        s.periods = inst.period_count();
        const std::size_t n = inst.nodes.size();
        const std::size_t lt = s.vaccines * s.periods;
        s.hub_open.assign(n, 0);
        s.drones_used.assign(n * s.periods, 0);
        s.arc_flow.assign(inst.arcs.size() * lt, 0.0);
        s.inventory.assign(n * lt, 0.0);
        s.administered.assign(n * lt, 0.0);
        s.immunized.assign(n, 0.0);
        s.receipts.assign(lt, 0.0);
        return s;
    }

    bool has_value() const { return status == SolveStatus::Optimal || status == SolveStatus::Feasible; }

    std::size_t idx(std::size_t outer, std::size_t l, std::size_t t) const {
        return (outer * vaccines + l) * periods + t;
    }
    double flow(ArcIndex a, std::size_t l, std::size_t t) const { return arc_flow[idx(a, l, t)]; }
    double& flow(ArcIndex a, std::size_t l, std::size_t t) { return arc_flow[idx(a, l, t)]; }
    double stock(NodeIndex i, std::size_t l, std::size_t t) const { return inventory[idx(i, l, t)]; }
    double& stock(NodeIndex i, std::size_t l, std::size_t t) { return inventory[idx(i, l, t)]; }
    double given(NodeIndex i, std::size_t l, std::size_t t) const { return administered[idx(i, l, t)]; }
    double& given(NodeIndex i, std::size_t l, std::size_t t) { return administered[idx(i, l, t)]; }
    long used(NodeIndex i, std::size_t t) const { return drones_used[i * periods + t]; }
    long& used(NodeIndex i, std::size_t t) { return drones_used[i * periods + t]; }
};

/// Doses administered at vaccination centre `i`, whichever resolution the solution uses.
inline double doses_at_center(const Solution& sol, const Instance& inst, NodeIndex i, std::size_t l, std::size_t t) {
    double total = sol.given(i, l, t);
    for (ArcIndex a = 0; a < inst.arcs.size(); ++a)
        if (inst.arcs[a].kind == ArcKind::Access && inst.arcs[a].to == i) total += sol.flow(a, l, t);
    return total;
}

// --------------------------------------------------------------------------
// Validation

struct Violation {
    std::string code;
    std::string message;
    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    bool contains(std::string_view code) const {
        return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; });
    }
    std::string summary() const {
        std::ostringstream os;
        for (const auto& v : violations) os << v.code << ": " << v.message << '\n';
        return os.str();
    }
};

namespace detail {
inline bool is_fraction(double w) { return std::isfinite(w) && w >= 0.0 && w < 1.0; }
}  // namespace detail

inline ValidationReport validate_instance(const Instance& inst) {
    ValidationReport report;
    auto add = [&](std::string code, std::string message) {
        report.violations.push_back({std::move(code), std::move(message)});
    };
    const std::size_t L = inst.vaccine_count();

    if (inst.horizon <= 0) add("horizon", "horizon must be a positive period count");
    if (!(inst.budget >= 0.0) || !std::isfinite(inst.budget)) add("budget", "budget must be finite and non-negative");
    if (!(inst.epsilon > 0.0 && inst.epsilon < 1.0)) add("epsilon", "epsilon must lie in (0,1)");
    if (!(inst.access_radius_km > 0.0)) add("access_radius", "access radius must be positive");
    if (L == 0) add("vaccines", "instance has no vaccines");

    const auto& d = inst.drone;
    if (!(d.payload_cm3 > 0 && d.speed_kmh > 0 && d.range_km > 0 && d.unit_cost > 0 && d.hours_per_period > 0))
        add("drone_spec", "drone payload, speed, range, unit cost and hours per period must be strictly positive");

    for (const auto& v : inst.vaccines) {
        if (v.doses_per_regimen < 1) add("regimen", "vaccine " + v.id + " needs a positive dose count per regimen");
        if (!(v.dose_volume_cm3 > 0.0)) add("dose_volume", "vaccine " + v.id + " needs a positive dose volume");
        if (!(v.diluent_volume_cm3 >= 0.0)) add("diluent_volume", "vaccine " + v.id + " has negative diluent volume");
        if (v.ovw_rate >= 1.0)
            add("ovw_rate", "division by zero in OVW correction: vaccine " + v.id + " has open-vial wastage >= 1");
        else if (!detail::is_fraction(v.ovw_rate))
            add("ovw_rate", "vaccine " + v.id + " open-vial wastage outside [0,1)");
    }

    int central = 0;
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i) {
        const Node& n = inst.nodes[i];
        if (n.kind == NodeKind::CentralStore) ++central;
        if (!has_cold_storage(n.kind) && n.storage_capacity_cm3 != 0.0)
            add("storage_without_cold_chain", n.id + ": outreach posts and communities carry no inventory");
        if (!(n.storage_capacity_cm3 >= 0.0)) add("storage_capacity", n.id + ": storage capacity is negative");
        if (n.hub_cost) {
            if (!has_cold_storage(n.kind)) add("hub_without_storage", n.id + ": hub candidates need cold storage");
            if (!(*n.hub_cost >= 0.0) || !std::isfinite(*n.hub_cost)) add("hub_cost", n.id + ": hub cost must be finite and non-negative");
        }
        if (!n.storage_wastage.empty() && n.storage_wastage.size() != L)
            add("storage_wastage", n.id + ": storage wastage needs one entry per vaccine");
        for (double w : n.storage_wastage)
            if (!detail::is_fraction(w)) add("storage_wastage", n.id + ": storage wastage outside [0,1)");
        if (!n.ovw_rate.empty() && n.ovw_rate.size() != L) add("ovw_rate", n.id + ": OVW override needs one entry per vaccine");
        for (double w : n.ovw_rate) {
            if (w >= 1.0) add("ovw_rate", "division by zero in OVW correction at " + n.id);
            else if (!detail::is_fraction(w)) add("ovw_rate", n.id + ": OVW rate outside [0,1)");
        }
        if (n.community && !inst.find(*n.community))
            add("host_community", n.id + ": unknown host community " + *n.community);
    }
    if (central != 1) add("central_store", "exactly one central store required, found " + std::to_string(central));

    std::map<std::tuple<int, NodeIndex, NodeIndex>, ArcIndex> seen_arcs;
    for (ArcIndex a = 0; a < inst.arcs.size(); ++a) {
        const Arc& arc = inst.arcs[a];
        const std::string label = "arc " + std::to_string(a);
        if (!seen_arcs.emplace(std::tuple{static_cast<int>(arc.kind), arc.from, arc.to}, a).second)
            add("duplicate_arc", label + " repeats an arc of the same kind between the same nodes");
        if (arc.from >= inst.nodes.size() || arc.to >= inst.nodes.size()) {
            add("arc_endpoint", label + " references a missing node");
            continue;
        }
        const NodeKind from = inst.nodes[arc.from].kind;
        const NodeKind to = inst.nodes[arc.to].kind;
        if (!(arc.distance_km >= 0.0) || !std::isfinite(arc.distance_km)) add("arc_distance", label + ": distance must be finite and non-negative");
        if (!arc.transit_wastage.empty() && arc.transit_wastage.size() != L)
            add("transit_wastage", label + ": transit wastage needs one entry per vaccine");
        for (double w : arc.transit_wastage)
            if (!detail::is_fraction(w)) add("transit_wastage", label + ": transit wastage outside [0,1)");
        switch (arc.kind) {
        case ArcKind::Land:
            if (!has_cold_storage(from) || !(has_cold_storage(to) || to == NodeKind::OutreachPost))
                add("land_arc_endpoints", label + ": land arcs connect storage-bearing facilities downstream");
            if (!(arc.transport_capacity_cm3 >= 0.0)) add("transport_capacity", label + ": transport capacity is negative");
            break;
        case ArcKind::Drone:
            if (!has_cold_storage(from) || !inst.nodes[arc.from].hub_cost)
                add("drone_arc_origin", label + ": drone arcs originate at hub candidates");
            if (arc.distance_km > inst.drone.range_km + 1e-9)
                add("drone_range", "drone arc exceeds range: " + label + " is " + std::to_string(arc.distance_km) +
                                       " km, range " + std::to_string(inst.drone.range_km) + " km");
            break;
        case ArcKind::Access:
            if (from != NodeKind::Community || !is_vaccination_center(to))
                add("access_arc_endpoints", label + ": access arcs connect a community to a clinic or outreach post");
            if (arc.distance_km > inst.access_radius_km + 1e-9)
                add("access_radius", "access arc exceeds radius: " + label);
            if (!arc.transit_wastage.empty()) add("transit_wastage", label + ": access arcs carry no wastage");
            break;
        }
    }

    for (const auto& [node, row] : inst.demand) {
        if (node >= inst.nodes.size()) {
            add("demand_node", "demand references a missing node");
            continue;
        }
        const NodeKind k = inst.nodes[node].kind;
        if (k != NodeKind::Community && !is_vaccination_center(k))
            add("demand_node", inst.nodes[node].id + ": demand must sit on communities or vaccination centres");
        if (row.size() != inst.table_size()) add("demand_shape", inst.nodes[node].id + ": demand row has the wrong length");
        for (double v : row)
            if (!(v >= 0.0) || !std::isfinite(v)) add("demand_value", inst.nodes[node].id + ": demand must be finite and non-negative");
    }
    for (const auto* table : {&inst.central_supply, &inst.unassigned_demand}) {
        if (!table->empty() && table->size() != inst.table_size()) add("table_shape", "supply or unassigned table has the wrong length");
        for (double v : *table)
            if (!(v >= 0.0) || !std::isfinite(v)) add("table_value", "supply and unassigned demand must be finite and non-negative");
    }
    return report;
}

}  // namespace vaxnet
