#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vaxnet/model.hpp"
#include "vaxnet/preprocess.hpp"

namespace vaxnet {

enum class SrLevel { Center, Region, CommunitiesOfRegion };

struct SrEntry {
    std::string unit;
    double administered = 0.0;
    double demanded = 0.0;
    double sr = 0.0;
    bool zero_demand = false;  // sr reported as 1 by convention
};

struct SrTable {
    std::vector<SrEntry> rows;
    SrEntry total;
};

namespace detail {

inline SrEntry make_sr(std::string unit, double given, double wanted) {
    SrEntry e{std::move(unit), given, wanted, 0.0, false};
    if (wanted <= 0.0) {
        e.sr = 1.0;
        e.zero_demand = true;
    } else {
        e.sr = given / wanted;
    }
    return e;
}

/// Doses received per demand node over the horizon, per vaccine.
inline double doses_to_demand_node(const Solution& s, const Instance& inst, NodeIndex k, std::size_t l) {
    double got = 0.0;
    for (std::size_t t = 0; t < inst.period_count(); ++t) {
        if (inst.nodes[k].kind == NodeKind::Community) {
            for (ArcIndex a = 0; a < inst.arcs.size(); ++a)
                if (inst.arcs[a].kind == ArcKind::Access && inst.arcs[a].from == k) got += s.flow(a, l, t);
        } else {
            got += doses_at_center(s, inst, k, l, t);
        }
    }
    return got;
}

inline double unassigned_total(const Instance& inst) {
    double u = 0.0;
    for (double v : inst.unassigned_demand) u += v;
    return u;
}

}  // namespace detail

/// Demand attributed to vaccination centres. Communities without any
/// access arc are left out (their demand is unmet at every centre).
inline std::map<NodeIndex, std::vector<double>> center_demand(const Instance& inst) {
    if (!inst.has_community_demand()) return inst.demand;
    std::set<NodeIndex> reached;
    for (const Arc& a : inst.arcs)
        if (a.kind == ArcKind::Access) reached.insert(a.from);
    Instance copy = inst;
    std::erase_if(copy.demand, [&](const auto& e) {
        return copy.nodes[e.first].kind == NodeKind::Community && !reached.count(e.first);
    });
    return aggregate_demand(copy);
}

/// Dose-weighted supply ratio over the horizon.
///
/// Region and CommunitiesOfRegion both count unassigned demand in the
/// denominator; Center attributes community demand to centres by equal
/// splitting when the solution is community-resolved.
inline SrTable compute_supply_ratio(const Solution& s, const Instance& inst, SrLevel level) {
    SrTable table;
    const std::size_t L = inst.vaccine_count();
    const std::size_t T = inst.period_count();
    double given_total = 0.0, demand_total = 0.0;

    if (level == SrLevel::Center) {
        const auto attributed = center_demand(inst);
        for (NodeIndex i = 0; i < inst.nodes.size(); ++i) {
            if (!is_vaccination_center(inst.nodes[i].kind)) continue;
            double given = 0.0, wanted = 0.0;
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t t = 0; t < T; ++t) given += doses_at_center(s, inst, i, l, t);
            if (auto it = attributed.find(i); it != attributed.end())
                for (double v : it->second) wanted += v;
            given_total += given;
            demand_total += wanted;
            table.rows.push_back(detail::make_sr(inst.nodes[i].id, given, wanted));
        }
        table.total = detail::make_sr("centers", given_total, demand_total);
        return table;
    }

    for (const auto& [k, row] : inst.demand) {
        double given = 0.0, wanted = 0.0;
        for (std::size_t l = 0; l < L; ++l) given += detail::doses_to_demand_node(s, inst, k, l);
        for (double v : row) wanted += v;
        given_total += given;
        demand_total += wanted;
        if (level == SrLevel::CommunitiesOfRegion) table.rows.push_back(detail::make_sr(inst.nodes[k].id, given, wanted));
    }
    demand_total += detail::unassigned_total(inst);
    table.total = detail::make_sr(level == SrLevel::Region ? "region" : "communities", given_total, demand_total);
    if (level == SrLevel::Region) table.rows.push_back(table.total);
    return table;
}

/// Per-vaccine, per-period ratio of administered to demanded doses
/// (diagnostic; laid out [l * T + t]).
inline std::vector<double> supply_ratio_by_slot(const Solution& s, const Instance& inst) {
    std::vector<double> given(inst.table_size(), 0.0);
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i) {
        if (!is_vaccination_center(inst.nodes[i].kind)) continue;
        for (std::size_t l = 0; l < inst.vaccine_count(); ++l)
            for (std::size_t t = 0; t < inst.period_count(); ++t) given[inst.slot(l, t)] += doses_at_center(s, inst, i, l, t);
    }
    auto wanted = total_demand_by_slot(inst);
    for (std::size_t k = 0; k < inst.unassigned_demand.size(); ++k) wanted[k] += inst.unassigned_demand[k];
    std::vector<double> out(inst.table_size(), 1.0);
    for (std::size_t k = 0; k < out.size(); ++k)
        if (wanted[k] > 0.0) out[k] = given[k] / wanted[k];
    return out;
}

struct FicResult {
    std::map<NodeIndex, double> immunized;  // N per demand node
    std::map<NodeIndex, double> children;
    double total_immunized = 0.0;
    double total_children = 0.0;
    double proportion = 0.0;
};

inline double children_of(const Instance& inst, const std::vector<double>& row) {
    double c = 0.0;
    for (std::size_t l = 0; l < inst.vaccine_count(); ++l) {
        double total = 0.0;
        for (std::size_t t = 0; t < inst.period_count(); ++t) total += row[inst.slot(l, t)];
        c = std::max(c, total / inst.vaccines[l].doses_per_regimen);
    }
    return c;
}

inline FicResult compute_fic(const Solution& s, const Instance& inst) {
    FicResult r;
    for (const auto& [k, row] : inst.demand) {
        double n = kUnlimited;
        for (std::size_t l = 0; l < inst.vaccine_count(); ++l)
            n = std::min(n, detail::doses_to_demand_node(s, inst, k, l) / inst.vaccines[l].doses_per_regimen);
        if (!std::isfinite(n)) n = 0.0;
        r.immunized[k] = n;
        r.children[k] = children_of(inst, row);
        r.total_immunized += n;
        r.total_children += r.children[k];
    }
    if (!inst.unassigned_demand.empty()) r.total_children += children_of(inst, inst.unassigned_demand);
    r.proportion = r.total_children > 0.0 ? r.total_immunized / r.total_children : 0.0;
    return r;
}

struct UtilizationReport {
    std::vector<double> transport;  // per capacitated land arc and period
    std::vector<double> storage;    // per capacitated facility, peak over periods
    std::array<int, 10> transport_histogram{};
    std::array<int, 10> storage_histogram{};
    std::vector<std::string> notes;
};

inline std::size_t utilization_bucket(double u) {
    const double b = std::floor(u * 10.0 + 1e-9);
    return static_cast<std::size_t>(std::clamp(b, 0.0, 9.0));
}

inline UtilizationReport compute_utilization(const Solution& s, const Instance& inst) {
    UtilizationReport r;
    const std::size_t L = inst.vaccine_count();
    const std::size_t T = inst.period_count();
    for (ArcIndex a = 0; a < inst.arcs.size(); ++a) {
        const Arc& arc = inst.arcs[a];
        if (arc.kind != ArcKind::Land || !std::isfinite(arc.transport_capacity_cm3)) continue;
        if (arc.transport_capacity_cm3 <= 0.0) {
            r.notes.push_back("land arc " + std::to_string(a) + " has zero capacity and is excluded");
            continue;
        }
        for (std::size_t t = 0; t < T; ++t) {
            double vol = 0.0;
            for (std::size_t l = 0; l < L; ++l) vol += inst.vaccines[l].dose_volume_cm3 * s.flow(a, l, t);
            const double u = vol / arc.transport_capacity_cm3;
            r.transport.push_back(u);
            ++r.transport_histogram[utilization_bucket(u)];
        }
    }
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i) {
        const Node& n = inst.nodes[i];
        if (!has_cold_storage(n.kind) || !std::isfinite(n.storage_capacity_cm3)) continue;
        if (n.storage_capacity_cm3 <= 0.0) {
            r.notes.push_back("facility " + n.id + " has zero storage capacity and is excluded");
            continue;
        }
        double peak = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            double vol = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
                double held = s.stock(i, l, t);
                for (ArcIndex a = 0; a < inst.arcs.size(); ++a) {
                    const Arc& arc = inst.arcs[a];
                    if (arc.to != i) continue;
                    const double keep = 1.0 - inst.transit_wastage(a, l);
                    if (arc.kind == ArcKind::Land && t > 0) held += keep * s.flow(a, l, t - 1);
                    if (arc.kind == ArcKind::Drone) held += keep * s.flow(a, l, t);
                }
                vol += inst.vaccines[l].dose_volume_cm3 * held;
            }
            peak = std::max(peak, vol / n.storage_capacity_cm3);
        }
        r.storage.push_back(peak);
        ++r.storage_histogram[utilization_bucket(peak)];
    }
    return r;
}

}  // namespace vaxnet
