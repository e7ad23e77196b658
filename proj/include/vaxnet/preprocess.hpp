#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vaxnet/formulation.hpp"
#include "vaxnet/milp/branch_and_bound.hpp"
#include "vaxnet/model.hpp"

namespace vaxnet {

/// Reachability between candidate vaccination centres and communities.
///
/// Candidates are every community (a potential outreach host, forced when
/// it hosts a clinic) plus clinics without a host community (always forced).
struct AccessIndicator {
    double radius_km = kDefaultAccessRadiusKm;
    std::vector<NodeIndex> candidates;
    std::vector<char> forced;
    std::vector<NodeIndex> communities;
    std::vector<std::vector<char>> reach;  // [candidate][community]

    std::size_t column_of(NodeIndex community) const {
        for (std::size_t k = 0; k < communities.size(); ++k)
            if (communities[k] == community) return k;
        throw Error("node " + std::to_string(community) + " is not a community column");
    }

    std::vector<std::vector<std::size_t>> covers() const {
        std::vector<std::vector<std::size_t>> out(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c)
            for (std::size_t k = 0; k < communities.size(); ++k)
                if (reach[c][k]) out[c].push_back(k);
        return out;
    }
};

enum class CoverMethod { Exact, Greedy };

struct OutreachSelection {
    std::vector<char> selected;   // per candidate
    std::vector<NodeIndex> hosts; // selected candidate nodes, ascending
    bool exact = false;
    std::optional<std::string> warning;

    std::size_t size() const { return hosts.size(); }
};

struct PreprocessOptions {
    std::optional<double> radius_km;     // default: the instance's access radius
    CoverMethod method = CoverMethod::Exact;
    long cover_node_limit = 20000;
    bool land_link_posts = false;        // also connect posts by land to the nearest district store
    double default_drone_wastage = 0.005;
};

namespace detail {

inline std::optional<NodeIndex> host_of(const Instance& inst, NodeIndex center) {
    const auto& c = inst.nodes[center].community;
    if (!c) return std::nullopt;
    return inst.find(*c);
}

inline void check_coordinates(const Instance& inst) {
    if (inst.coordinates != CoordinateSystem::Geographic) return;
    for (const Node& n : inst.nodes)
        if (std::abs(n.position.x) > 180.0 || std::abs(n.position.y) > 90.0)
            throw Error("node " + n.id + " lies outside geographic range; positions look planar (mixed coordinate systems)");
}

}  // namespace detail

inline AccessIndicator build_access_indicator(const Instance& inst, std::optional<double> radius_km = std::nullopt) {
    detail::check_coordinates(inst);
    AccessIndicator ind;
    ind.radius_km = radius_km.value_or(inst.access_radius_km);
    if (!(ind.radius_km > 0.0)) throw Error("access radius must be positive");
    std::set<NodeIndex> hosting;
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
        if (inst.nodes[i].kind == NodeKind::Clinic)
            if (auto h = detail::host_of(inst, i)) hosting.insert(*h);
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
        if (inst.nodes[i].kind == NodeKind::Community) ind.communities.push_back(i);
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i) {
        const Node& n = inst.nodes[i];
        if (n.kind == NodeKind::Community) {
            ind.candidates.push_back(i);
            ind.forced.push_back(hosting.count(i) ? 1 : 0);
        } else if (n.kind == NodeKind::Clinic && !detail::host_of(inst, i)) {
            ind.candidates.push_back(i);
            ind.forced.push_back(1);
        }
    }
    ind.reach.assign(ind.candidates.size(), std::vector<char>(ind.communities.size(), 0));
    for (std::size_t c = 0; c < ind.candidates.size(); ++c)
        for (std::size_t k = 0; k < ind.communities.size(); ++k)
            ind.reach[c][k] = inst.distance(ind.candidates[c], ind.communities[k]) <= ind.radius_km ? 1 : 0;
    return ind;
}

namespace detail {

inline OutreachSelection greedy_cover(const AccessIndicator& ind) {
    OutreachSelection sel;
    sel.selected = ind.forced;
    std::vector<char> covered(ind.communities.size(), 0);
    auto mark = [&](std::size_t c) {
        for (std::size_t k = 0; k < covered.size(); ++k)
            if (ind.reach[c][k]) covered[k] = 1;
    };
    for (std::size_t c = 0; c < sel.selected.size(); ++c)
        if (sel.selected[c]) mark(c);
    while (true) {
        std::size_t best = ind.candidates.size();
        std::size_t gain_best = 0;
        for (std::size_t c = 0; c < ind.candidates.size(); ++c) {
            if (sel.selected[c]) continue;
            std::size_t gain = 0;
            for (std::size_t k = 0; k < covered.size(); ++k) gain += ind.reach[c][k] && !covered[k];
            if (gain > gain_best) {
                gain_best = gain;
                best = c;
            }
        }
        if (best == ind.candidates.size()) break;
        sel.selected[best] = 1;
        mark(best);
    }
    for (std::size_t k = 0; k < covered.size(); ++k)
        if (!covered[k]) throw Error("community " + std::to_string(ind.communities[k]) + " is reachable by no candidate");
    return sel;
}

}  // namespace detail

/// Chooses vaccination centres so every community reaches one.
inline OutreachSelection select_outreach_hosts(const AccessIndicator& ind, CoverMethod method = CoverMethod::Exact,
                                               long node_limit = 20000) {
    OutreachSelection sel;
    if (method == CoverMethod::Greedy) {
        sel = detail::greedy_cover(ind);
    } else {
        // Communities already covered by forced candidates drop out of the model.
        std::vector<char> covered(ind.communities.size(), 0);
        for (std::size_t c = 0; c < ind.candidates.size(); ++c)
            if (ind.forced[c])
                for (std::size_t k = 0; k < covered.size(); ++k)
                    if (ind.reach[c][k]) covered[k] = 1;
        std::vector<std::size_t> open_cols, free_cands;
        for (std::size_t k = 0; k < covered.size(); ++k)
            if (!covered[k]) open_cols.push_back(k);
        std::vector<std::vector<std::size_t>> covers;
        for (std::size_t c = 0; c < ind.candidates.size(); ++c) {
            if (ind.forced[c]) continue;
            std::vector<std::size_t> cov;
            for (std::size_t r = 0; r < open_cols.size(); ++r)
                if (ind.reach[c][open_cols[r]]) cov.push_back(r);
            if (cov.empty()) continue;
            free_cands.push_back(c);
            covers.push_back(std::move(cov));
        }
        sel.selected = ind.forced;
        sel.exact = true;
        if (!open_cols.empty()) {
            const auto mb = build_set_cover(covers, open_cols.size(), {});
            if (mb.infeasible) throw Error("set cover infeasible: " + *mb.infeasible);
            milp::SolveOptions opt;
            opt.node_limit = node_limit;
            const auto r = milp::solve_milp(mb.problem, opt);
            if (r.status == SolveStatus::Optimal) {
                for (std::size_t j = 0; j < free_cands.size(); ++j)
                    if (r.x[j] > 0.5) sel.selected[free_cands[j]] = 1;
            } else if (r.status == SolveStatus::Infeasible) {
                throw Error("set cover infeasible: some community is reachable by no candidate");
            } else {
                sel = detail::greedy_cover(ind);
                sel.warning = "exact set cover hit its node limit; using the greedy cover";
            }
        }
    }
    for (std::size_t c = 0; c < ind.candidates.size(); ++c)
        if (sel.selected[c]) sel.hosts.push_back(ind.candidates[c]);
    std::sort(sel.hosts.begin(), sel.hosts.end());
    return sel;
}

/// Adds drone arcs from every hub candidate to each node in `targets` within range.
inline void add_drone_arcs(Instance& inst, const std::vector<NodeIndex>& targets, double default_wastage = 0.005) {
    std::vector<double> wastage(inst.vaccine_count(), default_wastage);
    for (const Arc& a : inst.arcs)
        if (a.kind == ArcKind::Drone) {
            wastage = a.transit_wastage;
            break;
        }
    std::set<std::pair<NodeIndex, NodeIndex>> existing;
    for (const Arc& a : inst.arcs)
        if (a.kind == ArcKind::Drone) existing.insert({a.from, a.to});
    for (NodeIndex h = 0; h < inst.nodes.size(); ++h) {
        if (!inst.nodes[h].hub_cost || !has_cold_storage(inst.nodes[h].kind)) continue;
        for (NodeIndex j : targets) {
            if (j == h || existing.count({h, j})) continue;
            const double d = inst.distance(h, j);
            if (d > inst.drone.range_km) continue;
            Arc a;
            a.kind = ArcKind::Drone;
            a.from = h;
            a.to = j;
            a.distance_km = d;
            a.transit_wastage = wastage;
            inst.arcs.push_back(std::move(a));
        }
    }
}

/// Replaces every drone arc by arcs from hub candidates to all vaccination
/// centres within the current drone range. Used after changing the drone.
inline void rebuild_drone_arcs(Instance& inst, double default_wastage = 0.005) {
    std::vector<double> wastage;
    for (const Arc& a : inst.arcs)
        if (a.kind == ArcKind::Drone) {
            wastage = a.transit_wastage;
            break;
        }
    std::erase_if(inst.arcs, [](const Arc& a) { return a.kind == ArcKind::Drone; });
    std::vector<NodeIndex> centers;
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
        if (is_vaccination_center(inst.nodes[i].kind)) centers.push_back(i);
    add_drone_arcs(inst, centers, default_wastage);
    if (!wastage.empty())
        for (Arc& a : inst.arcs)
            if (a.kind == ArcKind::Drone) a.transit_wastage = wastage;
}

/// The community-level network for model P: outreach posts at selected
/// hosts without a clinic, and access arcs from each community to every
/// selected centre within the radius.
inline Instance attach_outreach_posts(const Instance& inst, const AccessIndicator& ind, const OutreachSelection& sel,
                                      const PreprocessOptions& opt = {}) {
    Instance out = inst;
    out.access_radius_km = ind.radius_km;
    std::erase_if(out.arcs, [](const Arc& a) { return a.kind == ArcKind::Access; });

    std::set<NodeIndex> hosting;
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
        if (inst.nodes[i].kind == NodeKind::Clinic)
            if (auto h = detail::host_of(inst, i)) hosting.insert(*h);

    std::vector<NodeIndex> new_posts;
    for (NodeIndex host : sel.hosts) {
        if (inst.nodes[host].kind != NodeKind::Community || hosting.count(host)) continue;
        Node post;
        post.id = "post_" + inst.nodes[host].id;
        if (out.find(post.id)) throw Error("node id " + post.id + " already exists");
        post.kind = NodeKind::OutreachPost;
        post.position = inst.nodes[host].position;
        post.community = inst.nodes[host].id;
        out.nodes.push_back(std::move(post));
        new_posts.push_back(out.nodes.size() - 1);
    }

    // Centres: every clinic, plus the new posts and any posts already present.
    std::vector<NodeIndex> centers;
    for (NodeIndex i = 0; i < out.nodes.size(); ++i)
        if (is_vaccination_center(out.nodes[i].kind)) centers.push_back(i);
    for (NodeIndex k : ind.communities)
        for (NodeIndex c : centers) {
            const double d = out.distance(k, c);
            if (d > ind.radius_km) continue;
            Arc a;
            a.kind = ArcKind::Access;
            a.from = k;
            a.to = c;
            a.distance_km = d;
            out.arcs.push_back(std::move(a));
        }

    add_drone_arcs(out, new_posts, opt.default_drone_wastage);
    if (opt.land_link_posts) {
        std::vector<double> wastage(out.vaccine_count(), 0.0);
        for (const Arc& a : out.arcs)
            if (a.kind == ArcKind::Land) {
                wastage = a.transit_wastage;
                break;
            }
        for (NodeIndex p : new_posts) {
            std::optional<NodeIndex> best;
            for (NodeIndex i = 0; i < out.nodes.size(); ++i)
                if (out.nodes[i].kind == NodeKind::DistrictStore &&
                    (!best || out.distance(i, p) < out.distance(*best, p)))
                    best = i;
            if (!best) continue;
            Arc a;
            a.kind = ArcKind::Land;
            a.from = *best;
            a.to = p;
            a.distance_km = out.distance(*best, p);
            a.transit_wastage = wastage;
            out.arcs.push_back(std::move(a));
        }
    }
    return out;
}

/// Demand per vaccination centre by equal splitting over accessible centres.
/// Works on a network produced by attach_outreach_posts.
inline std::map<NodeIndex, std::vector<double>> aggregate_demand(const Instance& net) {
    std::map<NodeIndex, std::vector<double>> agg;
    std::map<NodeIndex, std::vector<NodeIndex>> access;
    for (const Arc& a : net.arcs)
        if (a.kind == ArcKind::Access) access[a.from].push_back(a.to);
    std::map<NodeIndex, std::vector<NodeIndex>> hosted;  // community -> centres it hosts
    for (NodeIndex i = 0; i < net.nodes.size(); ++i)
        if (is_vaccination_center(net.nodes[i].kind))
            if (auto h = detail::host_of(net, i)) hosted[*h].push_back(i);

    for (const auto& [node, row] : net.demand) {
        if (is_vaccination_center(net.nodes[node].kind)) {
            auto& dst = agg[node];
            if (dst.empty()) dst.assign(row.size(), 0.0);
            for (std::size_t s = 0; s < row.size(); ++s) dst[s] += row[s];
            continue;
        }
        std::vector<NodeIndex> targets;
        if (auto it = hosted.find(node); it != hosted.end()) {
            for (NodeIndex c : it->second)
                if (net.nodes[c].kind == NodeKind::Clinic) targets.push_back(c);
            if (targets.empty()) targets = it->second;
        }
        if (targets.empty()) {
            for (NodeIndex c : access[node])
                if (net.nodes[c].kind == NodeKind::Clinic) targets.push_back(c);
        }
        if (targets.empty()) {
            for (NodeIndex c : access[node])
                if (net.nodes[c].kind == NodeKind::OutreachPost) targets.push_back(c);
        }
        if (targets.empty()) throw Error("community " + net.nodes[node].id + " has no accessible vaccination centre");
        const double share = 1.0 / static_cast<double>(targets.size());
        for (NodeIndex c : targets) {
            auto& dst = agg[c];
            if (dst.empty()) dst.assign(row.size(), 0.0);
            for (std::size_t s = 0; s < row.size(); ++s) dst[s] += row[s] * share;
        }
    }
    return agg;
}

/// Drops communities and access arcs and attaches demand to centres.
/// Returns the reduced instance; `index_map[old] = new` for kept nodes.
inline Instance build_reduced_network(const Instance& net, const std::map<NodeIndex, std::vector<double>>& aggregated,
                                      std::vector<std::optional<NodeIndex>>* index_map = nullptr) {
    Instance out;
    out.name = net.name;
    out.coordinates = net.coordinates;
    out.vaccines = net.vaccines;
    out.horizon = net.horizon;
    out.budget = net.budget;
    out.drone = net.drone;
    out.epsilon = net.epsilon;
    out.access_radius_km = net.access_radius_km;
    out.central_supply = net.central_supply;
    out.unassigned_demand = net.unassigned_demand;
    std::vector<std::optional<NodeIndex>> remap(net.nodes.size());
    for (NodeIndex i = 0; i < net.nodes.size(); ++i) {
        if (net.nodes[i].kind == NodeKind::Community) continue;
        remap[i] = out.nodes.size();
        Node n = net.nodes[i];
        n.community.reset();
        out.nodes.push_back(std::move(n));
    }
    for (const Arc& a : net.arcs) {
        if (a.kind == ArcKind::Access) continue;
        if (!remap[a.from] || !remap[a.to]) continue;
        Arc b = a;
        b.from = *remap[a.from];
        b.to = *remap[a.to];
        out.arcs.push_back(std::move(b));
    }
    for (const auto& [node, row] : aggregated) {
        if (!remap[node]) throw Error("aggregated demand sits on a dropped node");
        out.demand[*remap[node]] = row;
    }
    if (index_map) *index_map = std::move(remap);
    return out;
}

struct PreprocessResult {
    AccessIndicator indicator;
    OutreachSelection selection;
    Instance community_network;  // for model P
    Instance reduced;            // for model Q
    std::vector<std::optional<NodeIndex>> reduced_index;  // community_network node -> reduced node
};

/// Access indicator, set cover, outreach posts, aggregation and reduction.
/// An instance without communities passes through unchanged.
inline PreprocessResult preprocess(const Instance& inst, const PreprocessOptions& opt = {}) {
    PreprocessResult r;
    bool has_communities = false;
    for (const Node& n : inst.nodes) has_communities = has_communities || n.kind == NodeKind::Community;
    if (!has_communities) {
        r.community_network = inst;
        r.reduced = inst;
        for (NodeIndex i = 0; i < inst.nodes.size(); ++i) r.reduced_index.push_back(i);
        return r;
    }
    Instance base = inst;
    if (base.central_supply.empty()) base.central_supply = default_central_supply(inst);
    r.indicator = build_access_indicator(base, opt.radius_km);
    r.selection = select_outreach_hosts(r.indicator, opt.method, opt.cover_node_limit);
    r.community_network = attach_outreach_posts(base, r.indicator, r.selection, opt);
    r.reduced = build_reduced_network(r.community_network, aggregate_demand(r.community_network), &r.reduced_index);
    return r;
}

}  // namespace vaxnet
