#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "vaxnet/instance_io.hpp"
#include "vaxnet/model.hpp"
#include "vaxnet/preprocess.hpp"

namespace vaxnet {

struct GeneratorConfig {
    std::uint64_t seed = 1;
    std::string name = "synthetic";
    double region_area_km2 = 2500.0;
    double population = 150000.0;
    int n_regional_centers = 1;
    int n_districts = 3;
    int n_communities = 30;
    int n_clinics = 0;                            // 0: derived from the clinic fraction
    double clinic_fraction_of_communities = 0.3;
    double community_clustering = 0.35;           // cluster spread, in units of mean community spacing
    double urban_share = 0.6;                     // communities drawn around urban cores
    double capacity_scale = 1.0;
    int horizon = 6;
    double birth_rate_per_1000 = 48.0;
    double periods_per_year = 365.0;
    std::size_t vaccine_count = 9;                // first k vaccines of the default schedule
    double budget = 0.0;
    std::string drone_preset = "battery-75";
    double hub_cost = kDefaultHubCost;
    double storage_wastage = 0.01;
    double land_wastage = 0.01;
    double drone_wastage = 0.005;
    bool campaign_spike = false;                  // triple demand in the first period
};

/// Configurations calibrated on four Niger regions (population and area).
inline GeneratorConfig region_config(const std::string& region, std::uint64_t seed = 1) {
    GeneratorConfig c;
    c.seed = seed;
    c.name = region;
    if (region == "Agadez") { c.population = 626100; c.region_area_km2 = 634209; }
    else if (region == "Diffa") { c.population = 762700; c.region_area_km2 = 140216; }
    else if (region == "Maradi") { c.population = 4728200; c.region_area_km2 = 38581; }
    else if (region == "Zinder") { c.population = 4873900; c.region_area_km2 = 145430; }
    else throw Error("unknown region '" + region + "' (known: Agadez, Diffa, Maradi, Zinder)");
    return c;
}

namespace detail {

// Hand-written transforms over mt19937_64 so output does not depend on the
// standard library's distribution implementations.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (spare_) {
            spare_ = false;
            return spare_value_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_value_ = r * std::sin(2.0 * std::numbers::pi * u2);
        spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::size_t index(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n))); }

private:
    std::mt19937_64 rng_;
    bool spare_ = false;
    double spare_value_ = 0.0;
};

inline void check_config(const GeneratorConfig& c) {
    if (c.n_regional_centers < 1 || c.n_districts < 1 || c.n_communities < 1 || c.horizon < 1 || c.n_clinics < 0)
        throw Error("generator counts must be positive");
    if (!(c.clinic_fraction_of_communities > 0.0 && c.clinic_fraction_of_communities <= 1.0))
        throw Error("clinic fraction must lie in (0,1]");
    if (!(c.region_area_km2 > 0.0) || !(c.population > 0.0) || !(c.birth_rate_per_1000 > 0.0) ||
        !(c.capacity_scale > 0.0) || !(c.periods_per_year > 0.0))
        throw Error("area, population, birth rate, capacity scale and periods per year must be positive");
    if (!(c.community_clustering > 0.0) || !(c.urban_share >= 0.0 && c.urban_share <= 1.0))
        throw Error("clustering must be positive and the urban share in [0,1]");
    if (c.vaccine_count < 1 || c.vaccine_count > 9) throw Error("vaccine count must lie in 1..9");
    const double spacing = std::sqrt(c.region_area_km2 / (c.n_communities + c.n_districts + 1));
    if (spacing < 0.05) throw Error("region area is too small for the requested number of nodes");
}

}  // namespace detail

inline std::size_t clinic_count(const GeneratorConfig& c) {
    auto n = static_cast<std::size_t>(std::max(1.0, std::round(c.clinic_fraction_of_communities * c.n_communities)));
    if (c.n_clinics > 0) n = std::min(n, static_cast<std::size_t>(c.n_clinics));
    return std::min(n, static_cast<std::size_t>(c.n_communities));
}

/// A four-tier region: central store, regional centres, district stores,
/// clinics in the largest communities, and communities around urban cores.
inline Instance generate_synthetic(const GeneratorConfig& cfg) {
    detail::check_config(cfg);
    detail::Sampler rng(cfg.seed);
    const double side = std::sqrt(cfg.region_area_km2);
    const std::size_t K = static_cast<std::size_t>(cfg.n_communities);
    const std::size_t nd = static_cast<std::size_t>(cfg.n_districts);
    const double spacing = side / std::sqrt(static_cast<double>(K));
    auto clip = [&](double v) { return std::clamp(v, 0.0, side); };

    Instance inst;
    inst.name = cfg.name;
    inst.horizon = cfg.horizon;
    inst.budget = cfg.budget;
    inst.drone = drone_preset(cfg.drone_preset);
    inst.vaccines = default_vaccines();
    inst.vaccines.resize(cfg.vaccine_count);
    const std::size_t L = inst.vaccine_count();
    const std::size_t T = inst.period_count();

    // First regional centre in the middle; districts spread over the inner region.
    std::vector<Position> regionals{{side / 2, side / 2}};
    for (int r = 1; r < cfg.n_regional_centers; ++r)
        regionals.push_back({rng.uniform(0.2, 0.8) * side, rng.uniform(0.2, 0.8) * side});
    std::vector<Position> districts;
    for (std::size_t d = 0; d < nd; ++d) districts.push_back({rng.uniform(0.1, 0.9) * side, rng.uniform(0.1, 0.9) * side});
    std::vector<Position> cores = districts;
    cores.insert(cores.end(), regionals.begin(), regionals.end());

    std::vector<Position> community_pos;
    std::vector<double> weight;
    for (std::size_t k = 0; k < K; ++k) {
        const bool urban = rng.uniform() < cfg.urban_share;
        Position p;
        if (urban) {
            const Position& c = cores[rng.index(cores.size())];
            const double sd = cfg.community_clustering * spacing;
            p = {clip(c.x + sd * rng.normal()), clip(c.y + sd * rng.normal())};
        } else {
            p = {rng.uniform(0.0, side), rng.uniform(0.0, side)};
        }
        community_pos.push_back(p);
        weight.push_back(std::exp(0.8 * rng.normal()) * (urban ? 2.0 : 1.0));
    }
    const double weight_total = std::accumulate(weight.begin(), weight.end(), 0.0);

    // Clinics sit in the largest communities.
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weight[a] > weight[b]; });
    const std::size_t nc = clinic_count(cfg);
    std::vector<std::size_t> clinic_sites(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(nc));
    std::sort(clinic_sites.begin(), clinic_sites.end());

    // Daily demand volume drives capacity sizing.
    double children_per_period_total = cfg.population * cfg.birth_rate_per_1000 / 1000.0 / cfg.periods_per_year;
    double volume_per_child = 0.0;
    for (const auto& v : inst.vaccines) volume_per_child += v.doses_per_regimen * v.dose_volume_cm3;
    const double period_volume = children_per_period_total * volume_per_child;
    const double scale = cfg.capacity_scale;

    auto node = [&](std::string id, NodeKind kind, Position pos, double cap) {
        Node n;
        n.id = std::move(id);
        n.kind = kind;
        n.position = pos;
        n.storage_capacity_cm3 = cap;
        if (has_cold_storage(kind)) n.storage_wastage.assign(L, cfg.storage_wastage);
        inst.nodes.push_back(std::move(n));
        return inst.nodes.size() - 1;
    };
    const NodeIndex central = node("central", NodeKind::CentralStore, {0.0, 0.0}, kUnlimited);
    const double nr = static_cast<double>(regionals.size());
    std::vector<NodeIndex> regional_nodes;
    for (std::size_t r = 0; r < regionals.size(); ++r) {
        const std::string id = regionals.size() == 1 ? "regional" : "regional_" + std::to_string(r);
        const NodeIndex i = node(id, NodeKind::RegionalCenter, regionals[r], scale * 4.0 * period_volume / nr);
        inst.nodes[i].hub_cost = cfg.hub_cost;
        regional_nodes.push_back(i);
    }
    std::vector<NodeIndex> district_nodes;
    for (std::size_t d = 0; d < nd; ++d) {
        const NodeIndex i = node("district_" + std::to_string(d), NodeKind::DistrictStore, districts[d],
                                 scale * 3.0 * period_volume / static_cast<double>(nd));
        inst.nodes[i].hub_cost = cfg.hub_cost;
        district_nodes.push_back(i);
    }
    std::vector<NodeIndex> community_nodes;
    for (std::size_t k = 0; k < K; ++k)
        community_nodes.push_back(node("c" + std::to_string(k), NodeKind::Community, community_pos[k], 0.0));
    std::vector<NodeIndex> clinic_nodes;
    for (std::size_t k : clinic_sites) {
        const NodeIndex i = node("clinic_" + std::to_string(k), NodeKind::Clinic, community_pos[k],
                                 scale * 2.0 * period_volume / static_cast<double>(nc));
        inst.nodes[i].community = inst.nodes[community_nodes[k]].id;
        clinic_nodes.push_back(i);
    }

    auto land = [&](NodeIndex from, NodeIndex to, double cap) {
        Arc a;
        a.kind = ArcKind::Land;
        a.from = from;
        a.to = to;
        a.distance_km = inst.distance(from, to);
        a.transport_capacity_cm3 = cap;
        a.transit_wastage.assign(L, cfg.land_wastage);
        inst.arcs.push_back(std::move(a));
    };
    auto nearest = [&](const std::vector<NodeIndex>& among, NodeIndex to) {
        NodeIndex best = among.front();
        for (NodeIndex i : among)
            if (inst.distance(i, to) < inst.distance(best, to)) best = i;
        return best;
    };
    for (NodeIndex r : regional_nodes) land(central, r, kUnlimited);
    for (NodeIndex d : district_nodes)
        land(nearest(regional_nodes, d), d, scale * 2.0 * period_volume / static_cast<double>(nd));
    for (NodeIndex c : clinic_nodes) land(nearest(district_nodes, c), c, scale * 1.5 * period_volume / static_cast<double>(nc));
    add_drone_arcs(inst, clinic_nodes, cfg.drone_wastage);

    // Regimen-consistent demand: children per period times doses per regimen.
    std::vector<double> period_weight(T, 1.0);
    if (cfg.campaign_spike) period_weight[0] = 3.0;
    const double weight_sum = std::accumulate(period_weight.begin(), period_weight.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const double children = children_per_period_total * static_cast<double>(T) * weight[k] / weight_total;
        std::vector<double> row(inst.table_size(), 0.0);
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t t = 0; t < T; ++t)
                row[inst.slot(l, t)] = children * period_weight[t] / weight_sum * inst.vaccines[l].doses_per_regimen;
        inst.demand[community_nodes[k]] = std::move(row);
    }
    return inst;
}

/// Mean distance from each community to its nearest other community.
inline double mean_nearest_neighbor_km(const Instance& inst) {
    std::vector<NodeIndex> ks;
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
        if (inst.nodes[i].kind == NodeKind::Community) ks.push_back(i);
    if (ks.size() < 2) return 0.0;
    double total = 0.0;
    for (NodeIndex a : ks) {
        double best = kUnlimited;
        for (NodeIndex b : ks)
            if (a != b) best = std::min(best, inst.distance(a, b));
        total += best;
    }
    return total / static_cast<double>(ks.size());
}

}  // namespace vaxnet
