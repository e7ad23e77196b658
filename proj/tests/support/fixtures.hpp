#pragma once

#include <string>
#include <vector>

#include "vaxnet/generator.hpp"
#include "vaxnet/model.hpp"

namespace fixtures {

using namespace vaxnet;

inline Vaccine vaccine(std::string id, int doses = 1, double volume = 1.0) {
    Vaccine v;
    v.id = std::move(id);
    v.doses_per_regimen = doses;
    v.dose_volume_cm3 = volume;
    return v;
}

inline Node node(std::string id, NodeKind kind, double x, double y, double storage = 0.0) {
    Node n;
    n.id = std::move(id);
    n.kind = kind;
    n.position = {x, y};
    n.storage_capacity_cm3 = storage;
    return n;
}

inline Arc arc(ArcKind kind, NodeIndex from, NodeIndex to, double km, double cap = kUnlimited) {
    Arc a;
    a.kind = kind;
    a.from = from;
    a.to = to;
    a.distance_km = km;
    a.transport_capacity_cm3 = cap;
    return a;
}

inline std::vector<double> row(const Instance& inst, std::initializer_list<double> values) {
    std::vector<double> r(values);
    r.resize(inst.table_size(), 0.0);
    return r;
}

/// Central store (a hub candidate) with a drone arc to one outreach post
/// serving `communities` communities.
inline Instance tiny_post(int communities = 1, int horizon = 2, double budget = 1.1e6) {
    Instance inst;
    inst.name = "tiny_post";
    inst.horizon = horizon;
    inst.budget = budget;
    inst.vaccines = {vaccine("A")};
    inst.nodes.push_back(node("store", NodeKind::CentralStore, 0, 0, kUnlimited));
    inst.nodes[0].hub_cost = 1e6;
    Node post = node("post", NodeKind::OutreachPost, 20, 0);
    inst.nodes.push_back(post);
    inst.arcs.push_back(arc(ArcKind::Drone, 0, 1, 20));
    for (int k = 0; k < communities; ++k) {
        inst.nodes.push_back(node("c" + std::to_string(k), NodeKind::Community, 20 + k, 0));
        inst.arcs.push_back(arc(ArcKind::Access, inst.nodes.size() - 1, 1, k));
        inst.demand[inst.nodes.size() - 1] = row(inst, {10, 10});
    }
    inst.nodes[1].community = "c0";
    inst.central_supply.assign(inst.table_size(), 100.0);
    return inst;
}

/// CentralStore -> Clinic by land, one community next to the clinic.
inline Instance chain() {
    Instance inst;
    inst.name = "chain";
    inst.horizon = 3;
    inst.vaccines = {vaccine("A")};
    inst.nodes = {node("store", NodeKind::CentralStore, 0, 0, kUnlimited), node("clinic", NodeKind::Clinic, 10, 0, 500),
                  node("village", NodeKind::Community, 11, 0)};
    inst.nodes[1].community = "village";
    inst.arcs = {arc(ArcKind::Land, 0, 1, 10, 1000), arc(ArcKind::Access, 2, 1, 1)};
    inst.demand[2] = row(inst, {0, 40, 40});
    return inst;
}

/// `n` communities on a line with the given spacing and no clinics, plus
/// a central store far away.
inline Instance line(int n, double spacing_km) {
    Instance inst;
    inst.name = "line";
    inst.vaccines = {vaccine("A")};
    inst.nodes.push_back(node("store", NodeKind::CentralStore, 0, -100, kUnlimited));
    for (int k = 0; k < n; ++k) {
        inst.nodes.push_back(node("c" + std::to_string(k), NodeKind::Community, k * spacing_km, 0));
        inst.demand[inst.nodes.size() - 1] = row(inst, {1});
    }
    return inst;
}

/// Small generated instance that solves in well under a second.
inline GeneratorConfig small_config(std::uint64_t seed) {
    GeneratorConfig c;
    c.seed = seed;
    c.name = "small_" + std::to_string(seed);
    c.region_area_km2 = 900.0;
    c.population = 40000.0;
    c.n_districts = 2;
    c.n_communities = 10;
    c.vaccine_count = 1;
    c.horizon = 5;
    return c;
}

inline Instance small(std::uint64_t seed) { return generate_synthetic(small_config(seed)); }

}  // namespace fixtures
