#include <catch_amalgamated.hpp>

#include "support/fixtures.hpp"
#include "vaxnet/generator.hpp"
#include "vaxnet/instance_io.hpp"
#include "vaxnet/preprocess.hpp"

using namespace vaxnet;

TEST_CASE("same seed, same bytes", "[generator]") {
    const auto cfg = fixtures::small_config(9);
    const std::string a = instance_to_json(generate_synthetic(cfg)).dump(1);
    const std::string b = instance_to_json(generate_synthetic(cfg)).dump(1);
    CHECK(a == b);
    auto other = cfg;
    other.seed = 10;
    CHECK(instance_to_json(generate_synthetic(other)).dump(1) != a);
}

TEST_CASE("generated instances validate", "[generator]") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto cfg = fixtures::small_config(seed);
        cfg.vaccine_count = 9;
        cfg.campaign_spike = seed % 2 == 0;
        const Instance inst = generate_synthetic(cfg);
        CHECK(validate_instance(inst).ok());
        CHECK(inst.vaccine_count() == 9);
        CHECK(inst.horizon == cfg.horizon);
        std::size_t clinics = 0, communities = 0;
        for (const Node& n : inst.nodes) {
            clinics += n.kind == NodeKind::Clinic;
            communities += n.kind == NodeKind::Community;
        }
        CHECK(communities == static_cast<std::size_t>(cfg.n_communities));
        CHECK(clinics == clinic_count(cfg));
        // demand is regimen-consistent: a vaccine with a doses per child asks for a times the children
        for (const auto& [k, row] : inst.demand) {
            const double children = row[inst.slot(0, 0)] / inst.vaccines[0].doses_per_regimen;
            for (std::size_t l = 1; l < inst.vaccine_count(); ++l)
                CHECK(row[inst.slot(l, 0)] == Catch::Approx(children * inst.vaccines[l].doses_per_regimen));
        }
    }
}

TEST_CASE("denser regions have closer communities", "[generator]") {
    const double agadez = mean_nearest_neighbor_km(generate_synthetic(region_config("Agadez", 1)));
    const double maradi = mean_nearest_neighbor_km(generate_synthetic(region_config("Maradi", 1)));
    CHECK(maradi < agadez);
    // same community count, so spacing scales with the square root of the area ratio (about 4)
    CHECK(agadez > 3 * maradi);
    CHECK_THROWS_AS(region_config("Tahoua"), Error);
}

TEST_CASE("clinic in every community", "[generator]") {
    auto cfg = fixtures::small_config(2);
    cfg.clinic_fraction_of_communities = 1.0;
    const Instance inst = generate_synthetic(cfg);
    std::set<std::string> hosts;
    for (const Node& n : inst.nodes)
        if (n.kind == NodeKind::Clinic) hosts.insert(*n.community);
    CHECK(hosts.size() == static_cast<std::size_t>(cfg.n_communities));
    const auto ind = build_access_indicator(inst);
    const auto sel = select_outreach_hosts(ind);
    std::vector<NodeIndex> communities;
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
        if (inst.nodes[i].kind == NodeKind::Community) communities.push_back(i);
    CHECK(sel.hosts == communities);
}

TEST_CASE("clinic cap", "[generator]") {
    auto cfg = fixtures::small_config(1);
    cfg.n_clinics = 2;
    CHECK(clinic_count(cfg) == 2);
    cfg.n_clinics = 0;
    CHECK(clinic_count(cfg) == 3);  // 0.3 of 10
}

TEST_CASE("bad configurations are rejected", "[generator]") {
    auto bad = [](auto mutate) {
        auto cfg = fixtures::small_config(1);
        mutate(cfg);
        return cfg;
    };
    CHECK_THROWS_AS(generate_synthetic(bad([](GeneratorConfig& c) { c.n_communities = 0; })), Error);
    CHECK_THROWS_AS(generate_synthetic(bad([](GeneratorConfig& c) { c.clinic_fraction_of_communities = 0; })), Error);
    CHECK_THROWS_AS(generate_synthetic(bad([](GeneratorConfig& c) { c.vaccine_count = 10; })), Error);
    CHECK_THROWS_AS(generate_synthetic(bad([](GeneratorConfig& c) { c.region_area_km2 = 1e-4; })), Error);
    CHECK_THROWS_AS(generate_synthetic(bad([](GeneratorConfig& c) { c.drone_preset = "kite"; })), Error);
}
