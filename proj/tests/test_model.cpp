#include <catch_amalgamated.hpp>

#include "support/fixtures.hpp"
#include "vaxnet/model.hpp"

using namespace vaxnet;

namespace {

bool mentions(const ValidationReport& r, const std::string& text) {
    for (const auto& v : r.violations)
        if (v.message.find(text) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("well-formed chain validates", "[model]") {
    const auto r = validate_instance(fixtures::chain());
    CHECK(r.ok());
    CHECK(r.summary().empty());
}

TEST_CASE("drone arc beyond range", "[model]") {
    Instance inst = fixtures::tiny_post();
    inst.drone.range_km = 75;
    inst.arcs[0].distance_km = 100;
    const auto r = validate_instance(inst);
    CHECK(r.contains("drone_range"));
    CHECK(mentions(r, "drone arc exceeds range"));
}

TEST_CASE("open-vial wastage of one", "[model]") {
    Instance inst = fixtures::chain();
    inst.vaccines[0].ovw_rate = 1.0;
    CHECK(mentions(validate_instance(inst), "division by zero in OVW correction"));
    inst.vaccines[0].ovw_rate = 0.0;
    inst.nodes[1].ovw_rate = {1.0};
    CHECK(mentions(validate_instance(inst), "division by zero in OVW correction"));
}

TEST_CASE("structural violations are each reported", "[model]") {
    Instance inst = fixtures::chain();
    inst.nodes.push_back(fixtures::node("store2", NodeKind::CentralStore, 5, 5, 1));
    CHECK(validate_instance(inst).contains("central_store"));

    inst = fixtures::chain();
    inst.nodes[2].storage_capacity_cm3 = 10;
    CHECK(validate_instance(inst).contains("storage_without_cold_chain"));

    inst = fixtures::chain();
    inst.nodes[1].storage_wastage = {1.0};
    CHECK(validate_instance(inst).contains("storage_wastage"));

    inst = fixtures::chain();
    inst.arcs[1].distance_km = 6;
    CHECK(validate_instance(inst).contains("access_radius"));

    inst = fixtures::chain();
    inst.arcs.push_back(fixtures::arc(ArcKind::Land, 1, 0, 10));
    CHECK(validate_instance(inst).ok());  // clinic back to store is allowed: both hold stock
    inst.arcs.push_back(fixtures::arc(ArcKind::Land, 0, 2, 10));
    CHECK(validate_instance(inst).contains("land_arc_endpoints"));

    inst = fixtures::chain();
    inst.arcs.push_back(fixtures::arc(ArcKind::Drone, 0, 1, 10));
    CHECK(validate_instance(inst).contains("drone_arc_origin"));

    inst = fixtures::chain();
    inst.demand[0] = fixtures::row(inst, {1});
    CHECK(validate_instance(inst).contains("demand_node"));

    inst = fixtures::chain();
    inst.demand[2].pop_back();
    CHECK(validate_instance(inst).contains("demand_shape"));

    inst = fixtures::chain();
    inst.epsilon = 1.0;
    CHECK(validate_instance(inst).contains("epsilon"));
}

TEST_CASE("fleet bound is floor of budget over drone cost", "[model]") {
    Instance inst = fixtures::chain();
    inst.drone.unit_cost = 30000;
    inst.budget = 0;
    CHECK(inst.max_drones() == 0);
    inst.budget = 89999;
    CHECK(inst.max_drones() == 2);
    inst.budget = 90000;
    CHECK(inst.max_drones() == 3);
}

TEST_CASE("distances", "[model]") {
    CHECK(distance_km({0, 0}, {3, 4}, CoordinateSystem::Planar) == Catch::Approx(5.0));
    // one degree of latitude is about 111.2 km
    CHECK(distance_km({13.0, 2.0}, {14.0, 2.0}, CoordinateSystem::Geographic) == Catch::Approx(111.19).epsilon(1e-3));
}

TEST_CASE("default central supply covers demand grossed up for wastage", "[model]") {
    const Instance inst = fixtures::chain();
    const auto supply = default_central_supply(inst);
    const auto demand = total_demand_by_slot(inst);
    double s = 0.0, d = 0.0;
    for (double v : supply) s += v;
    for (double v : demand) d += v;
    CHECK(s >= d);
    CHECK(effective_central_supply(inst) == supply);
}

TEST_CASE("solution layout", "[model]") {
    const Instance inst = fixtures::chain();
    Solution s = Solution::empty_for(inst);
    CHECK(s.arc_flow.size() == inst.arcs.size() * inst.table_size());
    s.flow(1, 0, 2) = 7;
    s.given(1, 0, 2) = 3;
    CHECK(doses_at_center(s, inst, 1, 0, 2) == 10);
    CHECK(!s.has_value());
}
