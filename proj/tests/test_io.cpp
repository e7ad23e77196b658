#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/fixtures.hpp"
#include "vaxnet/instance_io.hpp"
#include "vaxnet/report.hpp"

using namespace vaxnet;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "horizon": 2,
  "budget": 0,
  "vaccines": [{"id": "BCG", "doses_per_regimen": 1, "dose_volume_cm3": 0.879}],
  "nodes": [
    {"id": "store", "kind": "central_store", "position": [0, 0]},
    {"id": "clinic", "kind": "clinic", "position": [3, 4], "storage_capacity": "2 L"}
  ],
  "arcs": [{"kind": "land", "from": "store", "to": "clinic"}],
  "demand": [{"node": "clinic", "vaccine": "BCG", "values": [10, 12]}]
})";

nlohmann::json minimal() { return nlohmann::json::parse(kMinimal); }

std::string pointer_of(const nlohmann::json& j) {
    try {
        parse_instance(j);
    } catch (const SchemaError& e) {
        return e.pointer();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("minimal file", "[io]") {
    const Instance inst = parse_instance(minimal());
    REQUIRE(inst.nodes.size() == 2);
    CHECK(inst.nodes[0].kind == NodeKind::CentralStore);
    CHECK(inst.nodes[0].storage_capacity_cm3 == kUnlimited);
    CHECK(inst.nodes[1].storage_capacity_cm3 == 2000.0);
    REQUIRE(inst.arcs.size() == 1);
    CHECK(inst.arcs[0].distance_km == 5.0);
    CHECK(inst.demand.at(1) == std::vector<double>{10, 12});
    CHECK(inst.epsilon == kDefaultEpsilon);
    CHECK(inst.access_radius_km == 5.0);
}

TEST_CASE("negative capacity is located by pointer", "[io]") {
    auto j = minimal();
    j["nodes"][0]["storage_capacity"] = -5;
    CHECK(pointer_of(j) == "/nodes/0/storage_capacity");
    try {
        parse_instance(j);
    } catch (const SchemaError& e) {
        CHECK_THAT(std::string(e.what()), ContainsSubstring("/nodes/0/storage_capacity"));
    }
}

TEST_CASE("schema errors point at the offending field", "[io]") {
    auto j = minimal();
    j["nodes"][1]["colour"] = "red";
    CHECK(pointer_of(j) == "/nodes/1/colour");

    j = minimal();
    j.erase("horizon");
    CHECK(pointer_of(j) == "/horizon");

    j = minimal();
    j["schema_version"] = 2;
    CHECK(pointer_of(j) == "/schema_version");

    j = minimal();
    j["arcs"][0]["to"] = "nowhere";
    CHECK(pointer_of(j) == "/arcs/0/to");

    j = minimal();
    j["demand"][0]["values"] = {1};
    CHECK(pointer_of(j) == "/demand/0/values");

    j = minimal();
    j["demand"][0]["values"][1] = -1;
    CHECK(pointer_of(j) == "/demand/0/values/1");

    j = minimal();
    j["nodes"][1]["storage_capacity"] = "3 gallons";
    CHECK(pointer_of(j) == "/nodes/1/storage_capacity");

    j = minimal();
    j["drone"] = {{"preset", "balloon"}};
    CHECK(pointer_of(j) == "/drone/preset");

    CHECK_THROWS_AS(parse_instance_text("{not json"), SchemaError);
}

TEST_CASE("semantic violations surface after parsing", "[io]") {
    auto j = minimal();
    j["nodes"][1]["kind"] = "central_store";
    CHECK_THROWS_WITH(parse_instance(j), ContainsSubstring("central store"));
}

TEST_CASE("volume units", "[io]") {
    auto j = minimal();
    j["drone"] = {{"payload", "1.0 L"}};
    CHECK(parse_instance(j).drone.payload_cm3 == 1000.0);
    j["drone"]["payload"] = "5 dL";
    CHECK(parse_instance(j).drone.payload_cm3 == 500.0);
    j["drone"]["payload"] = "750 cm3";
    CHECK(parse_instance(j).drone.payload_cm3 == 750.0);
    j["drone"]["payload"] = 1234.5;
    CHECK(parse_instance(j).drone.payload_cm3 == 1234.5);
    j["nodes"][1]["storage_capacity"] = "unlimited";
    CHECK(parse_instance(j).nodes[1].storage_capacity_cm3 == kUnlimited);
}

TEST_CASE("default vaccine table", "[io]") {
    const auto v = default_vaccines();
    REQUIRE(v.size() == 9);
    CHECK(v[0].id == "BCG");
    CHECK(v[0].dose_volume_cm3 == 0.879);
    CHECK(v[0].diluent_volume_cm3 == 0.626);
    CHECK(v[0].doses_per_regimen == 1);
    CHECK(v[1].id == "DTP-HebB-Hip");
    CHECK(v[1].dose_volume_cm3 == 3.062);
    CHECK(v[1].diluent_volume_cm3 == 0.0);
    CHECK(v[1].doses_per_regimen == 3);
    CHECK(v[8].id == "OPV");
    CHECK(v[8].doses_per_regimen == 4);
    CHECK(v[8].storage_mode == StorageMode::Frozen);
    for (const auto& vac : v) {
        CHECK(vac.ovw_rate >= 0.0);
        CHECK(vac.ovw_rate < 1.0);
    }
    auto j = minimal();
    j["vaccines"] = "default";
    j["demand"][0]["vaccine"] = "OPV";
    CHECK(parse_instance(j).vaccines == v);
}

TEST_CASE("open vial wastage estimate", "[io]") {
    CHECK(estimate_ovw(1) == 0.0);
    // two-dose vial, two children at most, p = 1/2: opened 2*(3/4), used 1
    CHECK_THAT(estimate_ovw(2, 2, 0.5), WithinAbs(1.0 - 1.0 / 1.5, 1e-12));
    CHECK(estimate_ovw(20) > estimate_ovw(10));
}

TEST_CASE("drone presets", "[io]") {
    const auto b = drone_preset("battery-75");
    CHECK(b.range_km == 75.0);
    CHECK(b.speed_kmh == 75.0);
    const auto f = drone_preset("fuel-900");
    CHECK(f.range_km == 900.0);
    CHECK(f.payload_cm3 == 10000.0);
    CHECK(drone_preset("battery-30").range_km == 30.0);
    CHECK_THROWS_AS(drone_preset("kite"), Error);
    auto j = minimal();
    j["drone"] = {{"preset", "fuel-900"}, {"unit_cost", 45000}};
    const auto inst = parse_instance(j);
    CHECK(inst.drone.range_km == 900.0);
    CHECK(inst.drone.unit_cost == 45000.0);
}

TEST_CASE("round trip preserves the instance", "[io]") {
    for (std::uint64_t seed : {1u, 7u}) {
        const Instance a = fixtures::small(seed);
        const Instance b = parse_instance(instance_to_json(a));
        CHECK(a == b);
        CHECK(instance_to_json(b).dump() == instance_to_json(a).dump());
    }
    const Instance t = fixtures::tiny_post();
    CHECK(parse_instance(instance_to_json(t)) == t);
}

TEST_CASE("files on disk", "[io]") {
    const auto dir = std::filesystem::temp_directory_path() / "vaxnet_io_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "inst.json").string();
    const Instance a = fixtures::chain();
    write_instance(a, path);
    CHECK(load_instance(path) == a);
    CHECK_THROWS_AS(load_instance((dir / "missing.json").string()), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("solution json names entities", "[io]") {
    const Instance inst = fixtures::chain();
    Solution s = Solution::empty_for(inst);
    s.status = SolveStatus::Optimal;
    s.objective = 1.5;
    s.flow(0, 0, 1) = 40;
    s.flow(1, 0, 2) = 40;
    const auto j = solution_to_json(inst, s);
    CHECK(j["status"] == "optimal");
    REQUIRE(j["flows"].size() == 2);
    CHECK(j["flows"][0]["from"] == "store");
    CHECK(j["flows"][0]["to"] == "clinic");
    CHECK(j["flows"][0]["kind"] == "land");
    CHECK(j["flows"][1]["kind"] == "access");
    CHECK(j["hubs"].empty());
}

TEST_CASE("results csv", "[io]") {
    ExperimentReport empty;
    std::ostringstream a;
    write_results_csv(empty, a);
    CHECK(a.str() == "scenario,metric,unit,value,note\r\n");

    ExperimentReport one;
    one.add("baseline", "sr_community", "fraction", 0.4155);
    std::ostringstream b;
    write_results_csv(one, b);
    CHECK(b.str() == "scenario,metric,unit,value,note\r\nbaseline,sr_community,fraction,0.415500,\r\n");

    ExperimentReport quoted;
    quoted.add("x", "hubs", "count", 2, "r1,\"d2\"");
    std::ostringstream c;
    write_results_csv(quoted, c);
    CHECK_THAT(c.str(), ContainsSubstring("\"r1,\"\"d2\"\"\""));
}
