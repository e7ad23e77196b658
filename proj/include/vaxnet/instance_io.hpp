#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vaxnet/model.hpp"

namespace vaxnet {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kDefaultHubCost = 1'000'000.0;

/// Schema violation located by a JSON pointer.
class SchemaError : public Error {
public:
    SchemaError(std::string pointer, const std::string& message)
        : Error("schema error at " + (pointer.empty() ? std::string("/") : pointer) + ": " + message),
          pointer_(std::move(pointer)) {}
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

// --------------------------------------------------------------------------
// Embedded defaults

/// Open-vial wastage for a multi-dose vial when each session sees
/// Binomial(20, 0.5) children: one minus doses used over doses opened.
inline double estimate_ovw(int vial_size, int session_max = 20, double p = 0.5) {
    if (vial_size <= 1) return 0.0;
    double used = 0.0, opened = 0.0;
    double choose = 1.0;  // C(session_max, n)
    for (int n = 0; n <= session_max; ++n) {
        if (n > 0) choose = choose * (session_max - n + 1) / n;
        const double prob = choose * std::pow(p, n) * std::pow(1.0 - p, session_max - n);
        used += prob * n;
        opened += prob * vial_size * std::ceil(static_cast<double>(n) / vial_size);
    }
    return opened > 0.0 ? 1.0 - used / opened : 0.0;
}

/// The nine vaccines of the Niger schedule.
inline std::vector<Vaccine> default_vaccines() {
    struct Row {
        const char* id;
        int doses;
        double volume;
        double diluent;
        int vial;
        StorageMode mode;
    };
    static const Row rows[] = {
        {"BCG", 1, 0.879, 0.626, 20, StorageMode::Either},
        {"DTP-HebB-Hip", 3, 3.062, 0.0, 10, StorageMode::Refrigerated},
        {"Pneumo", 3, 2.109, 0.0, 10, StorageMode::Refrigerated},
        {"IPV", 1, 2.440, 0.0, 10, StorageMode::Refrigerated},
        {"Measles", 2, 2.109, 3.142, 10, StorageMode::Refrigerated},
        {"MenA", 1, 2.109, 3.106, 10, StorageMode::Refrigerated},
        {"Yellow Fever", 2, 2.715, 4.730, 10, StorageMode::Refrigerated},
        {"Rotavirus", 2, 17.126, 0.0, 1, StorageMode::Refrigerated},
        {"OPV", 4, 0.879, 0.0, 1, StorageMode::Frozen},
    };
    std::vector<Vaccine> out;
    for (const Row& r : rows)
        out.push_back({r.id, r.doses, r.volume, r.diluent, estimate_ovw(r.vial), r.mode, r.vial});
    return out;
}

inline std::map<std::string, DroneSpec> default_drone_specs() {
    std::map<std::string, DroneSpec> specs;
    for (double range : {30.0, 50.0, 75.0}) {
        DroneSpec d;
        d.name = "battery-" + std::to_string(static_cast<int>(range));
        d.payload_cm3 = 2.0 * kCubicCentimetresPerLitre;
        d.range_km = range;
        specs[d.name] = d;
    }
    DroneSpec fuel;
    fuel.name = "fuel-900";
    fuel.payload_cm3 = 10.0 * kCubicCentimetresPerLitre;
    fuel.range_km = 900.0;
    specs[fuel.name] = fuel;
    return specs;
}

inline DroneSpec drone_preset(const std::string& name) {
    const auto specs = default_drone_specs();
    auto it = specs.find(name);
    if (it == specs.end()) {
        std::string known;
        for (const auto& [k, v] : specs) known += (known.empty() ? "" : ", ") + k;
        throw Error("unknown drone preset '" + name + "' (known: " + known + ")");
    }
    return it->second;
}

// --------------------------------------------------------------------------
// Reading

namespace detail {

using json = nlohmann::json;

inline std::string ptr(const std::string& base, const std::string& key) { return base + "/" + key; }
inline std::string ptr(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

inline void only_keys(const json& j, const std::string& at, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw SchemaError(at, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw SchemaError(ptr(at, it.key()), "unknown field '" + it.key() + "'");
    }
}

inline const json& need(const json& j, const std::string& at, const char* key) {
    if (!j.contains(key)) throw SchemaError(ptr(at, key), "required field is missing");
    return j.at(key);
}

inline double number(const json& j, const std::string& at) {
    if (!j.is_number()) throw SchemaError(at, "expected a number");
    return j.get<double>();
}

inline double non_negative(const json& j, const std::string& at) {
    const double v = number(j, at);
    if (!(v >= 0.0) || !std::isfinite(v)) throw SchemaError(at, "must be finite and non-negative");
    return v;
}

inline int integer(const json& j, const std::string& at) {
    if (!j.is_number_integer()) throw SchemaError(at, "expected an integer");
    return j.get<int>();
}

inline std::string string(const json& j, const std::string& at) {
    if (!j.is_string()) throw SchemaError(at, "expected a string");
    return j.get<std::string>();
}

/// Volume in cm³ from a number (cm³), "unlimited", or a string with a unit.
inline double volume(const json& j, const std::string& at) {
    double v = 0.0;
    if (j.is_number()) {
        v = j.get<double>();
    } else if (j.is_string()) {
        std::string s = j.get<std::string>();
        std::string lower;
        for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (lower == "unlimited" || lower == "inf" || lower == "infinity") return kUnlimited;
        std::size_t used = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw SchemaError(at, "cannot read a volume from '" + s + "'");
        }
        std::string unit = s.substr(used);
        unit.erase(0, unit.find_first_not_of(" \t"));
        unit.erase(unit.find_last_not_of(" \t") + 1);
        if (unit == "L" || unit == "l" || unit == "liter" || unit == "litre" || unit == "liters" || unit == "litres")
            v *= kCubicCentimetresPerLitre;
        else if (unit == "dL" || unit == "dl")
            v *= 100.0;
        else if (!(unit.empty() || unit == "cm3" || unit == "cm³" || unit == "ml" || unit == "mL"))
            throw SchemaError(at, "unknown volume unit '" + unit + "'");
    } else {
        throw SchemaError(at, "expected a volume (number of cm3, a string with unit, or \"unlimited\")");
    }
    if (!(v >= 0.0)) throw SchemaError(at, "volume must be non-negative");
    return v;
}

inline std::vector<double> fractions(const json& j, const std::string& at, std::size_t L) {
    std::vector<double> out;
    if (j.is_number()) {
        out.assign(L, number(j, at));
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], ptr(at, i)));
        if (out.size() != L) throw SchemaError(at, "needs one entry per vaccine");
    } else {
        throw SchemaError(at, "expected a fraction or an array of fractions");
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!(out[i] >= 0.0 && out[i] < 1.0)) throw SchemaError(j.is_array() ? ptr(at, i) : at, "fraction outside [0,1)");
    return out;
}

inline std::vector<double> table(const json& j, const std::string& at, const Instance& inst,
                                 const std::map<std::string, std::size_t>& vaccine_index, bool with_node,
                                 std::map<NodeIndex, std::vector<double>>* per_node) {
    if (!j.is_array()) throw SchemaError(at, "expected an array");
    std::vector<double> flat(inst.table_size(), 0.0);
    for (std::size_t e = 0; e < j.size(); ++e) {
        const std::string ep = ptr(at, e);
        const json& entry = j[e];
        if (with_node) only_keys(entry, ep, {"node", "vaccine", "values"});
        else only_keys(entry, ep, {"vaccine", "values"});
        const std::string vid = string(need(entry, ep, "vaccine"), ptr(ep, "vaccine"));
        auto vi = vaccine_index.find(vid);
        if (vi == vaccine_index.end()) throw SchemaError(ptr(ep, "vaccine"), "unknown vaccine '" + vid + "'");
        const json& values = need(entry, ep, "values");
        if (!values.is_array() || values.size() != inst.period_count())
            throw SchemaError(ptr(ep, "values"), "needs one value per period");
        std::vector<double>* row = &flat;
        if (with_node) {
            const std::string nid = string(need(entry, ep, "node"), ptr(ep, "node"));
            const auto node = inst.find(nid);
            if (!node) throw SchemaError(ptr(ep, "node"), "unknown node '" + nid + "'");
            auto& r = (*per_node)[*node];
            if (r.empty()) r.assign(inst.table_size(), 0.0);
            row = &r;
        }
        for (std::size_t t = 0; t < values.size(); ++t)
            (*row)[inst.slot(vi->second, t)] += non_negative(values[t], ptr(ptr(ep, "values"), t));
    }
    return flat;
}

}  // namespace detail

inline Instance parse_instance(const nlohmann::json& j) {
    using namespace detail;
    only_keys(j, "", {"schema_version", "name", "coordinates", "horizon", "budget", "epsilon", "access_radius_km", "drone",
                      "vaccines", "nodes", "arcs", "demand", "central_supply", "unassigned_demand"});
    const int version = integer(need(j, "", "schema_version"), "/schema_version");
    if (version != kSchemaVersion)
        throw SchemaError("/schema_version", "unsupported schema version " + std::to_string(version));
    Instance inst;
    if (j.contains("name")) inst.name = string(j["name"], "/name");
    if (j.contains("coordinates")) {
        const std::string cs = string(j["coordinates"], "/coordinates");
        if (cs == "planar") inst.coordinates = CoordinateSystem::Planar;
        else if (cs == "geographic") inst.coordinates = CoordinateSystem::Geographic;
        else throw SchemaError("/coordinates", "expected \"planar\" or \"geographic\"");
    }
    inst.horizon = integer(need(j, "", "horizon"), "/horizon");
    if (inst.horizon <= 0) throw SchemaError("/horizon", "must be positive");
    inst.budget = non_negative(need(j, "", "budget"), "/budget");
    if (j.contains("epsilon")) inst.epsilon = number(j["epsilon"], "/epsilon");
    if (j.contains("access_radius_km")) inst.access_radius_km = number(j["access_radius_km"], "/access_radius_km");

    if (j.contains("drone")) {
        const json& d = j["drone"];
        only_keys(d, "/drone", {"preset", "name", "payload", "speed_kmh", "range_km", "unit_cost", "hours_per_period"});
        if (d.contains("preset")) {
            try {
                inst.drone = drone_preset(string(d["preset"], "/drone/preset"));
            } catch (const SchemaError&) {
                throw;
            } catch (const Error& e) {
                throw SchemaError("/drone/preset", e.what());
            }
        }
        if (d.contains("name")) inst.drone.name = string(d["name"], "/drone/name");
        if (d.contains("payload")) inst.drone.payload_cm3 = volume(d["payload"], "/drone/payload");
        if (d.contains("speed_kmh")) inst.drone.speed_kmh = number(d["speed_kmh"], "/drone/speed_kmh");
        if (d.contains("range_km")) inst.drone.range_km = number(d["range_km"], "/drone/range_km");
        if (d.contains("unit_cost")) inst.drone.unit_cost = number(d["unit_cost"], "/drone/unit_cost");
        if (d.contains("hours_per_period")) inst.drone.hours_per_period = number(d["hours_per_period"], "/drone/hours_per_period");
    }

    const json& vs = need(j, "", "vaccines");
    if (vs.is_string()) {
        if (vs.get<std::string>() != "default") throw SchemaError("/vaccines", "expected \"default\" or a list");
        inst.vaccines = default_vaccines();
    } else if (vs.is_array()) {
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const std::string at = ptr("/vaccines", i);
            const json& v = vs[i];
            only_keys(v, at, {"id", "doses_per_regimen", "dose_volume_cm3", "diluent_volume_cm3", "ovw_rate", "storage_mode", "vial_size"});
            Vaccine vac;
            vac.id = string(need(v, at, "id"), ptr(at, "id"));
            vac.doses_per_regimen = integer(need(v, at, "doses_per_regimen"), ptr(at, "doses_per_regimen"));
            if (vac.doses_per_regimen < 1) throw SchemaError(ptr(at, "doses_per_regimen"), "must be at least 1");
            vac.dose_volume_cm3 = volume(need(v, at, "dose_volume_cm3"), ptr(at, "dose_volume_cm3"));
            if (v.contains("diluent_volume_cm3")) vac.diluent_volume_cm3 = volume(v["diluent_volume_cm3"], ptr(at, "diluent_volume_cm3"));
            if (v.contains("vial_size")) vac.vial_size = integer(v["vial_size"], ptr(at, "vial_size"));
            vac.ovw_rate = v.contains("ovw_rate") ? number(v["ovw_rate"], ptr(at, "ovw_rate")) : estimate_ovw(vac.vial_size);
            if (v.contains("storage_mode")) {
                auto m = parse_storage_mode(string(v["storage_mode"], ptr(at, "storage_mode")));
                if (!m) throw SchemaError(ptr(at, "storage_mode"), "expected refrigerated, frozen or either");
                vac.storage_mode = *m;
            }
            inst.vaccines.push_back(std::move(vac));
        }
    } else {
        throw SchemaError("/vaccines", "expected \"default\" or a list");
    }
    const std::size_t L = inst.vaccines.size();
    std::map<std::string, std::size_t> vaccine_index;
    for (std::size_t l = 0; l < L; ++l)
        if (!vaccine_index.emplace(inst.vaccines[l].id, l).second)
            throw SchemaError(ptr("/vaccines", l), "duplicate vaccine id");

    const json& ns = need(j, "", "nodes");
    if (!ns.is_array()) throw SchemaError("/nodes", "expected an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const std::string at = ptr("/nodes", i);
        const json& n = ns[i];
        only_keys(n, at, {"id", "kind", "position", "storage_capacity", "hub_cost", "storage_wastage", "ovw_rate", "community"});
        Node node;
        node.id = string(need(n, at, "id"), ptr(at, "id"));
        if (!ids.insert(node.id).second) throw SchemaError(ptr(at, "id"), "duplicate node id '" + node.id + "'");
        const auto kind = parse_node_kind(string(need(n, at, "kind"), ptr(at, "kind")));
        if (!kind) throw SchemaError(ptr(at, "kind"), "unknown node kind");
        node.kind = *kind;
        const json& pos = need(n, at, "position");
        if (!pos.is_array() || pos.size() != 2) throw SchemaError(ptr(at, "position"), "expected [x, y]");
        node.position = {number(pos[0], ptr(ptr(at, "position"), 0)), number(pos[1], ptr(ptr(at, "position"), 1))};
        if (n.contains("storage_capacity")) {
            node.storage_capacity_cm3 = volume(n["storage_capacity"], ptr(at, "storage_capacity"));
            if (!has_cold_storage(node.kind) && node.storage_capacity_cm3 != 0.0)
                throw SchemaError(ptr(at, "storage_capacity"), "outreach posts and communities carry no inventory");
        } else if (has_cold_storage(node.kind)) {
            node.storage_capacity_cm3 = kUnlimited;
        }
        if (n.contains("hub_cost")) node.hub_cost = non_negative(n["hub_cost"], ptr(at, "hub_cost"));
        if (n.contains("storage_wastage")) node.storage_wastage = fractions(n["storage_wastage"], ptr(at, "storage_wastage"), L);
        if (n.contains("ovw_rate")) node.ovw_rate = fractions(n["ovw_rate"], ptr(at, "ovw_rate"), L);
        if (n.contains("community")) node.community = string(n["community"], ptr(at, "community"));
        inst.nodes.push_back(std::move(node));
    }
    for (std::size_t i = 0; i < inst.nodes.size(); ++i)
        if (inst.nodes[i].community && !inst.find(*inst.nodes[i].community))
            throw SchemaError(ptr(ptr("/nodes", i), "community"), "unknown community '" + *inst.nodes[i].community + "'");

    if (j.contains("arcs")) {
        const json& as = j["arcs"];
        if (!as.is_array()) throw SchemaError("/arcs", "expected an array");
        for (std::size_t i = 0; i < as.size(); ++i) {
            const std::string at = ptr("/arcs", i);
            const json& a = as[i];
            only_keys(a, at, {"kind", "from", "to", "distance_km", "transport_capacity", "transit_wastage"});
            Arc arc;
            const auto kind = parse_arc_kind(string(need(a, at, "kind"), ptr(at, "kind")));
            if (!kind) throw SchemaError(ptr(at, "kind"), "unknown arc kind");
            arc.kind = *kind;
            const std::string from = string(need(a, at, "from"), ptr(at, "from"));
            const std::string to = string(need(a, at, "to"), ptr(at, "to"));
            const auto fi = inst.find(from);
            const auto ti = inst.find(to);
            if (!fi) throw SchemaError(ptr(at, "from"), "unknown node '" + from + "'");
            if (!ti) throw SchemaError(ptr(at, "to"), "unknown node '" + to + "'");
            arc.from = *fi;
            arc.to = *ti;
            arc.distance_km = a.contains("distance_km") ? non_negative(a["distance_km"], ptr(at, "distance_km"))
                                                        : inst.distance(arc.from, arc.to);
            if (a.contains("transport_capacity")) {
                if (arc.kind != ArcKind::Land) throw SchemaError(ptr(at, "transport_capacity"), "only land arcs have a transport capacity");
                arc.transport_capacity_cm3 = volume(a["transport_capacity"], ptr(at, "transport_capacity"));
            }
            if (a.contains("transit_wastage")) {
                if (arc.kind == ArcKind::Access) throw SchemaError(ptr(at, "transit_wastage"), "access arcs carry no wastage");
                arc.transit_wastage = fractions(a["transit_wastage"], ptr(at, "transit_wastage"), L);
            }
            inst.arcs.push_back(std::move(arc));
        }
    }

    if (j.contains("demand")) table(j["demand"], "/demand", inst, vaccine_index, true, &inst.demand);
    if (j.contains("central_supply"))
        inst.central_supply = table(j["central_supply"], "/central_supply", inst, vaccine_index, false, nullptr);
    if (j.contains("unassigned_demand"))
        inst.unassigned_demand = table(j["unassigned_demand"], "/unassigned_demand", inst, vaccine_index, false, nullptr);

    const auto report = validate_instance(inst);
    if (!report.ok()) throw Error("instance '" + inst.name + "' is invalid:\n" + report.summary());
    return inst;
}

inline Instance parse_instance_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_instance(j);
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open instance file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_instance_text(ss.str());
}

// --------------------------------------------------------------------------
// Writing

namespace detail {

inline nlohmann::json volume_json(double v) {
    if (std::isinf(v)) return "unlimited";
    return v;
}

inline nlohmann::json table_json(const Instance& inst, const std::vector<double>& flat) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t l = 0; l < inst.vaccine_count(); ++l) {
        nlohmann::json values = nlohmann::json::array();
        for (std::size_t t = 0; t < inst.period_count(); ++t) values.push_back(flat[inst.slot(l, t)]);
        out.push_back({{"vaccine", inst.vaccines[l].id}, {"values", values}});
    }
    return out;
}

}  // namespace detail

inline nlohmann::json instance_to_json(const Instance& inst) {
    using nlohmann::json;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = inst.name;
    j["coordinates"] = std::string(to_string(inst.coordinates));
    j["horizon"] = inst.horizon;
    j["budget"] = inst.budget;
    j["epsilon"] = inst.epsilon;
    j["access_radius_km"] = inst.access_radius_km;
    j["drone"] = {{"name", inst.drone.name},
                  {"payload", inst.drone.payload_cm3},
                  {"speed_kmh", inst.drone.speed_kmh},
                  {"range_km", inst.drone.range_km},
                  {"unit_cost", inst.drone.unit_cost},
                  {"hours_per_period", inst.drone.hours_per_period}};
    json vs = json::array();
    for (const auto& v : inst.vaccines)
        vs.push_back({{"id", v.id},
                      {"doses_per_regimen", v.doses_per_regimen},
                      {"dose_volume_cm3", v.dose_volume_cm3},
                      {"diluent_volume_cm3", v.diluent_volume_cm3},
                      {"ovw_rate", v.ovw_rate},
                      {"storage_mode", std::string(to_string(v.storage_mode))},
                      {"vial_size", v.vial_size}});
    j["vaccines"] = vs;
    json ns = json::array();
    for (const auto& n : inst.nodes) {
        json o = {{"id", n.id}, {"kind", std::string(to_string(n.kind))}, {"position", {n.position.x, n.position.y}}};
        if (has_cold_storage(n.kind)) o["storage_capacity"] = detail::volume_json(n.storage_capacity_cm3);
        if (n.hub_cost) o["hub_cost"] = *n.hub_cost;
        if (!n.storage_wastage.empty()) o["storage_wastage"] = n.storage_wastage;
        if (!n.ovw_rate.empty()) o["ovw_rate"] = n.ovw_rate;
        if (n.community) o["community"] = *n.community;
        ns.push_back(std::move(o));
    }
    j["nodes"] = ns;
    json as = json::array();
    for (const auto& a : inst.arcs) {
        json o = {{"kind", std::string(to_string(a.kind))},
                  {"from", inst.nodes[a.from].id},
                  {"to", inst.nodes[a.to].id},
                  {"distance_km", a.distance_km}};
        if (a.kind == ArcKind::Land) o["transport_capacity"] = detail::volume_json(a.transport_capacity_cm3);
        if (!a.transit_wastage.empty()) o["transit_wastage"] = a.transit_wastage;
        as.push_back(std::move(o));
    }
    j["arcs"] = as;
    json dem = json::array();
    for (const auto& [node, row] : inst.demand)
        for (const auto& e : detail::table_json(inst, row)) {
            json entry = e;
            entry["node"] = inst.nodes[node].id;
            dem.push_back(std::move(entry));
        }
    j["demand"] = dem;
    if (!inst.central_supply.empty()) j["central_supply"] = detail::table_json(inst, inst.central_supply);
    if (!inst.unassigned_demand.empty()) j["unassigned_demand"] = detail::table_json(inst, inst.unassigned_demand);
    return j;
}

inline void write_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << instance_to_json(inst).dump(1) << '\n';
    out.flush();
    if (!out) throw Error("failed writing " + path);
}

/// A solution with entities named by id; only nonzero values are listed.
inline nlohmann::json solution_to_json(const Instance& inst, const Solution& s, double zero_tol = 1e-9) {
    using nlohmann::json;
    json j;
    j["status"] = std::string(to_string(s.status));
    j["objective"] = s.objective;
    j["bound"] = s.bound;
    j["gap"] = s.gap;
    j["drones"] = s.drones;
    json hubs = json::array();
    for (NodeIndex i = 0; i < inst.nodes.size() && i < s.hub_open.size(); ++i)
        if (s.hub_open[i]) hubs.push_back(inst.nodes[i].id);
    j["hubs"] = hubs;
    if (!s.has_value()) return j;
    const std::size_t L = inst.vaccine_count(), T = inst.period_count();
    json used = json::array();
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
        for (std::size_t t = 0; t < T; ++t)
            if (s.used(i, t) != 0) used.push_back({{"node", inst.nodes[i].id}, {"period", t}, {"drones", s.used(i, t)}});
    j["drones_used"] = used;
    json flows = json::array();
    for (ArcIndex a = 0; a < inst.arcs.size(); ++a)
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t t = 0; t < T; ++t) {
                const double v = s.flow(a, l, t);
                if (std::abs(v) <= zero_tol) continue;
                flows.push_back({{"kind", std::string(to_string(inst.arcs[a].kind))},
                                 {"from", inst.nodes[inst.arcs[a].from].id},
                                 {"to", inst.nodes[inst.arcs[a].to].id},
                                 {"vaccine", inst.vaccines[l].id},
                                 {"period", t},
                                 {"doses", v}});
            }
    j["flows"] = flows;
    json stock = json::array(), given = json::array();
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t t = 0; t < T; ++t) {
                const json key = {{"node", inst.nodes[i].id}, {"vaccine", inst.vaccines[l].id}, {"period", t}};
                if (std::abs(s.stock(i, l, t)) > zero_tol) {
                    json e = key;
                    e["doses"] = s.stock(i, l, t);
                    stock.push_back(std::move(e));
                }
                if (std::abs(s.given(i, l, t)) > zero_tol) {
                    json e = key;
                    e["doses"] = s.given(i, l, t);
                    given.push_back(std::move(e));
                }
            }
    j["inventory"] = stock;
    j["administered"] = given;
    json immunized = json::object();
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i)
        if (std::abs(s.immunized[i]) > zero_tol) immunized[inst.nodes[i].id] = s.immunized[i];
    j["immunized"] = immunized;
    json receipts = json::array();
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t t = 0; t < T; ++t)
            if (std::abs(s.receipts[inst.slot(l, t)]) > zero_tol)
                receipts.push_back({{"vaccine", inst.vaccines[l].id}, {"period", t}, {"doses", s.receipts[inst.slot(l, t)]}});
    j["receipts"] = receipts;
    return j;
}

}  // namespace vaxnet
