#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "vaxnet/formulation.hpp"
#include "vaxnet/instance_io.hpp"
#include "vaxnet/metrics.hpp"
#include "vaxnet/model.hpp"
#include "vaxnet/preprocess.hpp"
#include "vaxnet/report.hpp"

namespace vaxnet {

enum class AccessMode { Full, Limited };

inline std::string_view to_string(AccessMode m) { return m == AccessMode::Full ? "full" : "limited"; }

/// One solve of one network variant.
struct Scenario {
    std::string key;
    AccessMode access = AccessMode::Limited;
    bool outreach = true;  // false: clinics only, no drones (baseline network)
    double budget = 0.0;
    std::optional<std::string> drone_preset;
    std::optional<double> payload_cm3;
    std::optional<double> range_km;
    double tc_multiplier = 1.0;
    double sc_multiplier = 1.0;
    double demand_multiplier = 1.0;
    ModelKind model = ModelKind::Q;
    std::vector<std::string> hub_candidates;  // Qbar only, node ids
    std::vector<std::string> fixed_hubs;      // Qbar only, node ids
    std::set<std::string> unlimited_storage;  // node ids
};

struct ExperimentOptions {
    milp::SolveOptions solve;
    PreprocessOptions pre;
    ModelKind model = ModelKind::Q;
    int threads = 0;               // 0: VAXNET_THREADS, else hardware concurrency
    bool include_runtime = false;  // runtimes make reports non-reproducible
};

struct ScenarioResult {
    Scenario scenario;
    SolveStatus status = SolveStatus::NoSolution;
    double objective = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    double sr_community = 0.0;
    double sr_clinic = 0.0;
    double fic = 0.0;
    long drones = 0;
    std::vector<std::string> hubs;
    long nodes = 0;
    double runtime_s = 0.0;
    std::string message;
    Instance network;
    Solution solution;
};

// --------------------------------------------------------------------------
// Parallel map

inline int experiment_threads(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("VAXNET_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Calls fn(i) for i in [0, n) on up to `threads` workers; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, int threads, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(n))));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

// --------------------------------------------------------------------------
// Scenario execution

/// The instance with the scenario's budget, drone and multipliers applied.
inline Instance apply_scenario(const Instance& base, const Scenario& sc) {
    if (!(sc.tc_multiplier > 0.0 && sc.sc_multiplier > 0.0 && sc.demand_multiplier > 0.0))
        throw Error("scenario multipliers must be positive");
    Instance inst = base;
    inst.budget = sc.outreach ? sc.budget : 0.0;
    bool drone_changed = false;
    if (sc.drone_preset) {
        inst.drone = drone_preset(*sc.drone_preset);
        drone_changed = true;
    }
    if (sc.payload_cm3) inst.drone.payload_cm3 = *sc.payload_cm3;
    if (sc.range_km) {
        inst.drone.range_km = *sc.range_km;
        drone_changed = true;
    }
    if (drone_changed) rebuild_drone_arcs(inst);
    for (Arc& a : inst.arcs)
        if (a.kind == ArcKind::Land && std::isfinite(a.transport_capacity_cm3)) a.transport_capacity_cm3 *= sc.tc_multiplier;
    for (Node& n : inst.nodes)
        if (has_cold_storage(n.kind) && std::isfinite(n.storage_capacity_cm3)) n.storage_capacity_cm3 *= sc.sc_multiplier;
    for (const auto& id : sc.unlimited_storage) {
        const auto i = inst.find(id);
        if (!i) throw Error("unknown node '" + id + "' in scenario " + sc.key);
        inst.nodes[*i].storage_capacity_cm3 = kUnlimited;
    }
    if (sc.demand_multiplier != 1.0) {
        for (auto& [node, row] : inst.demand)
            for (double& v : row) v *= sc.demand_multiplier;
        for (double& v : inst.central_supply) v *= sc.demand_multiplier;
        for (double& v : inst.unassigned_demand) v *= sc.demand_multiplier;
    }
    return inst;
}

namespace detail {

/// Clinics only: Limited keeps access arcs to clinics within the radius,
/// Full spreads each community's demand evenly over every clinic.
inline Instance baseline_network(const Instance& inst, AccessMode mode, const PreprocessOptions& pre) {
    Instance base = inst;
    if (base.central_supply.empty()) base.central_supply = default_central_supply(inst);
    std::erase_if(base.arcs, [](const Arc& a) { return a.kind == ArcKind::Drone; });
    if (mode == AccessMode::Limited) {
        const auto ind = build_access_indicator(base, pre.radius_km);
        OutreachSelection none;
        none.selected.assign(ind.candidates.size(), 0);
        return attach_outreach_posts(base, ind, none, pre);
    }
    std::vector<NodeIndex> clinics;
    for (NodeIndex i = 0; i < base.nodes.size(); ++i)
        if (base.nodes[i].kind == NodeKind::Clinic) clinics.push_back(i);
    if (clinics.empty()) throw Error("full-access baseline needs at least one clinic");
    std::map<NodeIndex, std::vector<double>> agg;
    const double share = 1.0 / static_cast<double>(clinics.size());
    for (const auto& [k, row] : base.demand)
        for (NodeIndex c : clinics) {
            auto& dst = agg[c];
            if (dst.empty()) dst.assign(row.size(), 0.0);
            for (std::size_t s = 0; s < row.size(); ++s) dst[s] += row[s] * share;
        }
    std::erase_if(base.arcs, [](const Arc& a) { return a.kind == ArcKind::Access; });
    return build_reduced_network(base, agg);
}

inline double clinic_sr(const Solution& s, const Instance& net) {
    const auto table = compute_supply_ratio(s, net, SrLevel::Center);
    double given = 0.0, wanted = 0.0;
    for (const auto& row : table.rows) {
        const auto i = net.find(row.unit);
        if (!i || net.nodes[*i].kind != NodeKind::Clinic) continue;
        given += row.administered;
        wanted += row.demanded;
    }
    return wanted > 0.0 ? given / wanted : 1.0;
}

inline std::set<NodeIndex> ids_to_nodes(const Instance& net, const std::vector<std::string>& ids) {
    std::set<NodeIndex> out;
    for (const auto& id : ids) {
        const auto i = net.find(id);
        if (!i) throw Error("unknown hub node '" + id + "'");
        out.insert(*i);
    }
    return out;
}

}  // namespace detail

inline ScenarioResult run_scenario(const Instance& base, const Scenario& sc, const ExperimentOptions& opt = {}) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioResult r;
    r.scenario = sc;
    const Instance inst = apply_scenario(base, sc);
    ModelKind kind = sc.model;
    if (!sc.outreach) {
        r.network = detail::baseline_network(inst, sc.access, opt.pre);
        kind = r.network.has_community_demand() ? ModelKind::P : ModelKind::Q;
    } else {
        auto pre = preprocess(inst, opt.pre);
        r.network = kind == ModelKind::P ? std::move(pre.community_network) : std::move(pre.reduced);
    }
    ModelBuild mb;
    if (kind == ModelKind::P) {
        mb = build_model_P(r.network);
    } else if (kind == ModelKind::Q) {
        mb = build_model_Q(r.network);
    } else {
        const auto cands = detail::ids_to_nodes(r.network, sc.hub_candidates);
        const auto fixed = detail::ids_to_nodes(r.network, sc.fixed_hubs);
        mb = build_model_Q_restricted(r.network, cands, fixed);
    }
    milp::SolveResult raw;
    r.solution = solve_model(r.network, mb, opt.solve, &raw);
    r.status = r.solution.status;
    r.nodes = raw.nodes;
    if (mb.infeasible) r.message = *mb.infeasible;
    if (r.solution.has_value()) {
        r.objective = r.solution.objective;
        r.bound = r.solution.bound;
        r.gap = r.solution.gap;
        r.sr_community = compute_supply_ratio(r.solution, r.network, SrLevel::Region).total.sr;
        r.sr_clinic = detail::clinic_sr(r.solution, r.network);
        r.fic = compute_fic(r.solution, r.network).proportion;
        r.drones = r.solution.drones;
        for (NodeIndex i = 0; i < r.network.nodes.size(); ++i)
            if (r.solution.hub_open[i]) r.hubs.push_back(r.network.nodes[i].id);
    }
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

inline std::vector<ScenarioResult> run_scenarios(const Instance& base, const std::vector<Scenario>& scenarios,
                                                 const ExperimentOptions& opt = {}) {
    return parallel_map<ScenarioResult>(scenarios.size(), experiment_threads(opt.threads),
                                        [&](std::size_t i) { return run_scenario(base, scenarios[i], opt); });
}

inline void add_result_rows(ExperimentReport& report, const ScenarioResult& r, bool include_runtime = false) {
    const std::string& key = r.scenario.key;
    report.add(key, "status", "-", static_cast<double>(r.status), std::string(to_string(r.status)) +
                                                                      (r.message.empty() ? "" : ": " + r.message));
    if (!r.solution.has_value()) return;
    std::string hubs;
    for (const auto& h : r.hubs) hubs += (hubs.empty() ? "" : ";") + h;
    report.add(key, "objective", "-", r.objective);
    report.add(key, "gap", "fraction", r.gap);
    report.add(key, "sr_community", "fraction", r.sr_community);
    report.add(key, "sr_clinic", "fraction", r.sr_clinic);
    report.add(key, "fic", "fraction", r.fic);
    report.add(key, "drones", "count", static_cast<double>(r.drones));
    report.add(key, "hubs", "count", static_cast<double>(r.hubs.size()), hubs);
    report.add(key, "bb_nodes", "count", static_cast<double>(r.nodes));
    if (include_runtime) report.add(key, "runtime", "s", r.runtime_s);
}

inline ExperimentReport report_of(const std::string& title, const std::vector<ScenarioResult>& results,
                                  bool include_runtime = false) {
    ExperimentReport report;
    report.title = title;
    for (const auto& r : results) add_result_rows(report, r, include_runtime);
    report.sort();
    return report;
}

// --------------------------------------------------------------------------
// Experiment classes

struct BaselineResult {
    ScenarioResult result;
    ExperimentReport report;
};

/// No drones and no outreach; budget forced to zero.
inline BaselineResult run_baseline(const Instance& inst, AccessMode mode, const ExperimentOptions& opt = {}) {
    Scenario sc;
    sc.key = std::string("baseline_") + std::string(to_string(mode));
    sc.access = mode;
    sc.outreach = false;
    sc.model = mode == AccessMode::Limited ? ModelKind::P : ModelKind::Q;
    BaselineResult out;
    out.result = run_scenario(inst, sc, opt);
    out.report = report_of("baseline", {out.result}, opt.include_runtime);
    return out;
}

struct CapacitySweepResult {
    std::vector<ScenarioResult> cells;
    std::vector<std::string> bottlenecks;  // clinics given unlimited storage
    ExperimentReport report;
};

/// Peak storage utilisation of each capacitated clinic in a solved network.
inline std::map<std::string, double> clinic_storage_utilization(const Solution& s, const Instance& net) {
    std::map<std::string, double> out;
    for (NodeIndex i = 0; i < net.nodes.size(); ++i) {
        const Node& n = net.nodes[i];
        if (n.kind != NodeKind::Clinic || !std::isfinite(n.storage_capacity_cm3) || n.storage_capacity_cm3 <= 0.0) continue;
        double peak = 0.0;
        for (std::size_t t = 0; t < net.period_count(); ++t) {
            double vol = 0.0;
            for (std::size_t l = 0; l < net.vaccine_count(); ++l) {
                double held = s.stock(i, l, t);
                for (ArcIndex a = 0; a < net.arcs.size(); ++a) {
                    const Arc& arc = net.arcs[a];
                    if (arc.to != i) continue;
                    const double keep = 1.0 - net.transit_wastage(a, l);
                    if (arc.kind == ArcKind::Land && t > 0) held += keep * s.flow(a, l, t - 1);
                    if (arc.kind == ArcKind::Drone) held += keep * s.flow(a, l, t);
                }
                vol += net.vaccines[l].dose_volume_cm3 * held;
            }
            peak = std::max(peak, vol / n.storage_capacity_cm3);
        }
        out[n.id] = peak;
    }
    return out;
}

/// Limited-access baseline over a grid of transport and storage multipliers.
/// With `bottleneck_unlimited`, the clinics whose storage saturates in the
/// unscaled baseline get unlimited storage in every cell.
inline CapacitySweepResult run_capacity_sweep(const Instance& inst, const std::vector<double>& tc_levels,
                                              const std::vector<double>& sc_levels, bool bottleneck_unlimited,
                                              const ExperimentOptions& opt = {}) {
    CapacitySweepResult out;
    if (bottleneck_unlimited) {
        const auto base = run_baseline(inst, AccessMode::Limited, opt);
        if (base.result.solution.has_value()) {
            const auto util = clinic_storage_utilization(base.result.solution, base.result.network);
            double peak = 0.0;
            for (const auto& [id, u] : util) peak = std::max(peak, u);
            for (const auto& [id, u] : util)
                if (u >= 0.99 || (peak > 0.0 && u >= peak - 1e-9)) out.bottlenecks.push_back(id);
        }
    }
    std::vector<Scenario> cells;
    for (double tc : tc_levels)
        for (double sc : sc_levels) {
            Scenario s;
            char key[96];
            std::snprintf(key, sizeof key, "sweep_tc%.3g_sc%.3g%s", tc, sc, bottleneck_unlimited ? "_bottleneck" : "");
            s.key = key;
            s.outreach = false;
            s.model = ModelKind::P;
            s.tc_multiplier = tc;
            s.sc_multiplier = sc;
            s.unlimited_storage.insert(out.bottlenecks.begin(), out.bottlenecks.end());
            cells.push_back(std::move(s));
        }
    out.cells = run_scenarios(inst, cells, opt);
    out.report = report_of("capacity_sweep", out.cells, opt.include_runtime);
    if (!out.bottlenecks.empty()) {
        for (const auto& c : out.cells) {
            if (!c.solution.has_value()) continue;
            const auto table = compute_supply_ratio(c.solution, c.network, SrLevel::Center);
            double given = 0.0, wanted = 0.0;
            for (const auto& row : table.rows)
                if (std::find(out.bottlenecks.begin(), out.bottlenecks.end(), row.unit) != out.bottlenecks.end()) {
                    given += row.administered;
                    wanted += row.demanded;
                }
            out.report.add(c.scenario.key, "sr_bottleneck_clinics", "fraction", wanted > 0.0 ? given / wanted : 1.0);
        }
        out.report.sort();
    }
    return out;
}

struct GridResult {
    std::vector<ScenarioResult> cells;  // budget-major order
    ExperimentReport report;
};

inline GridResult run_budget_range_grid(const Instance& inst, const std::vector<double>& budgets,
                                        const std::vector<std::string>& presets, const ExperimentOptions& opt = {}) {
    std::vector<Scenario> cells;
    for (double b : budgets)
        for (const auto& p : presets) {
            drone_preset(p);  // fail early on unknown names
            Scenario s;
            char key[96];
            std::snprintf(key, sizeof key, "grid_b%09.0f_%s", b, p.c_str());
            s.key = key;
            s.budget = b;
            s.drone_preset = p;
            s.model = opt.model;
            cells.push_back(std::move(s));
        }
    GridResult out;
    out.cells = run_scenarios(inst, cells, opt);
    out.report = report_of("budget_range_grid", out.cells, opt.include_runtime);
    return out;
}

// --------------------------------------------------------------------------
// Fractional factorial design

struct DoeFactor {
    std::string name;  // budget, payload, range, tc, sc or demand
    std::vector<double> levels;
};

/// Budget, payload (cm3), range, transport and storage multipliers, demand multiplier.
inline std::vector<DoeFactor> default_doe_factors() {
    return {{"budget", {2e6, 4e6}}, {"payload", {1000.0, 2000.0}}, {"range", {30.0, 75.0}},
            {"tc", {1.0, 2.0}},     {"sc", {1.0, 2.0}},            {"demand", {1.0, 1.25}}};
}

/// The 16-run resolution IV design: A..D full factorial, E = ABC, F = BCD.
/// Entries are -1 (low) and +1 (high).
inline std::array<std::array<int, 6>, 16> fractional_factorial_design() {
    std::array<std::array<int, 6>, 16> d{};
    for (int run = 0; run < 16; ++run) {
        int a = (run & 1) ? 1 : -1, b = (run & 2) ? 1 : -1, c = (run & 4) ? 1 : -1, dd = (run & 8) ? 1 : -1;
        d[static_cast<std::size_t>(run)] = {a, b, c, dd, a * b * c, b * c * dd};
    }
    return d;
}

/// Main effects: mean response at the high level minus mean at the low level.
inline std::array<double, 6> main_effects(const std::array<std::array<int, 6>, 16>& design,
                                          const std::vector<double>& response) {
    if (response.size() != design.size()) throw Error("one response per design run is required");
    std::array<double, 6> eff{};
    for (std::size_t f = 0; f < 6; ++f) {
        double hi = 0.0, lo = 0.0;
        int nh = 0, nl = 0;
        for (std::size_t r = 0; r < design.size(); ++r) {
            if (design[r][f] > 0) {
                hi += response[r];
                ++nh;
            } else {
                lo += response[r];
                ++nl;
            }
        }
        eff[f] = hi / nh - lo / nl;
    }
    return eff;
}

struct DoeResult {
    std::vector<DoeFactor> factors;
    std::array<std::array<int, 6>, 16> design{};
    std::vector<ScenarioResult> runs;
    std::vector<double> response;  // community SR per run
    std::array<double, 6> effects{};
    std::vector<std::string> ranking;  // factor names by decreasing |effect|
    ExperimentReport report;
};

inline DoeResult run_fractional_factorial(const Instance& inst, const std::vector<DoeFactor>& factors,
                                          const ExperimentOptions& opt = {}) {
    static const std::set<std::string> known{"budget", "payload", "range", "tc", "sc", "demand"};
    if (factors.size() != 6) throw Error("the design needs exactly six factors");
    std::set<std::string> seen;
    for (const auto& f : factors) {
        if (!known.count(f.name)) throw Error("unknown factor '" + f.name + "'");
        if (!seen.insert(f.name).second) throw Error("factor '" + f.name + "' appears twice");
        if (f.levels.size() != 2 || f.levels[0] == f.levels[1])
            throw Error("factor '" + f.name + "' needs exactly two distinct levels");
    }
    DoeResult out;
    out.factors = factors;
    out.design = fractional_factorial_design();
    std::vector<Scenario> runs;
    for (std::size_t r = 0; r < out.design.size(); ++r) {
        Scenario s;
        char key[32];
        std::snprintf(key, sizeof key, "doe_%02zu", r + 1);
        s.key = key;
        s.model = opt.model;
        for (std::size_t f = 0; f < 6; ++f) {
            const double v = factors[f].levels[out.design[r][f] > 0 ? 1 : 0];
            const std::string& n = factors[f].name;
            if (n == "budget") s.budget = v;
            else if (n == "payload") s.payload_cm3 = v;
            else if (n == "range") s.range_km = v;
            else if (n == "tc") s.tc_multiplier = v;
            else if (n == "sc") s.sc_multiplier = v;
            else s.demand_multiplier = v;
        }
        if (!s.range_km) s.range_km = inst.drone.range_km;  // rebuilds drone arcs for the payload too
        runs.push_back(std::move(s));
    }
    out.runs = run_scenarios(inst, runs, opt);
    for (const auto& r : out.runs) out.response.push_back(r.sr_community);
    out.effects = main_effects(out.design, out.response);
    std::vector<std::size_t> order(6);
    for (std::size_t f = 0; f < 6; ++f) order[f] = f;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(out.effects[a]) > std::abs(out.effects[b]); });
    for (std::size_t f : order) out.ranking.push_back(factors[f].name);
    out.report = report_of("fractional_factorial", out.runs, opt.include_runtime);
    for (std::size_t rank = 0; rank < 6; ++rank) {
        const std::size_t f = order[rank];
        out.report.add("effects", "effect_" + factors[f].name, "fraction", out.effects[f], "rank " + std::to_string(rank + 1));
    }
    out.report.sort();
    return out;
}

// --------------------------------------------------------------------------
// Sequential expansion

struct ExpansionStage {
    std::string preset;
    double budget = 0.0;
    ScenarioResult sequential;
    ScenarioResult optimal;
    bool feasible = false;
    double gap_pct = 0.0;     // on the optimised objective
    double sr_gap_pct = 0.0;  // on community SR, informational
};

struct ExpansionResult {
    std::vector<ExpansionStage> stages;
    ExperimentReport report;
};

/// Stage-wise Qbar over regional-centre candidates, carrying opened hubs
/// forward, against unrestricted Q at each stage's budget.
inline ExpansionResult run_sequential_expansion(const Instance& inst, const std::vector<double>& budget_schedule,
                                                const std::vector<std::string>& presets, const ExperimentOptions& opt = {}) {
    for (std::size_t s = 1; s < budget_schedule.size(); ++s)
        if (!(budget_schedule[s] > budget_schedule[s - 1])) throw Error("budget schedule must be strictly increasing");
    std::vector<std::string> candidates;
    for (const Node& n : inst.nodes)
        if (n.kind == NodeKind::RegionalCenter && n.hub_cost) candidates.push_back(n.id);

    // Unrestricted arm first: stages are independent of each other.
    std::vector<Scenario> unrestricted;
    for (const auto& p : presets)
        for (double b : budget_schedule) {
            Scenario s;
            char key[96];
            std::snprintf(key, sizeof key, "expand_%s_b%09.0f_q", p.c_str(), b);
            s.key = key;
            s.budget = b;
            s.drone_preset = p;
            s.model = ModelKind::Q;
            unrestricted.push_back(std::move(s));
        }
    const auto optimal = run_scenarios(inst, unrestricted, opt);

    // Sequential arm: each preset is a chain; chains run in parallel.
    auto chains = parallel_map<std::vector<ScenarioResult>>(
        presets.size(), experiment_threads(opt.threads), [&](std::size_t pi) {
            std::vector<ScenarioResult> chain;
            std::vector<std::string> opened;
            for (double b : budget_schedule) {
                Scenario s;
                char key[96];
                std::snprintf(key, sizeof key, "expand_%s_b%09.0f_seq", presets[pi].c_str(), b);
                s.key = key;
                s.budget = b;
                s.drone_preset = presets[pi];
                s.model = ModelKind::Qbar;
                s.hub_candidates = candidates;
                s.fixed_hubs = opened;
                auto r = run_scenario(inst, s, opt);
                if (r.solution.has_value()) opened = r.hubs;
                chain.push_back(std::move(r));
            }
            return chain;
        });

    ExpansionResult out;
    for (std::size_t pi = 0; pi < presets.size(); ++pi)
        for (std::size_t s = 0; s < budget_schedule.size(); ++s) {
            ExpansionStage st;
            st.preset = presets[pi];
            st.budget = budget_schedule[s];
            st.sequential = chains[pi][s];
            st.optimal = optimal[pi * budget_schedule.size() + s];
            st.feasible = st.sequential.solution.has_value() && st.optimal.solution.has_value();
            if (st.feasible) {
                const double zq = st.optimal.objective, zs = st.sequential.objective;
                st.gap_pct = zq > 0.0 ? 100.0 * (zq - zs) / zq : 0.0;
                const double sq = st.optimal.sr_community, ss = st.sequential.sr_community;
                st.sr_gap_pct = sq > 0.0 ? 100.0 * (sq - ss) / sq : 0.0;
            }
            out.stages.push_back(std::move(st));
        }

    std::vector<ScenarioResult> all = optimal;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    out.report = report_of("sequential_expansion", all, opt.include_runtime);
    for (const auto& st : out.stages) {
        char key[96];
        std::snprintf(key, sizeof key, "expand_%s_b%09.0f_gap", st.preset.c_str(), st.budget);
        if (!st.feasible) {
            out.report.add(key, "gap_pct", "%", 0.0, "stage infeasible: " + st.sequential.message);
            continue;
        }
        out.report.add(key, "gap_pct", "%", st.gap_pct);
        out.report.add(key, "sr_gap_pct", "%", st.sr_gap_pct);
    }
    out.report.sort();
    return out;
}

}  // namespace vaxnet
