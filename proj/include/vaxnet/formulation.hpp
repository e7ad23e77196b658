#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vaxnet/milp/branch_and_bound.hpp"
#include "vaxnet/milp/problem.hpp"
#include "vaxnet/model.hpp"

namespace vaxnet {

using milp::Domain;
using milp::MilpProblem;
using milp::RowSense;
using milp::Term;

/// Bijection between semantic variable tuples and column indices.
class VarMap {
public:
    using Index = std::array<int, 4>;
    struct Key {
        char tag = '?';
        Index idx{-1, -1, -1, -1};
        auto operator<=>(const Key&) const = default;
    };

    int add(char tag, Index idx, int column) {
        const Key k{tag, idx};
        if (!columns_.emplace(k, column).second) throw Error(std::string("duplicate variable ") + tag);
        if (static_cast<std::size_t>(column) >= keys_.size()) keys_.resize(static_cast<std::size_t>(column) + 1);
        keys_[static_cast<std::size_t>(column)] = k;
        return column;
    }

    std::optional<int> find(char tag, Index idx) const {
        auto it = columns_.find(Key{tag, idx});
        if (it == columns_.end()) return std::nullopt;
        return it->second;
    }

    const Key& key(int column) const { return keys_.at(static_cast<std::size_t>(column)); }
    std::size_t size() const { return keys_.size(); }
    std::size_t count(char tag) const {
        std::size_t n = 0;
        for (const auto& k : keys_)
            if (k.tag == tag) ++n;
        return n;
    }

    bool operator==(const VarMap&) const = default;

private:
    std::map<Key, int> columns_;
    std::vector<Key> keys_;
};

enum class ModelKind { P, Q, Qbar, SetCover };

inline std::string_view to_string(ModelKind k) {
    switch (k) {
    case ModelKind::P: return "P";
    case ModelKind::Q: return "Q";
    case ModelKind::Qbar: return "Qbar";
    case ModelKind::SetCover: return "set_cover";
    }
    return "?";
}

struct FormulationOptions {
    std::optional<std::set<NodeIndex>> hub_candidates;  // default: every node with a hub cost
    std::set<NodeIndex> fixed_hubs;                     // forced open, cost charged to the budget
    double sunk_budget = 0.0;                           // subtracted from the budget row
    bool require_hub = false;                           // at least one hub must open
    int periods_per_relocation = 0;                     // > 0: V constant within each block
};

struct ModelBuild {
    ModelKind kind = ModelKind::P;
    MilpProblem problem;
    VarMap vars;
    std::optional<std::string> infeasible;  // detected before any solve
    std::vector<std::string> warnings;
};

namespace detail {

inline int ix(std::size_t v) { return static_cast<int>(v); }

inline std::string column_name(char tag, std::initializer_list<std::size_t> idx) {
    std::string s(1, tag);
    for (std::size_t v : idx) s += "_" + std::to_string(v);
    return s;
}

/// Eligible hub set after the presolve: candidates whose cost fits the budget.
inline std::vector<NodeIndex> eligible_hubs(const Instance& inst, const FormulationOptions& opt, double budget) {
    std::vector<NodeIndex> hubs;
    for (NodeIndex i = 0; i < inst.nodes.size(); ++i) {
        const Node& n = inst.nodes[i];
        if (!n.hub_cost || !has_cold_storage(n.kind)) continue;
        if (opt.fixed_hubs.count(i)) {
            hubs.push_back(i);
            continue;
        }
        if (opt.hub_candidates && !opt.hub_candidates->count(i)) continue;
        if (*n.hub_cost <= budget + 1e-9) hubs.push_back(i);
    }
    return hubs;
}

inline ModelBuild build_network_model(const Instance& inst, ModelKind kind, const FormulationOptions& opt) {
    {
        const auto report = validate_instance(inst);
        if (!report.ok()) throw Error("invalid instance:\n" + report.summary());
    }
    const bool aggregated = kind != ModelKind::P;
    if (aggregated) {
        for (const Arc& a : inst.arcs)
            if (a.kind == ArcKind::Access) throw Error("models Q and Qbar need an aggregated instance without access arcs");
        if (inst.has_community_demand()) throw Error("models Q and Qbar need demand attached to vaccination centres");
    } else if (inst.has_demand_on_centers()) {
        throw Error("model P needs community-level demand; use model Q on aggregated instances");
    }

    ModelBuild mb;
    mb.kind = kind;
    mb.problem.name = std::string("model_") + std::string(to_string(kind));
    MilpProblem& p = mb.problem;
    VarMap& vm = mb.vars;
    const std::size_t L = inst.vaccine_count();
    const std::size_t T = inst.period_count();
    const std::size_t n = inst.nodes.size();
    const double budget = inst.budget - opt.sunk_budget;
    const long m = inst.max_drones();
    const DroneSpec& drone = inst.drone;

    for (NodeIndex f : opt.fixed_hubs) {
        if (f >= n || !inst.nodes[f].hub_cost) throw Error("fixed hub " + std::to_string(f) + " is not a hub candidate");
        if (opt.hub_candidates && !opt.hub_candidates->count(f)) throw Error("fixed hubs must be among the candidates");
    }
    double fixed_cost = 0.0;
    for (NodeIndex f : opt.fixed_hubs) fixed_cost += *inst.nodes[f].hub_cost;
    if (fixed_cost > budget + 1e-9)
        mb.infeasible = "cost of fixed hubs (" + std::to_string(fixed_cost) + ") exceeds the budget (" + std::to_string(budget) + ")";

    // ---- planning variables
    const auto hubs = eligible_hubs(inst, opt, budget);
    std::vector<char> is_hub(n, 0);
    for (NodeIndex i : hubs) {
        is_hub[i] = 1;
        const bool fixed = opt.fixed_hubs.count(i) > 0;
        vm.add('Y', {ix(i), -1, -1, -1},
               p.add_variable(column_name('Y', {i}), Domain::Binary, fixed ? 1.0 : 0.0, 1.0));
    }
    const bool fleet = m >= 1 && !hubs.empty();
    if (fleet) {
        vm.add('Z', {-1, -1, -1, -1}, p.add_variable("Z", Domain::Integer, 0.0, static_cast<double>(m)));
        for (NodeIndex i : hubs)
            for (std::size_t t = 0; t < T; ++t)
                vm.add('V', {ix(i), ix(t), -1, -1},
                       p.add_variable(column_name('V', {i, t}), Domain::Integer, 0.0, static_cast<double>(m)));
    }

    // ---- flows
    for (NodeIndex i = 0; i < n; ++i) {
        if (!has_cold_storage(inst.nodes[i].kind)) continue;
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t t = 0; t < T; ++t)
                vm.add('I', {ix(i), ix(l), ix(t), -1}, p.add_variable(column_name('I', {i, l, t}), Domain::Continuous));
    }
    const NodeIndex cs = inst.central_store();
    const auto supply = effective_central_supply(inst);
    double supply_total = 0.0;
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t t = 0; t < T; ++t) {
            const double s = supply[inst.slot(l, t)];
            supply_total += s;
            if (s > 0.0)
                vm.add('R', {ix(l), ix(t), -1, -1}, p.add_variable(column_name('R', {l, t}), Domain::Continuous, 0.0, s));
        }
    double demand_total = 0.0;
    for (const auto& [node, row] : inst.demand)
        for (double v : row) demand_total += v;
    if (supply_total <= 0.0 && demand_total > 0.0)
        mb.warnings.push_back("no central supply while demand is positive: the optimum is trivially zero");

    for (ArcIndex a = 0; a < inst.arcs.size(); ++a) {
        const Arc& arc = inst.arcs[a];
        if (arc.kind == ArcKind::Land) {
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t t = 0; t < T; ++t)
                    vm.add('S', {ix(arc.from), ix(arc.to), ix(l), ix(t)},
                           p.add_variable(column_name('S', {arc.from, arc.to, l, t}), Domain::Continuous));
        } else if (arc.kind == ArcKind::Drone) {
            if (!fleet || !is_hub[arc.from]) continue;  // presolve: no hub, no drone flow
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t t = 0; t < T; ++t)
                    vm.add('D', {ix(arc.from), ix(arc.to), ix(l), ix(t)},
                           p.add_variable(column_name('D', {arc.from, arc.to, l, t}), Domain::Continuous));
        }
    }

    // X and N. In P, X lives on access arcs; in Q on the centres themselves.
    std::map<std::pair<NodeIndex, std::size_t>, std::vector<int>> x_of_demand;  // (demand node, l) -> X columns
    std::map<std::pair<NodeIndex, std::size_t>, std::vector<std::pair<int, std::size_t>>> x_at_center;  // (centre, l) -> (col, t)
    if (!aggregated) {
        for (const Arc& arc : inst.arcs) {
            if (arc.kind != ArcKind::Access) continue;
            const NodeIndex k = arc.from, i = arc.to;
            for (std::size_t l = 0; l < L; ++l) {
                if (inst.horizon_demand(k, l) <= 0.0) continue;  // presolve: demand row forces zero
                for (std::size_t t = 0; t < T; ++t) {
                    const int c = vm.add('X', {ix(i), ix(k), ix(l), ix(t)},
                                         p.add_variable(column_name('X', {i, k, l, t}), Domain::Continuous));
                    p.objective[static_cast<std::size_t>(c)] = inst.epsilon;
                    x_of_demand[{k, l}].push_back(c);
                    x_at_center[{i, l}].push_back({c, t});
                }
            }
        }
    } else {
        for (const auto& [i, row] : inst.demand) {
            for (std::size_t l = 0; l < L; ++l) {
                if (inst.horizon_demand(i, l) <= 0.0) continue;
                for (std::size_t t = 0; t < T; ++t) {
                    const int c = vm.add('X', {ix(i), ix(l), ix(t), -1},
                                         p.add_variable(column_name('X', {i, l, t}), Domain::Continuous));
                    p.objective[static_cast<std::size_t>(c)] = inst.epsilon;
                    x_of_demand[{i, l}].push_back(c);
                    x_at_center[{i, l}].push_back({c, t});
                }
            }
        }
    }
    std::vector<NodeIndex> demand_nodes;
    for (const auto& [k, row] : inst.demand) {
        bool any = false;
        for (std::size_t l = 0; l < L; ++l) any = any || inst.horizon_demand(k, l) > 0.0;
        if (!any) continue;
        demand_nodes.push_back(k);
        const int c = vm.add('N', {ix(k), -1, -1, -1}, p.add_variable(column_name('N', {k}), Domain::Continuous));
        p.objective[static_cast<std::size_t>(c)] = 1.0;
    }

    auto col = [&](char tag, VarMap::Index idx) { return vm.find(tag, idx); };

    // ---- planning rows
    if (!hubs.empty()) {
        std::vector<Term> terms;
        for (NodeIndex i : hubs) terms.push_back({*col('Y', {ix(i), -1, -1, -1}), *inst.nodes[i].hub_cost});
        if (fleet) terms.push_back({*col('Z', {-1, -1, -1, -1}), drone.unit_cost});
        p.add_row("budget", terms, RowSense::LessEqual, budget);
    }
    if (fleet) {
        for (NodeIndex i : hubs)
            for (std::size_t t = 0; t < T; ++t)
                p.add_row("hub_link_" + std::to_string(i) + "_" + std::to_string(t),
                          {{*col('V', {ix(i), ix(t), -1, -1}), 1.0}, {*col('Y', {ix(i), -1, -1, -1}), -static_cast<double>(m)}},
                          RowSense::LessEqual, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<Term> terms;
            for (NodeIndex i : hubs) terms.push_back({*col('V', {ix(i), ix(t), -1, -1}), 1.0});
            terms.push_back({*col('Z', {-1, -1, -1, -1}), -1.0});
            p.add_row("fleet_" + std::to_string(t), terms, RowSense::LessEqual, 0.0);
        }
        if (opt.periods_per_relocation > 0)
            for (NodeIndex i : hubs)
                for (std::size_t t = 1; t < T; ++t) {
                    if (t % static_cast<std::size_t>(opt.periods_per_relocation) == 0) continue;
                    p.add_row("stationary_" + std::to_string(i) + "_" + std::to_string(t),
                              {{*col('V', {ix(i), ix(t), -1, -1}), 1.0}, {*col('V', {ix(i), ix(t - 1), -1, -1}), -1.0}},
                              RowSense::Equal, 0.0);
                }
    }
    if (opt.require_hub) {
        std::vector<Term> terms;
        for (NodeIndex i : hubs) terms.push_back({*col('Y', {ix(i), -1, -1, -1}), 1.0});
        p.add_row("require_hub", terms, RowSense::GreaterEqual, 1.0);
        if (hubs.empty()) mb.infeasible = "a hub is required but no candidate fits the budget";
    }

    // ---- balance and storage rows
    for (NodeIndex i = 0; i < n; ++i) {
        const Node& node = inst.nodes[i];
        const bool facility = has_cold_storage(node.kind);
        const bool post = node.kind == NodeKind::OutreachPost;
        if (!facility && !post) continue;
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<Term> storage;
            for (std::size_t l = 0; l < L; ++l) {
                const double q = inst.vaccines[l].dose_volume_cm3;
                std::vector<Term> bal;  // outflows minus inflows; equality with zero
                for (ArcIndex a = 0; a < inst.arcs.size(); ++a) {
                    const Arc& arc = inst.arcs[a];
                    if (arc.kind == ArcKind::Land) {
                        if (arc.from == i) bal.push_back({*col('S', {ix(i), ix(arc.to), ix(l), ix(t)}), 1.0});
                        if (arc.to == i && t > 0) {
                            const double keep = 1.0 - inst.transit_wastage(a, l);
                            const int c = *col('S', {ix(arc.from), ix(i), ix(l), ix(t - 1)});
                            bal.push_back({c, -keep});
                            storage.push_back({c, q * keep});
                        }
                    } else if (arc.kind == ArcKind::Drone) {
                        if (arc.from == i)
                            if (auto c = col('D', {ix(i), ix(arc.to), ix(l), ix(t)})) bal.push_back({*c, 1.0});
                        if (arc.to == i)
                            if (auto c = col('D', {ix(arc.from), ix(i), ix(l), ix(t)})) {
                                const double keep = 1.0 - inst.transit_wastage(a, l);
                                bal.push_back({*c, -keep});
                                storage.push_back({*c, q * keep});
                            }
                    }
                }
                const double ovw = 1.0 / (1.0 - inst.ovw_rate(i, l));
                for (const auto& [c, tt] : x_at_center[{i, l}])
                    if (tt == t) bal.push_back({c, ovw});
                if (facility) {
                    const int ic = *col('I', {ix(i), ix(l), ix(t), -1});
                    bal.push_back({ic, 1.0});
                    storage.push_back({ic, q});
                    if (t > 0) bal.push_back({*col('I', {ix(i), ix(l), ix(t - 1), -1}), -(1.0 - inst.storage_wastage(i, l))});
                    if (i == cs)
                        if (auto r = col('R', {ix(l), ix(t), -1, -1})) bal.push_back({*r, -1.0});
                    p.add_row("inv_bal_" + std::to_string(i) + "_" + std::to_string(l) + "_" + std::to_string(t), bal,
                              RowSense::Equal, 0.0);
                } else {
                    p.add_row("post_bal_" + std::to_string(i) + "_" + std::to_string(l) + "_" + std::to_string(t), bal,
                              RowSense::Equal, 0.0);
                }
            }
            if (facility && std::isfinite(node.storage_capacity_cm3))
                p.add_row("storage_" + std::to_string(i) + "_" + std::to_string(t), storage, RowSense::LessEqual,
                          node.storage_capacity_cm3);
        }
    }

    // ---- transport rows
    for (const Arc& arc : inst.arcs) {
        if (arc.kind != ArcKind::Land || !std::isfinite(arc.transport_capacity_cm3)) continue;
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<Term> terms;
            for (std::size_t l = 0; l < L; ++l)
                terms.push_back({*col('S', {ix(arc.from), ix(arc.to), ix(l), ix(t)}), inst.vaccines[l].dose_volume_cm3});
            p.add_row("land_" + std::to_string(arc.from) + "_" + std::to_string(arc.to) + "_" + std::to_string(t), terms,
                      RowSense::LessEqual, arc.transport_capacity_cm3);
        }
    }
    if (fleet) {
        for (NodeIndex i : hubs)
            for (std::size_t t = 0; t < T; ++t) {
                std::vector<Term> terms;
                for (const Arc& arc : inst.arcs) {
                    if (arc.kind != ArcKind::Drone || arc.from != i) continue;
                    const double hours = 2.0 * arc.distance_km / drone.speed_kmh;
                    for (std::size_t l = 0; l < L; ++l) {
                        const double vol = inst.vaccines[l].dose_volume_cm3 + inst.vaccines[l].diluent_volume_cm3;
                        terms.push_back({*col('D', {ix(i), ix(arc.to), ix(l), ix(t)}), vol / drone.payload_cm3 * hours});
                    }
                }
                terms.push_back({*col('V', {ix(i), ix(t), -1, -1}), -drone.hours_per_period});
                p.add_row("drone_hours_" + std::to_string(i) + "_" + std::to_string(t), terms, RowSense::LessEqual, 0.0);
            }
    }

    // ---- demand and immunisation rows
    for (NodeIndex k : demand_nodes) {
        const int nc = *col('N', {ix(k), -1, -1, -1});
        for (std::size_t l = 0; l < L; ++l) {
            const auto& xs = x_of_demand[{k, l}];
            std::vector<Term> dem, fic{{nc, 1.0}};
            for (int c : xs) {
                dem.push_back({c, 1.0});
                fic.push_back({c, -1.0 / inst.vaccines[l].doses_per_regimen});
            }
            if (!dem.empty())
                p.add_row("demand_" + std::to_string(k) + "_" + std::to_string(l), dem, RowSense::LessEqual,
                          inst.horizon_demand(k, l));
            p.add_row("fic_" + std::to_string(k) + "_" + std::to_string(l), fic, RowSense::LessEqual, 0.0);
        }
    }
    return mb;
}

}  // namespace detail

/// Model P on a community-level network.
inline ModelBuild build_model_P(const Instance& inst, const FormulationOptions& opt = {}) {
    return detail::build_network_model(inst, ModelKind::P, opt);
}

/// Model Q on an aggregated network.
inline ModelBuild build_model_Q(const Instance& inst, const FormulationOptions& opt = {}) {
    return detail::build_network_model(inst, ModelKind::Q, opt);
}

/// Model Q restricted to `candidates`, with `fixed` hubs forced open.
inline ModelBuild build_model_Q_restricted(const Instance& inst, const std::set<NodeIndex>& candidates,
                                           const std::set<NodeIndex>& fixed, double sunk_budget = 0.0,
                                           FormulationOptions opt = {}) {
    for (NodeIndex f : fixed)
        if (!candidates.count(f)) throw Error("fixed hubs must be a subset of the candidates");
    opt.hub_candidates = candidates;
    opt.fixed_hubs = fixed;
    opt.sunk_budget = sunk_budget;
    auto mb = detail::build_network_model(inst, ModelKind::Qbar, opt);
    return mb;
}

/// Minimum-cardinality cover: `covers[c]` lists the columns (communities)
/// candidate c reaches; `forced` candidates must be selected.
inline ModelBuild build_set_cover(const std::vector<std::vector<std::size_t>>& covers, std::size_t columns,
                                  const std::vector<char>& forced) {
    ModelBuild mb;
    mb.kind = ModelKind::SetCover;
    mb.problem.name = "set_cover";
    for (std::size_t c = 0; c < covers.size(); ++c) {
        const int col = mb.problem.add_variable("W_" + std::to_string(c), Domain::Binary, 0.0, 1.0, -1.0);
        mb.vars.add('W', {detail::ix(c), -1, -1, -1}, col);
    }
    std::vector<std::vector<Term>> rows(columns);
    for (std::size_t c = 0; c < covers.size(); ++c)
        for (std::size_t k : covers[c]) rows.at(k).push_back({detail::ix(c), 1.0});
    for (std::size_t k = 0; k < columns; ++k) {
        if (rows[k].empty()) mb.infeasible = "column " + std::to_string(k) + " is covered by no candidate";
        mb.problem.add_row("cover_" + std::to_string(k), rows[k], RowSense::GreaterEqual, 1.0);
    }
    for (std::size_t c = 0; c < forced.size(); ++c)
        if (forced[c]) mb.problem.add_row("clinic_fix_" + std::to_string(c), {{detail::ix(c), 1.0}}, RowSense::Equal, 1.0);
    return mb;
}

/// Maps a solver vector back to semantic values.
inline Solution extract_solution(const Instance& inst, const ModelBuild& mb, const std::vector<double>& x,
                                 double integrality_tol = 1e-6) {
    if (x.size() != mb.problem.columns()) throw Error("solution vector length differs from the column count");
    Solution s = Solution::empty_for(inst);
    s.status = SolveStatus::Feasible;
    std::map<std::tuple<int, NodeIndex, NodeIndex>, ArcIndex> arc_of;
    for (ArcIndex a = 0; a < inst.arcs.size(); ++a)
        arc_of[{static_cast<int>(inst.arcs[a].kind), inst.arcs[a].from, inst.arcs[a].to}] = a;
    auto arc = [&](ArcKind k, int from, int to) {
        return arc_of.at({static_cast<int>(k), static_cast<NodeIndex>(from), static_cast<NodeIndex>(to)});
    };
    auto integral = [&](int c) {
        const double v = x[static_cast<std::size_t>(c)];
        const double r = std::round(v);
        if (std::abs(v - r) > integrality_tol)
            throw Error("column " + mb.problem.variables[static_cast<std::size_t>(c)].name + " = " + std::to_string(v) +
                        " is not integral");
        return static_cast<long>(r);
    };
    for (std::size_t j = 0; j < x.size(); ++j) {
        const int c = static_cast<int>(j);
        const auto& k = mb.vars.key(c);
        const auto& i = k.idx;
        const double v = x[j];
        auto u = [](int a) { return static_cast<std::size_t>(a); };
        switch (k.tag) {
        case 'Y': s.hub_open[u(i[0])] = static_cast<int>(integral(c)); break;
        case 'Z': s.drones = integral(c); break;
        case 'V': s.used(u(i[0]), u(i[1])) = integral(c); break;
        case 'I': s.stock(u(i[0]), u(i[1]), u(i[2])) = v; break;
        case 'R': s.receipts[inst.slot(u(i[0]), u(i[1]))] = v; break;
        case 'S': s.flow(arc(ArcKind::Land, i[0], i[1]), u(i[2]), u(i[3])) = v; break;
        case 'D': s.flow(arc(ArcKind::Drone, i[0], i[1]), u(i[2]), u(i[3])) = v; break;
        case 'X':
            if (mb.kind == ModelKind::P)
                s.flow(arc(ArcKind::Access, i[1], i[0]), u(i[2]), u(i[3])) = v;
            else
                s.given(u(i[0]), u(i[1]), u(i[2])) = v;
            break;
        case 'N': s.immunized[u(i[0])] = v; break;
        default: break;
        }
    }
    s.objective = mb.problem.evaluate_objective(x);
    s.bound = s.objective;
    return s;
}

/// Solves a prepared model and returns semantic values.
inline Solution solve_model(const Instance& inst, const ModelBuild& mb, const milp::SolveOptions& options = {},
                            milp::SolveResult* raw = nullptr) {
    if (mb.infeasible) {
        Solution s = Solution::empty_for(inst);
        s.status = SolveStatus::Infeasible;
        if (raw) {
            *raw = milp::SolveResult{};
            raw->status = SolveStatus::Infeasible;
        }
        return s;
    }
    const auto result = milp::solve(mb.problem, options);
    if (raw) *raw = result;
    if (!result.has_solution()) {
        Solution s = Solution::empty_for(inst);
        s.status = result.status;
        s.bound = result.bound;
        return s;
    }
    Solution s = extract_solution(inst, mb, result.x);
    s.status = result.status;
    s.objective = result.objective;
    s.bound = result.bound;
    s.gap = result.gap;
    return s;
}

// --------------------------------------------------------------------------
// Residual audit against the raw instance data

struct AuditReport {
    double max_residual = 0.0;
    std::string worst_family;
    std::vector<std::string> failures;  // families with a residual above tolerance

    bool ok() const { return failures.empty(); }
};

/// Re-evaluates every constraint family of P/Q on a semantic solution.
/// `budget_offset` is the sunk amount subtracted from the budget row.
inline AuditReport audit_solution(const Instance& inst, const Solution& s, double tol = 1e-6,
                                  double budget_offset = 0.0) {
    AuditReport rep;
    std::map<std::string, double> worst;
    auto note = [&](const std::string& family, double residual) {
        double& w = worst[family];
        w = std::max(w, residual);
    };
    const std::size_t L = inst.vaccine_count();
    const std::size_t T = inst.period_count();
    const std::size_t n = inst.nodes.size();
    const NodeIndex cs = inst.central_store();
    const long m = inst.max_drones();

    double spend = inst.drone.unit_cost * static_cast<double>(s.drones);
    for (NodeIndex i = 0; i < n; ++i)
        if (s.hub_open[i]) {
            if (!inst.nodes[i].hub_cost) note("hub_candidate", 1.0);
            else spend += *inst.nodes[i].hub_cost;
        }
    note("budget", std::max(0.0, spend - (inst.budget - budget_offset)) / std::max(1.0, inst.budget));
    for (std::size_t t = 0; t < T; ++t) {
        long total = 0;
        for (NodeIndex i = 0; i < n; ++i) {
            total += s.used(i, t);
            note("hub_link", std::max(0.0, static_cast<double>(s.used(i, t) - m * s.hub_open[i])));
            if (s.used(i, t) < 0) note("nonnegativity", static_cast<double>(-s.used(i, t)));
        }
        note("fleet", std::max(0.0, static_cast<double>(total - s.drones)));
    }
    for (double v : s.arc_flow) note("nonnegativity", std::max(0.0, -v));
    for (double v : s.inventory) note("nonnegativity", std::max(0.0, -v));
    for (double v : s.administered) note("nonnegativity", std::max(0.0, -v));

    const auto supply = effective_central_supply(inst);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t t = 0; t < T; ++t)
            note("central_supply", std::max(0.0, s.receipts[inst.slot(l, t)] - supply[inst.slot(l, t)]));

    for (NodeIndex i = 0; i < n; ++i) {
        const Node& node = inst.nodes[i];
        const bool facility = has_cold_storage(node.kind);
        const bool post = node.kind == NodeKind::OutreachPost;
        for (std::size_t t = 0; t < T; ++t) {
            double volume = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
                double in_land = 0.0, in_drone = 0.0, out = 0.0;
                for (ArcIndex a = 0; a < inst.arcs.size(); ++a) {
                    const Arc& arc = inst.arcs[a];
                    const double keep = 1.0 - inst.transit_wastage(a, l);
                    if (arc.kind == ArcKind::Land) {
                        if (arc.from == i) out += s.flow(a, l, t);
                        if (arc.to == i && t > 0) in_land += keep * s.flow(a, l, t - 1);
                    } else if (arc.kind == ArcKind::Drone) {
                        if (arc.from == i) out += s.flow(a, l, t);
                        if (arc.to == i) in_drone += keep * s.flow(a, l, t);
                    }
                }
                const double used = doses_at_center(s, inst, i, l, t) / (1.0 - inst.ovw_rate(i, l));
                if (facility) {
                    const double prev = t > 0 ? s.stock(i, l, t - 1) : 0.0;
                    const double recv = i == cs ? s.receipts[inst.slot(l, t)] : 0.0;
                    const double rhs = (1.0 - inst.storage_wastage(i, l)) * prev - out + in_land + in_drone - used + recv;
                    note("inventory_balance", std::abs(s.stock(i, l, t) - rhs));
                    volume += inst.vaccines[l].dose_volume_cm3 * (s.stock(i, l, t) + in_land + in_drone);
                } else if (post) {
                    note("outreach_balance", std::abs(in_land + in_drone - used - out));
                } else {
                    note("no_flow_at_community", std::abs(out + in_land + in_drone));
                }
            }
            if (facility && std::isfinite(node.storage_capacity_cm3))
                note("storage", std::max(0.0, volume - node.storage_capacity_cm3) / std::max(1.0, node.storage_capacity_cm3));
        }
    }
    for (ArcIndex a = 0; a < inst.arcs.size(); ++a) {
        const Arc& arc = inst.arcs[a];
        for (std::size_t t = 0; t < T; ++t) {
            if (arc.kind == ArcKind::Land && std::isfinite(arc.transport_capacity_cm3)) {
                double vol = 0.0;
                for (std::size_t l = 0; l < L; ++l) vol += inst.vaccines[l].dose_volume_cm3 * s.flow(a, l, t);
                note("land_capacity", std::max(0.0, vol - arc.transport_capacity_cm3) / std::max(1.0, arc.transport_capacity_cm3));
            }
            if (arc.kind == ArcKind::Drone && !s.hub_open[arc.from])
                for (std::size_t l = 0; l < L; ++l) note("drone_without_hub", std::abs(s.flow(a, l, t)));
        }
    }
    for (NodeIndex i = 0; i < n; ++i)
        for (std::size_t t = 0; t < T; ++t) {
            double hours = 0.0;
            for (ArcIndex a = 0; a < inst.arcs.size(); ++a) {
                const Arc& arc = inst.arcs[a];
                if (arc.kind != ArcKind::Drone || arc.from != i) continue;
                for (std::size_t l = 0; l < L; ++l)
                    hours += (inst.vaccines[l].dose_volume_cm3 + inst.vaccines[l].diluent_volume_cm3) * s.flow(a, l, t) /
                             inst.drone.payload_cm3 * (2.0 * arc.distance_km / inst.drone.speed_kmh);
            }
            note("drone_hours", std::max(0.0, hours - inst.drone.hours_per_period * static_cast<double>(s.used(i, t))));
        }
    for (const auto& [k, row] : inst.demand) {
        double n_bound = kUnlimited;
        for (std::size_t l = 0; l < L; ++l) {
            double got = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                if (inst.nodes[k].kind == NodeKind::Community) {
                    for (ArcIndex a = 0; a < inst.arcs.size(); ++a)
                        if (inst.arcs[a].kind == ArcKind::Access && inst.arcs[a].from == k) got += s.flow(a, l, t);
                } else {
                    got += s.given(k, l, t);
                }
            }
            note("demand", std::max(0.0, got - inst.horizon_demand(k, l)));
            n_bound = std::min(n_bound, got / inst.vaccines[l].doses_per_regimen);
        }
        note("fic", std::max(0.0, s.immunized[k] - n_bound));
    }

    for (const auto& [family, r] : worst) {
        if (r > rep.max_residual) {
            rep.max_residual = r;
            rep.worst_family = family;
        }
        if (r > tol) rep.failures.push_back(family + " residual " + std::to_string(r));
    }
    return rep;
}

}  // namespace vaxnet
