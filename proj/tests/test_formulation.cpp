#include <catch_amalgamated.hpp>

#include <sstream>

#include "support/fixtures.hpp"
#include "vaxnet/formulation.hpp"
#include "vaxnet/milp/lp_format.hpp"
#include "vaxnet/preprocess.hpp"

using namespace vaxnet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// tiny_post with its communities folded into the post by hand
Instance aggregated_tiny(double budget) {
    Instance inst = fixtures::tiny_post(1, 2, budget);
    inst.nodes.resize(2);
    inst.nodes[1].community.reset();
    inst.arcs.resize(1);
    inst.demand.clear();
    inst.demand[1] = fixtures::row(inst, {10, 10});
    return inst;
}

std::size_t row_index(const milp::MilpProblem& p, const std::string& name) {
    for (std::size_t r = 0; r < p.rows.size(); ++r)
        if (p.rows[r].name == name) return r;
    FAIL("no row " << name);
    return 0;
}

double coef(const milp::MilpProblem& p, const std::string& row, int column) {
    for (const auto& t : p.rows[row_index(p, row)].terms)
        if (t.column == column) return t.coef;
    return 0.0;
}

Instance network(std::uint64_t seed, double budget, bool community_level) {
    Instance inst = fixtures::small(seed);
    inst.budget = budget;
    auto pre = preprocess(inst);
    return community_level ? pre.community_network : pre.reduced;
}

}  // namespace

TEST_CASE("column and row count of the tiny model", "[formulation]") {
    const Instance inst = fixtures::tiny_post(1, 2);
    const auto mb = build_model_P(inst);
    // Y 1, Z 1, V 1x2, I 1x1x2, R 1x2, D 1x1x2, X 1x1x2, N 1
    CHECK(mb.problem.columns() == 1 + 1 + 2 + 2 + 2 + 2 + 2 + 1);
    CHECK(mb.vars.count('Y') == 1);
    CHECK(mb.vars.count('V') == 2);
    CHECK(mb.vars.count('X') == 2);
    // budget, hub link 2, fleet 2, store balance 2, post balance 2, drone hours 2, demand, fic
    CHECK(mb.problem.rows.size() == 1 + 2 + 2 + 2 + 2 + 2 + 1 + 1);
    CHECK(mb.problem.variables[static_cast<std::size_t>(*mb.vars.find('Z', {-1, -1, -1, -1}))].upper ==
          std::floor(1.1e6 / 30000));
}

TEST_CASE("drone hours coefficient", "[formulation]") {
    Instance inst = fixtures::tiny_post(1, 2);
    inst.arcs[0].distance_km = 37.5;
    inst.nodes[1].position = {37.5, 0};
    inst.nodes[2].position = {37.5, 0};
    inst.drone.speed_kmh = 75;
    inst.drone.payload_cm3 = 1000;
    inst.vaccines[0].dose_volume_cm3 = 1.5;
    inst.vaccines[0].diluent_volume_cm3 = 0.5;
    const auto mb = build_model_P(inst);
    const int d = *mb.vars.find('D', {0, 1, 0, 0});
    const int v = *mb.vars.find('V', {0, 0, -1, -1});
    CHECK_THAT(coef(mb.problem, "drone_hours_0_0", d), WithinAbs(0.002, 1e-15));
    CHECK(coef(mb.problem, "drone_hours_0_0", v) == -8.0);
}

TEST_CASE("tiny model solves to full coverage", "[formulation]") {
    const Instance inst = fixtures::tiny_post(1, 2);
    const auto s = solve_model(inst, build_model_P(inst));
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK_THAT(s.objective, WithinAbs(20.0 + 20.0 * inst.epsilon, 1e-7));
    CHECK(s.hub_open[0] == 1);
    CHECK(s.drones >= 1);
    CHECK(audit_solution(inst, s).ok());
}

TEST_CASE("zero budget opens nothing", "[formulation]") {
    const Instance tiny = fixtures::tiny_post(1, 2, 0.0);
    const auto mb = build_model_P(tiny);
    CHECK(mb.vars.count('Y') == 0);
    CHECK(mb.vars.count('Z') == 0);
    const auto s = solve_model(tiny, mb);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == 0.0);

    for (bool p : {true, false}) {
        const Instance net = network(2, 0.0, p);
        const auto r = solve_model(net, p ? build_model_P(net) : build_model_Q(net));
        REQUIRE(r.status == SolveStatus::Optimal);
        CHECK(r.drones == 0);
        for (int y : r.hub_open) CHECK(y == 0);
        for (long v : r.drones_used) CHECK(v == 0);
        for (ArcIndex a = 0; a < net.arcs.size(); ++a)
            if (net.arcs[a].kind == ArcKind::Drone)
                for (std::size_t t = 0; t < net.period_count(); ++t) CHECK(r.flow(a, 0, t) == 0.0);
    }
}

TEST_CASE("aggregated model has centre-level doses only", "[formulation]") {
    const Instance agg = aggregated_tiny(1.1e6);
    const auto q = build_model_Q(agg);
    for (std::size_t c = 0; c < q.vars.size(); ++c)
        if (q.vars.key(static_cast<int>(c)).tag == 'X') CHECK(q.vars.key(static_cast<int>(c)).idx[3] == -1);
    CHECK(q.vars.count('X') == 2);

    // two communities on one post: P needs X per access arc
    const Instance two = fixtures::tiny_post(2, 2);
    const auto pre = preprocess(two);
    const auto p_build = build_model_P(pre.community_network);
    const auto q_build = build_model_Q(pre.reduced);
    CHECK(q_build.problem.columns() < p_build.problem.columns());
    CHECK_THROWS_AS(build_model_Q(two), Error);
    CHECK_THROWS_AS(build_model_P(agg), Error);
}

TEST_CASE("zero demand gives a zero objective", "[formulation]") {
    Instance agg = aggregated_tiny(1.1e6);
    agg.demand[1] = fixtures::row(agg, {0, 0});
    const auto s = solve_model(agg, build_model_Q(agg));
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == 0.0);
}

TEST_CASE("restricted model with an exhausted budget", "[formulation]") {
    const Instance agg = aggregated_tiny(1e6);
    const auto mb = build_model_Q_restricted(agg, {0}, {0});
    const auto s = solve_model(agg, mb);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.hub_open[0] == 1);
    CHECK(s.drones == 0);
    CHECK(s.objective == 0.0);
    CHECK(audit_solution(agg, s).ok());

    const Instance poor = aggregated_tiny(5e5);
    CHECK(build_model_Q_restricted(poor, {0}, {0}).infeasible.has_value());
    CHECK_THROWS_AS(build_model_Q_restricted(agg, {}, {0}), Error);
}

TEST_CASE("restricting to regional centres", "[formulation]") {
    Instance net = network(5, 3e6, false);
    std::set<NodeIndex> regional;
    for (NodeIndex i = 0; i < net.nodes.size(); ++i)
        if (net.nodes[i].kind == NodeKind::RegionalCenter) regional.insert(i);
    // the same model written as Q with district hub costs removed
    Instance no_districts = net;
    for (Node& n : no_districts.nodes)
        if (n.kind == NodeKind::DistrictStore) n.hub_cost.reset();
    std::erase_if(no_districts.arcs, [&](const Arc& a) {
        return a.kind == ArcKind::Drone && no_districts.nodes[a.from].kind == NodeKind::DistrictStore;
    });
    milp::SolveOptions tight;
    tight.relative_gap = 1e-12;
    const auto q = solve_model(no_districts, build_model_Q(no_districts), tight);
    const auto r2 = solve_model(net, build_model_Q_restricted(net, regional, {}), tight);
    REQUIRE(r2.status == SolveStatus::Optimal);
    REQUIRE(q.status == SolveStatus::Optimal);
    CHECK_THAT(r2.objective, WithinRel(q.objective, 1e-9));
}

TEST_CASE("two-stage expansion never beats the one-shot optimum", "[formulation]") {
    milp::SolveOptions tight;
    tight.relative_gap = 1e-12;
    for (std::uint64_t seed : {1u, 3u}) {
        Instance net = network(seed, 2e6, false);
        std::set<NodeIndex> all;
        for (NodeIndex i = 0; i < net.nodes.size(); ++i)
            if (net.nodes[i].hub_cost) all.insert(i);
        const auto first = solve_model(net, build_model_Q_restricted(net, all, {}), tight);
        REQUIRE(first.status == SolveStatus::Optimal);
        std::set<NodeIndex> kept;
        for (NodeIndex i = 0; i < net.nodes.size(); ++i)
            if (first.hub_open[i]) kept.insert(i);
        net.budget = 3e6;
        const auto second = solve_model(net, build_model_Q_restricted(net, all, kept), tight);
        const auto q = solve_model(net, build_model_Q(net), tight);
        REQUIRE(second.status == SolveStatus::Optimal);
        REQUIRE(q.status == SolveStatus::Optimal);
        CHECK(second.objective <= q.objective + 1e-9);
        for (NodeIndex i : kept) CHECK(second.hub_open[i] == 1);
    }
}

TEST_CASE("set cover model", "[formulation]") {
    auto optimum = [](const std::vector<std::vector<std::size_t>>& covers, std::size_t k, std::vector<char> forced) {
        const auto mb = build_set_cover(covers, k, forced);
        const auto r = milp::solve_milp(mb.problem);
        REQUIRE(r.status == SolveStatus::Optimal);
        return -r.objective;
    };
    CHECK(optimum({{0}, {1}, {2}, {3}}, 4, {}) == 4.0);
    CHECK(optimum({{0}, {0, 1, 2, 3}, {2}}, 4, {}) == 1.0);
    CHECK(optimum({{0}, {0, 1, 2, 3}, {2}}, 4, {1, 0, 1}) == 3.0);
    // six on a line, each reaching two neighbours either side
    std::vector<std::vector<std::size_t>> line(6);
    for (std::size_t c = 0; c < 6; ++c)
        for (std::size_t k = 0; k < 6; ++k)
            if ((c > k ? c - k : k - c) <= 2) line[c].push_back(k);
    CHECK(optimum(line, 6, {}) == 2.0);
    CHECK(build_set_cover({{0}}, 2, {}).infeasible.has_value());
}

TEST_CASE("extracting integer columns", "[formulation]") {
    const Instance inst = fixtures::tiny_post(1, 2);
    const auto mb = build_model_P(inst);
    std::vector<double> x(mb.problem.columns(), 0.0);
    const Solution zero = extract_solution(inst, mb, x);
    CHECK(zero.objective == 0.0);
    CHECK(zero.hub_open[0] == 0);
    CHECK(zero.arc_flow == std::vector<double>(zero.arc_flow.size(), 0.0));

    const auto y = static_cast<std::size_t>(*mb.vars.find('Y', {0, -1, -1, -1}));
    x[y] = 0.9999999;
    CHECK(extract_solution(inst, mb, x).hub_open[0] == 1);
    x[y] = 0.4;
    CHECK_THROWS_AS(extract_solution(inst, mb, x), Error);
    CHECK_THROWS_AS(extract_solution(inst, mb, std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("residual audit on solved models", "[formulation]") {
    for (std::uint64_t seed : {1u, 4u})
        for (bool p : {true, false}) {
            const Instance net = network(seed, 2e6, p);
            auto s = solve_model(net, p ? build_model_P(net) : build_model_Q(net));
            REQUIRE(s.status == SolveStatus::Optimal);
            const auto audit = audit_solution(net, s);
            CHECK(audit.ok());
            CHECK(audit.max_residual <= 1e-6);
            // breaking inventory balance is noticed
            s.stock(net.central_store(), 0, 0) += 1.0;
            CHECK(!audit_solution(net, s).ok());
        }
}

TEST_CASE("built models survive the LP file format", "[formulation]") {
    for (bool p : {true, false}) {
        const Instance net = network(6, 2e6, p);
        const auto mb = p ? build_model_P(net) : build_model_Q(net);
        std::ostringstream os;
        milp::write_lp(mb.problem, os);
        CHECK(milp::parse_lp(os.str()) == mb.problem);
    }
}

TEST_CASE("requiring a hub that the budget cannot buy", "[formulation]") {
    const Instance net = network(1, 5e5, false);
    FormulationOptions opt;
    opt.require_hub = true;
    const auto mb = build_model_Q(net, opt);
    REQUIRE(mb.infeasible.has_value());
    CHECK(solve_model(net, mb).status == SolveStatus::Infeasible);
}
