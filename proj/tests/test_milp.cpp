#include <catch_amalgamated.hpp>

#include <random>

#include "support/reference_lp.hpp"
#include "vaxnet/milp/branch_and_bound.hpp"

using namespace vaxnet::milp;
using Catch::Matchers::WithinAbs;

TEST_CASE("two-item knapsack", "[milp]") {
    MilpProblem p;
    const int a = p.add_variable("y1", Domain::Binary, 0, 1, 2.0);
    const int b = p.add_variable("y2", Domain::Binary, 0, 1, 3.0);
    p.add_row("pick", {{a, 1.0}, {b, 1.0}}, RowSense::LessEqual, 1.0);
    const auto r = solve_milp(p);
    REQUIRE(r.status == vaxnet::SolveStatus::Optimal);
    CHECK_THAT(r.objective, WithinAbs(3.0, 1e-9));
    CHECK(r.x == std::vector<double>{0.0, 1.0});
}

TEST_CASE("integral relaxation closes at the root", "[milp]") {
    MilpProblem p;
    std::vector<Term> cover;
    for (int j = 0; j < 6; ++j) {
        p.add_variable("w" + std::to_string(j), Domain::Binary, 0, 1, -(1.0 + j));
        cover.push_back({j, 1.0});
    }
    p.add_row("cover", cover, RowSense::GreaterEqual, 1.0);
    const auto r = solve_milp(p);
    REQUIRE(r.status == vaxnet::SolveStatus::Optimal);
    CHECK(r.nodes == 1);
    CHECK_THAT(r.objective, WithinAbs(-1.0, 1e-9));
}

TEST_CASE("infeasible integer program", "[milp]") {
    MilpProblem p;
    const int x = p.add_variable("x", Domain::Integer, 0, 10, 1.0);
    p.add_row("a", {{x, 2.0}}, RowSense::Equal, 3.0);
    CHECK(solve_milp(p).status == vaxnet::SolveStatus::Infeasible);
}

TEST_CASE("random mixed programs match enumeration", "[milp]") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> coef(-3, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        MilpProblem p;
        const int ni = 2 + trial % 3;
        const int nc = 2 + trial % 4;
        for (int j = 0; j < ni; ++j) p.add_variable("y" + std::to_string(j), Domain::Integer, 0, 3, coef(rng));
        for (int j = 0; j < nc; ++j) p.add_variable("x" + std::to_string(j), Domain::Continuous, 0, 5, coef(rng) + unit(rng));
        for (int i = 0; i < 4; ++i) {
            std::vector<Term> t;
            for (int j = 0; j < ni + nc; ++j) t.push_back({j, static_cast<double>(coef(rng))});
            p.add_row("r" + std::to_string(i), t, RowSense::LessEqual, 4.0 + 10.0 * unit(rng));
        }
        const auto expect = reference::solve_milp_by_enumeration(p);
        SolveOptions opt;
        opt.relative_gap = 1e-10;
        opt.branching = trial % 2 ? Branching::PseudoCost : Branching::MostFractional;
        const auto got = solve_milp(p, opt);
        INFO("trial " << trial);
        if (!expect) {
            CHECK(got.status == vaxnet::SolveStatus::Infeasible);
            continue;
        }
        REQUIRE(got.status == vaxnet::SolveStatus::Optimal);
        CHECK_THAT(got.objective, WithinAbs(*expect, 1e-6));
        CHECK(got.bound >= got.objective - 1e-9);
        CHECK(p.max_violation(got.x) <= 1e-6);
        for (int j = 0; j < ni; ++j) CHECK(got.x[j] == std::round(got.x[j]));
    }
}

TEST_CASE("node limit yields a feasible answer with a valid bound", "[milp]") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> w(5, 40);
    MilpProblem p;
    std::vector<Term> cap;
    double total = 0;
    for (int j = 0; j < 30; ++j) {
        const int weight = w(rng);
        p.add_variable("y" + std::to_string(j), Domain::Binary, 0, 1, weight + w(rng) % 7);
        cap.push_back({j, static_cast<double>(weight)});
        total += weight;
    }
    p.add_row("cap", cap, RowSense::LessEqual, std::floor(total / 2) + 0.5);
    SolveOptions opt;
    opt.node_limit = 3;
    const auto r = solve_milp(p, opt);
    CHECK(r.limit_reached);
    REQUIRE(r.status == vaxnet::SolveStatus::Feasible);
    CHECK(r.bound >= r.objective);
    CHECK(r.gap == Catch::Approx((r.bound - r.objective) / std::max(1.0, std::abs(r.objective))));

    const auto full = solve_milp(p);
    REQUIRE(full.status == vaxnet::SolveStatus::Optimal);
    CHECK(r.bound >= full.objective - 1e-6);
    CHECK(full.objective >= r.objective - 1e-9);
}

TEST_CASE("depth-first search reaches the same optimum", "[milp]") {
    MilpProblem p;
    const double value[] = {10, 13, 7, 8, 9, 4};
    const double weight[] = {5, 7, 4, 4, 5, 2};
    std::vector<Term> cap;
    for (int j = 0; j < 6; ++j) {
        p.add_variable("y" + std::to_string(j), Domain::Binary, 0, 1, value[j]);
        cap.push_back({j, weight[j]});
    }
    p.add_row("cap", cap, RowSense::LessEqual, 13.0);
    SolveOptions dfs;
    dfs.node_selection = NodeSelection::DepthFirst;
    const auto a = solve_milp(p);
    const auto b = solve_milp(p, dfs);
    CHECK_THAT(a.objective, WithinAbs(*reference::solve_milp_by_enumeration(p), 1e-9));
    CHECK_THAT(b.objective, WithinAbs(a.objective, 1e-9));
}
