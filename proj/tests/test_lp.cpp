#include <catch_amalgamated.hpp>

#include <functional>
#include <random>

#include "support/reference_lp.hpp"
#include "vaxnet/milp/branch_and_bound.hpp"

using namespace vaxnet::milp;
using Catch::Matchers::WithinAbs;

namespace {

// All vertices of {x : A x <= b, lo <= x <= hi} by choosing n tight
// hyperplanes and solving the square system; returns the best objective.
double enumerate_vertices(const MilpProblem& p) {
    const std::size_t n = p.columns();
    struct Plane {
        std::vector<double> a;
        double b;
    };
    std::vector<Plane> planes;
    for (const auto& r : p.rows) {
        Plane pl{std::vector<double>(n, 0.0), r.rhs};
        for (const auto& t : r.terms) pl.a[static_cast<std::size_t>(t.column)] = t.coef;
        planes.push_back(pl);
    }
    for (std::size_t j = 0; j < n; ++j) {
        Plane lo{std::vector<double>(n, 0.0), p.variables[j].lower};
        lo.a[j] = 1.0;
        planes.push_back(lo);
        Plane hi{std::vector<double>(n, 0.0), p.variables[j].upper};
        hi.a[j] = 1.0;
        planes.push_back(hi);
    }
    double best = -kInf;
    std::vector<std::size_t> pick(n);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t from) {
        if (depth == n) {
            std::vector<std::vector<double>> m(n, std::vector<double>(n + 1));
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) m[i][j] = planes[pick[i]].a[j];
                m[i][n] = planes[pick[i]].b;
            }
            for (std::size_t c = 0; c < n; ++c) {
                std::size_t piv = c;
                for (std::size_t r = c + 1; r < n; ++r)
                    if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
                if (std::abs(m[piv][c]) < 1e-9) return;
                std::swap(m[c], m[piv]);
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == c) continue;
                    const double f = m[r][c] / m[c][c];
                    for (std::size_t k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
                }
            }
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
            if (p.max_violation(x) <= 1e-7) best = std::max(best, p.evaluate_objective(x));
            return;
        }
        for (std::size_t k = from; k < planes.size(); ++k) {
            pick[depth] = k;
            rec(depth + 1, k + 1);
        }
    };
    rec(0, 0);
    return best;
}

MilpProblem random_lp(std::mt19937_64& rng, std::size_t n, std::size_t m, bool with_equalities) {
    std::uniform_int_distribution<int> coef(-5, 9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MilpProblem p;
    std::vector<double> x0(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = unit(rng) < 0.3 ? -3.0 : 0.0;
        const double hi = unit(rng) < 0.2 ? kInf : 10.0;
        p.add_variable("x" + std::to_string(j), Domain::Continuous, lo, hi, coef(rng));
        x0[j] = lo + 2.0 * unit(rng);
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<Term> terms;
        double act = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const int a = coef(rng);
            if (a == 0) continue;
            terms.push_back({static_cast<int>(j), static_cast<double>(a)});
            act += a * x0[j];
        }
        const double r = unit(rng);
        if (with_equalities && r < 0.2)
            p.add_row("r" + std::to_string(i), terms, RowSense::Equal, act);
        else if (r < 0.4)
            p.add_row("r" + std::to_string(i), terms, RowSense::GreaterEqual, std::floor(act - 3.0 * unit(rng)));
        else
            p.add_row("r" + std::to_string(i), terms, RowSense::LessEqual, std::ceil(act + 5.0 * unit(rng)));
    }
    return p;
}

}  // namespace

TEST_CASE("single bounded column", "[lp]") {
    MilpProblem p;
    const int x = p.add_variable("x", Domain::Continuous, 0.0, kInf, 1.0);
    p.add_row("cap", {{x, 1.0}}, RowSense::LessEqual, 5.0);
    const auto r = solve_lp(p);
    REQUIRE(r.status == vaxnet::SolveStatus::Optimal);
    CHECK_THAT(r.objective, WithinAbs(5.0, 1e-9));
    CHECK_THAT(r.x[0], WithinAbs(5.0, 1e-9));
}

TEST_CASE("degenerate tie picks some vertex", "[lp]") {
    MilpProblem p;
    const int x = p.add_variable("x", Domain::Continuous, 0.0, kInf, 1.0);
    const int y = p.add_variable("y", Domain::Continuous, 0.0, kInf, 1.0);
    p.add_row("sum", {{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 1.0);
    const auto r = solve_lp(p);
    REQUIRE(r.status == vaxnet::SolveStatus::Optimal);
    CHECK_THAT(r.objective, WithinAbs(1.0, 1e-9));
    CHECK(p.max_violation(r.x) <= 1e-9);
}

TEST_CASE("infeasible and unbounded are reported", "[lp]") {
    MilpProblem p;
    const int x = p.add_variable("x", Domain::Continuous, 0.0, kInf, 1.0);
    p.add_row("lo", {{x, 1.0}}, RowSense::GreaterEqual, 3.0);
    CHECK(solve_lp(p).status == vaxnet::SolveStatus::Unbounded);
    p.add_row("hi", {{x, 1.0}}, RowSense::LessEqual, 2.0);
    CHECK(solve_lp(p).status == vaxnet::SolveStatus::Infeasible);
}

TEST_CASE("free column and equality rows", "[lp]") {
    MilpProblem p;
    const int x = p.add_variable("x", Domain::Continuous, -kInf, kInf, -1.0);
    const int y = p.add_variable("y", Domain::Continuous, 0.0, 4.0, 2.0);
    p.add_row("link", {{x, 1.0}, {y, -2.0}}, RowSense::Equal, -3.0);
    const auto r = solve_lp(p);
    REQUIRE(r.status == vaxnet::SolveStatus::Optimal);
    // x = 2y - 3, objective = -2y + 3 + 2y = 3 for every y
    CHECK_THAT(r.objective, WithinAbs(3.0, 1e-9));
}

TEST_CASE("five-column LPs match vertex enumeration", "[lp]") {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> coef(-4, 9);
    for (int trial = 0; trial < 40; ++trial) {
        MilpProblem p;
        for (int j = 0; j < 5; ++j) p.add_variable("x" + std::to_string(j), Domain::Continuous, 0.0, 10.0, coef(rng));
        for (int i = 0; i < 4; ++i) {
            std::vector<Term> terms;
            for (int j = 0; j < 5; ++j) terms.push_back({j, static_cast<double>(coef(rng))});
            p.add_row("r" + std::to_string(i), terms, RowSense::LessEqual, 5 + std::abs(coef(rng)) * 3);
        }
        const auto r = solve_lp(p);
        REQUIRE(r.status == vaxnet::SolveStatus::Optimal);
        CHECK_THAT(r.objective, WithinAbs(enumerate_vertices(p), 1e-7));
    }
}

TEST_CASE("random LPs agree with the tableau reference", "[lp]") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 3 + trial % 12;
        const std::size_t m = 2 + (trial * 7) % 15;
        const auto p = random_lp(rng, n, m, true);
        const auto ref = reference::solve_lp(p);
        const auto got = solve_lp(p);
        INFO("trial " << trial);
        REQUIRE(ref.feasible);
        if (ref.unbounded) {
            CHECK(got.status == vaxnet::SolveStatus::Unbounded);
            continue;
        }
        REQUIRE(got.status == vaxnet::SolveStatus::Optimal);
        CHECK_THAT(got.objective, WithinAbs(ref.objective, 1e-6 * (1.0 + std::abs(ref.objective))));
        CHECK(p.max_violation(got.x) <= 1e-7);
    }
}

TEST_CASE("warm start after a bound change matches a cold solve", "[lp]") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        auto p = random_lp(rng, 8, 10, false);
        for (auto& v : p.variables) v.upper = std::min(v.upper, 10.0);
        SimplexEngine engine(p);
        if (engine.solve() != LpStatus::Optimal) continue;
        const auto x = engine.solution();
        const std::size_t j = static_cast<std::size_t>(trial) % p.columns();
        const double cut = std::floor(x[j]);
        engine.set_column_bounds(j, p.variables[j].lower, std::max(cut, p.variables[j].lower));
        const LpStatus warm = engine.solve();

        auto q = p;
        q.variables[j].upper = std::max(cut, p.variables[j].lower);
        const auto ref = reference::solve_lp(q);
        INFO("trial " << trial);
        if (!ref.feasible) {
            CHECK(warm == LpStatus::Infeasible);
            continue;
        }
        REQUIRE(warm == LpStatus::Optimal);
        CHECK_THAT(engine.objective(), WithinAbs(ref.objective, 1e-6 * (1.0 + std::abs(ref.objective))));
    }
}

TEST_CASE("identical input gives identical output", "[lp]") {
    std::mt19937_64 rng(3);
    const auto p = random_lp(rng, 12, 9, true);
    const auto a = solve_lp(p);
    const auto b = solve_lp(p);
    CHECK(a.x == b.x);
    CHECK(a.objective == b.objective);
}
