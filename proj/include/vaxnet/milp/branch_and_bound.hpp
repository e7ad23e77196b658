#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <queue>
#include <vector>

#include "vaxnet/milp/problem.hpp"
#include "vaxnet/milp/simplex.hpp"

namespace vaxnet::milp {

enum class Branching { MostFractional, PseudoCost };
enum class NodeSelection { BestBound, DepthFirst };

struct SolveOptions {
    double relative_gap = 1e-6;
    double absolute_gap = 1e-9;
    long node_limit = 100000;
    std::optional<double> time_limit_s;
    Branching branching = Branching::MostFractional;
    NodeSelection node_selection = NodeSelection::BestBound;
    bool verbose = false;
    double integrality_tol = 1e-6;
};

struct SolveResult {
    SolveStatus status = SolveStatus::NoSolution;
    double objective = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    std::vector<double> x;
    long nodes = 0;
    long lp_iterations = 0;
    bool limit_reached = false;

    bool has_solution() const { return status == SolveStatus::Optimal || status == SolveStatus::Feasible; }
};

inline double relative_gap(double bound, double incumbent) {
    return std::max(0.0, bound - incumbent) / std::max(1.0, std::abs(incumbent));
}

/// Solves the continuous relaxation.
inline SolveResult solve_lp(const MilpProblem& problem) {
    SimplexEngine engine(problem);
    SolveResult out;
    const LpStatus st = engine.solve();
    out.lp_iterations = engine.iterations();
    switch (st) {
    case LpStatus::Optimal:
        out.status = SolveStatus::Optimal;
        out.x = engine.solution();
        out.objective = problem.evaluate_objective(out.x);
        out.bound = out.objective;
        break;
    case LpStatus::Infeasible: out.status = SolveStatus::Infeasible; break;
    case LpStatus::Unbounded: out.status = SolveStatus::Unbounded; break;
    case LpStatus::IterationLimit:
        out.status = SolveStatus::NoSolution;
        out.limit_reached = true;
        break;
    }
    return out;
}

namespace detail {

struct BoundChange {
    int column;
    double lower;
    double upper;
};

struct BbNode {
    long id = 0;
    int depth = 0;
    double bound = 0.0;
    std::vector<BoundChange> changes;
    Basis basis;
    int branch_column = -1;  // for pseudo-cost bookkeeping
    bool branch_up = false;
    double branch_frac = 0.0;
};

}  // namespace detail

/// LP-based branch and bound for a maximisation problem.
inline SolveResult solve_milp(const MilpProblem& problem, const SolveOptions& options = {}) {
    using detail::BbNode;
    using detail::BoundChange;
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const double itol = options.integrality_tol;
    const std::size_t n = problem.columns();

    SolveResult out;
    SimplexEngine engine(problem);

    bool integral_objective = problem.has_integers();
    for (std::size_t j = 0; j < n && integral_objective; ++j) {
        const double c = problem.objective[j];
        if (c == 0.0) continue;
        if (!problem.variables[j].is_integral() || c != std::round(c)) integral_objective = false;
    }

    double incumbent = -kInf;
    std::vector<double> best_x;
    double pruned_bound = -kInf;  // largest bound among nodes cut off by the gap tolerance

    auto can_prune = [&](double bound) {
        if (!std::isfinite(incumbent)) return false;
        if (integral_objective) bound = std::floor(bound + 1e-6);
        const double tol = std::max(options.absolute_gap, options.relative_gap * std::max(1.0, std::abs(incumbent)));
        return bound <= incumbent + tol;
    };

    auto run_lp = [&](bool allow_cold) -> LpStatus {
        LpStatus st;
        try {
            st = engine.solve();
        } catch (const SolverError&) {
            if (!allow_cold) throw;
            st = LpStatus::IterationLimit;
        }
        if (st == LpStatus::IterationLimit && allow_cold) {
            engine.cold_start();
            st = engine.solve();
        }
        return st;
    };

    auto fractional_columns = [&](const std::vector<double>& x) {
        std::vector<std::pair<int, double>> f;
        for (std::size_t j = 0; j < n; ++j) {
            if (!problem.variables[j].is_integral()) continue;
            const double d = std::abs(x[j] - std::round(x[j]));
            if (d > itol) f.emplace_back(static_cast<int>(j), x[j]);
        }
        return f;
    };

    auto offer = [&](std::vector<double> x) {
        for (std::size_t j = 0; j < n; ++j)
            if (problem.variables[j].is_integral()) x[j] = std::round(x[j]);
        if (problem.max_violation(x) > 1e-6) return;
        const double z = problem.evaluate_objective(x);
        if (z > incumbent) {
            incumbent = z;
            best_x = std::move(x);
        }
    };

    // Root.
    const LpStatus root = run_lp(true);
    out.lp_iterations = engine.iterations();
    if (root == LpStatus::Infeasible) {
        out.status = SolveStatus::Infeasible;
        return out;
    }
    if (root == LpStatus::Unbounded) {
        out.status = SolveStatus::Unbounded;
        return out;
    }
    if (root == LpStatus::IterationLimit) {
        out.status = SolveStatus::NoSolution;
        out.limit_reached = true;
        return out;
    }
    const std::vector<double> root_x = engine.solution();
    const double root_bound = problem.evaluate_objective(root_x);
    const Basis root_basis = engine.basis();

    // Rounding heuristics: fix the integer columns and re-solve the rest.
    if (!fractional_columns(root_x).empty()) {
        for (int mode = 0; mode < 2; ++mode) {
            engine.restore_root_bounds();
            for (std::size_t j = 0; j < n; ++j) {
                if (!problem.variables[j].is_integral()) continue;
                const auto& v = problem.variables[j];
                double r = mode == 0 ? std::round(root_x[j]) : std::floor(root_x[j] + itol);
                r = std::clamp(r, v.lower, v.upper);
                engine.set_column_bounds(j, r, r);
            }
            engine.load_basis(root_basis);
            try {
                if (engine.solve() == LpStatus::Optimal) offer(engine.solution());
            } catch (const SolverError&) {
            }
        }
        engine.restore_root_bounds();
    }

    std::vector<double> pc_sum[2] = {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    std::vector<long> pc_cnt[2] = {std::vector<long>(n, 0), std::vector<long>(n, 0)};

    auto choose = [&](const std::vector<std::pair<int, double>>& frac) -> std::pair<int, double> {
        std::pair<int, double> pick = frac.front();
        double best = -1.0;
        for (const auto& [j, v] : frac) {
            const double f = v - std::floor(v);
            double score = std::min(f, 1.0 - f);
            if (options.branching == Branching::PseudoCost) {
                const auto col = static_cast<std::size_t>(j);
                if (pc_cnt[0][col] > 0 && pc_cnt[1][col] > 0) {
                    const double down = pc_sum[0][col] / static_cast<double>(pc_cnt[0][col]) * f;
                    const double up = pc_sum[1][col] / static_cast<double>(pc_cnt[1][col]) * (1.0 - f);
                    score = 1.0 + std::max(down, 1e-6) * std::max(up, 1e-6);
                }
            }
            if (score > best + 1e-12) {
                best = score;
                pick = {j, v};
            }
        }
        return pick;
    };

    auto worse = [&](const BbNode& a, const BbNode& b) {
        if (options.node_selection == NodeSelection::DepthFirst) {
            if (a.depth != b.depth) return a.depth < b.depth;
            return a.id > b.id;
        }
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.id > b.id;
    };
    std::priority_queue<BbNode, std::vector<BbNode>, decltype(worse)> open(worse);

    long next_id = 0;
    BbNode first;
    first.id = next_id++;
    first.bound = root_bound;
    first.basis = root_basis;
    open.push(std::move(first));

    auto open_bound = [&]() {
        if (open.empty()) return -kInf;
        if (options.node_selection == NodeSelection::BestBound) return open.top().bound;
        auto copy = open;
        double b = -kInf;
        while (!copy.empty()) {
            b = std::max(b, copy.top().bound);
            copy.pop();
        }
        return b;
    };

    bool limited = false;
    bool unsolved = false;
    while (!open.empty()) {
        if (out.nodes >= options.node_limit) {
            limited = true;
            break;
        }
        if (options.time_limit_s &&
            std::chrono::duration<double>(Clock::now() - start).count() > *options.time_limit_s) {
            limited = true;
            break;
        }
        BbNode node = open.top();
        open.pop();
        if (can_prune(node.bound)) {
            pruned_bound = std::max(pruned_bound, node.bound);
            continue;
        }
        ++out.nodes;

        engine.restore_root_bounds();
        for (const BoundChange& c : node.changes)
            engine.set_column_bounds(static_cast<std::size_t>(c.column), c.lower, c.upper);
        engine.load_basis(node.basis);
        LpStatus st;
        try {
            st = run_lp(true);
        } catch (const SolverError&) {
            st = LpStatus::IterationLimit;
        }
        if (st == LpStatus::Infeasible) continue;
        if (st != LpStatus::Optimal) {
            // An unsolved node keeps its inherited bound.
            pruned_bound = std::max(pruned_bound, node.bound);
            unsolved = true;
            continue;
        }
        const std::vector<double> x = engine.solution();
        const double z = std::min(node.bound, problem.evaluate_objective(x));

        if (node.branch_column >= 0) {
            const auto col = static_cast<std::size_t>(node.branch_column);
            const int side = node.branch_up ? 1 : 0;
            const double dist = node.branch_up ? 1.0 - node.branch_frac : node.branch_frac;
            if (dist > 1e-9) {
                pc_sum[side][col] += std::max(0.0, node.bound - z) / dist;
                ++pc_cnt[side][col];
            }
        }

        if (can_prune(z)) {
            pruned_bound = std::max(pruned_bound, z);
            continue;
        }
        const auto frac = fractional_columns(x);
        if (frac.empty()) {
            offer(x);
            if (options.verbose)
                std::fprintf(stderr, "NODE %ld BOUND %.10g INCUMBENT %.10g GAP %.3e\n", out.nodes,
                             std::max(open_bound(), incumbent), incumbent,
                             relative_gap(std::max(open_bound(), incumbent), incumbent));
            continue;
        }

        const auto [col, value] = choose(frac);
        const auto [lo, hi] = engine.column_bounds(static_cast<std::size_t>(col));
        const Basis basis = engine.basis();
        for (int up = 0; up < 2; ++up) {
            BbNode child;
            child.id = next_id++;
            child.depth = node.depth + 1;
            child.bound = z;
            child.changes = node.changes;
            if (up)
                child.changes.push_back({col, std::ceil(value), hi});
            else
                child.changes.push_back({col, lo, std::floor(value)});
            child.basis = basis;
            child.branch_column = col;
            child.branch_up = up == 1;
            child.branch_frac = value - std::floor(value);
            open.push(std::move(child));
        }

        if (options.verbose && out.nodes % 100 == 0)
            std::fprintf(stderr, "NODE %ld BOUND %.10g INCUMBENT %.10g GAP %.3e\n", out.nodes,
                         std::max(open_bound(), incumbent), incumbent,
                         std::isfinite(incumbent) ? relative_gap(open_bound(), incumbent) : kInf);
    }

    out.lp_iterations = engine.iterations();
    out.limit_reached = limited;
    double bound = std::max(open_bound(), pruned_bound);
    if (std::isfinite(incumbent)) {
        bound = std::max(bound, incumbent);
        out.objective = incumbent;
        out.x = best_x;
        out.bound = bound;
        out.gap = relative_gap(bound, incumbent);
        out.status = limited ? SolveStatus::Feasible : SolveStatus::Optimal;
        if (unsolved && !can_prune(bound)) {
            out.status = SolveStatus::Feasible;
            out.limit_reached = true;
        }
    } else {
        out.bound = bound;
        out.status = limited ? SolveStatus::NoSolution : SolveStatus::Infeasible;
    }
    if (options.verbose)
        std::fprintf(stderr, "NODE %ld BOUND %.10g INCUMBENT %.10g GAP %.3e\n", out.nodes, out.bound,
                     out.objective, out.gap);
    return out;
}

/// Dispatches to the relaxation when the problem has no integer columns.
inline SolveResult solve(const MilpProblem& problem, const SolveOptions& options = {}) {
    return problem.has_integers() ? solve_milp(problem, options) : solve_lp(problem);
}

}  // namespace vaxnet::milp
