#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "vaxnet/milp/lu.hpp"
#include "vaxnet/milp/problem.hpp"

namespace vaxnet::milp {

class SolverError : public Error {
public:
    using Error::Error;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpOptions {
    double primal_tol = 1e-9;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    std::size_t refactor_interval = 50;
    int degenerate_threshold = 50;
    long iteration_limit = 0;  // 0: chosen from the problem size
    bool scale = true;
};

enum class VarState : std::int8_t { Basic, AtLower, AtUpper, Free };

struct Basis {
    std::vector<int> head;
    std::vector<VarState> state;
    bool operator==(const Basis&) const = default;
};

/// Bounded revised simplex over the rows A x - s = 0, l <= (x, s) <= u.
///
/// Columns 0..n-1 are the structurals of the source problem and n..n+m-1
/// the row logicals. The engine minimises internally; objective() reports
/// the source problem's maximisation value. Data are scaled by powers of
/// two, so scaling itself introduces no rounding.
class SimplexEngine {
public:
    explicit SimplexEngine(const MilpProblem& problem, LpOptions options = {}) : opt_(options) {
        problem.check();
        n_ = problem.columns();
        m_ = problem.rows.size();
        build(problem);
        cold_start();
    }

    std::size_t rows() const { return m_; }
    std::size_t structurals() const { return n_; }
    long iterations() const { return total_iterations_; }

    void cold_start() {
        head_.resize(m_);
        state_.assign(n_ + m_, VarState::AtLower);
        for (std::size_t i = 0; i < m_; ++i) {
            head_[i] = static_cast<int>(n_ + i);
            state_[n_ + i] = VarState::Basic;
        }
        for (std::size_t j = 0; j < n_; ++j) place_nonbasic(j);
        factored_ = false;
    }

    /// Changes a structural column's bounds (source units).
    void set_column_bounds(std::size_t j, double lower, double upper) {
        lb_[j] = lower / col_scale_[j];
        ub_[j] = upper / col_scale_[j];
        if (state_[j] != VarState::Basic) place_nonbasic(j);
    }

    std::pair<double, double> column_bounds(std::size_t j) const {
        return {lb_[j] * col_scale_[j], ub_[j] * col_scale_[j]};
    }

    void restore_root_bounds() {
        lb_ = root_lb_;
        ub_ = root_ub_;
        for (std::size_t j = 0; j < n_ + m_; ++j)
            if (state_[j] != VarState::Basic) place_nonbasic(j);
    }

    Basis basis() const { return {head_, state_}; }

    void load_basis(const Basis& b) {
        if (b.head.size() != m_ || b.state.size() != n_ + m_) throw SolverError("basis shape mismatch");
        head_ = b.head;
        state_ = b.state;
        for (std::size_t j = 0; j < n_ + m_; ++j)
            if (state_[j] != VarState::Basic) place_nonbasic(j);
        factored_ = false;
    }

    /// Structural values in source units.
    std::vector<double> solution() const {
        std::vector<double> x(n_);
        for (std::size_t j = 0; j < n_; ++j) x[j] = x_[j] * col_scale_[j];
        return x;
    }

    double objective() const {
        double z = 0.0;
        for (std::size_t j = 0; j < n_; ++j) z += source_cost_[j] * x_[j] * col_scale_[j];
        return z;
    }

    /// Solves from the current basis: dual simplex when the basis is dual
    /// feasible but primal infeasible, composite primal simplex otherwise.
    LpStatus solve() {
        iterations_ = 0;
        limit_ = opt_.iteration_limit > 0 ? opt_.iteration_limit : static_cast<long>(50 * (n_ + m_) + 10000);
        refactor();
        compute_primal();
        bool dual_tried = false;
        for (int round = 0; round < 5; ++round) {
            if (!dual_tried && max_primal_infeasibility() > opt_.primal_tol && dual_feasible()) {
                dual_tried = true;
                // An infeasibility verdict from the dual is left to phase 1 to confirm.
                dual_loop();
            }
            const LpStatus st = primal_loop();
            if (st != LpStatus::Optimal) return st;
            refactor();
            compute_primal();
            if (max_primal_infeasibility() <= 10 * opt_.primal_tol && dual_feasible()) return LpStatus::Optimal;
        }
        return LpStatus::Optimal;
    }

private:
    // ---------------------------------------------------------------- setup
    void build(const MilpProblem& p) {
        std::vector<std::vector<std::pair<std::size_t, double>>> cols(n_);
        for (std::size_t i = 0; i < m_; ++i)
            for (const Term& t : p.rows[i].terms) cols[static_cast<std::size_t>(t.column)].emplace_back(i, t.coef);

        row_scale_.assign(m_, 1.0);
        col_scale_.assign(n_, 1.0);
        if (opt_.scale) {
            for (int pass = 0; pass < 6; ++pass) {
                std::vector<double> rmin(m_, kInf), rmax(m_, 0.0);
                for (std::size_t j = 0; j < n_; ++j)
                    for (auto [i, a] : cols[j]) {
                        const double v = std::abs(a) * row_scale_[i] * col_scale_[j];
                        rmin[i] = std::min(rmin[i], v);
                        rmax[i] = std::max(rmax[i], v);
                    }
                for (std::size_t i = 0; i < m_; ++i)
                    if (rmax[i] > 0.0) row_scale_[i] *= pow2(1.0 / std::sqrt(rmin[i] * rmax[i]));
                for (std::size_t j = 0; j < n_; ++j) {
                    double cmin = kInf, cmax = 0.0;
                    for (auto [i, a] : cols[j]) {
                        const double v = std::abs(a) * row_scale_[i] * col_scale_[j];
                        cmin = std::min(cmin, v);
                        cmax = std::max(cmax, v);
                    }
                    if (cmax > 0.0) col_scale_[j] *= pow2(1.0 / std::sqrt(cmin * cmax));
                }
            }
        }

        col_start_.assign(n_ + 1, 0);
        for (std::size_t j = 0; j < n_; ++j) {
            col_start_[j + 1] = col_start_[j] + cols[j].size();
            for (auto [i, a] : cols[j]) {
                row_idx_.push_back(i);
                val_.push_back(a * row_scale_[i] * col_scale_[j]);
            }
        }

        lb_.assign(n_ + m_, 0.0);
        ub_.assign(n_ + m_, 0.0);
        cost_.assign(n_ + m_, 0.0);
        source_cost_ = p.objective;
        double cmax = 0.0;
        for (std::size_t j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(p.objective[j] * col_scale_[j]));
        obj_scale_ = cmax > 0.0 ? pow2(1.0 / cmax) : 1.0;
        for (std::size_t j = 0; j < n_; ++j) {
            lb_[j] = p.variables[j].lower / col_scale_[j];
            ub_[j] = p.variables[j].upper / col_scale_[j];
            cost_[j] = -p.objective[j] * col_scale_[j] * obj_scale_;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const Row& r = p.rows[i];
            const double rhs = r.rhs * row_scale_[i];
            lb_[n_ + i] = r.sense == RowSense::LessEqual ? -kInf : rhs;
            ub_[n_ + i] = r.sense == RowSense::GreaterEqual ? kInf : rhs;
        }
        root_lb_ = lb_;
        root_ub_ = ub_;
        x_.assign(n_ + m_, 0.0);
    }

    static double pow2(double v) { return std::exp2(std::round(std::log2(v))); }

    void place_nonbasic(std::size_t j) {
        const bool lo = std::isfinite(lb_[j]);
        const bool hi = std::isfinite(ub_[j]);
        VarState s = state_[j];
        if (s == VarState::AtUpper && !hi) s = lo ? VarState::AtLower : VarState::Free;
        if (s == VarState::AtLower && !lo) s = hi ? VarState::AtUpper : VarState::Free;
        if (s == VarState::Free && (lo || hi)) s = lo ? VarState::AtLower : VarState::AtUpper;
        state_[j] = s;
        x_[j] = s == VarState::AtLower ? lb_[j] : s == VarState::AtUpper ? ub_[j] : 0.0;
    }

    template <class F>
    void for_column(std::size_t j, F&& f) const {
        if (j < n_) {
            for (std::size_t p = col_start_[j]; p < col_start_[j + 1]; ++p) f(row_idx_[p], val_[p]);
        } else {
            f(j - n_, -1.0);
        }
    }

    double dot_column(const std::vector<double>& y, std::size_t j) const {
        if (j >= n_) return -y[j - n_];
        double s = 0.0;
        for (std::size_t p = col_start_[j]; p < col_start_[j + 1]; ++p) s += y[row_idx_[p]] * val_[p];
        return s;
    }

    bool fixed(std::size_t j) const { return lb_[j] == ub_[j]; }

    // ------------------------------------------------------- factorisation
    void refactor() {
        for (std::size_t attempt = 0; attempt <= m_; ++attempt) {
            std::vector<double> dense(m_ * m_, 0.0);
            for (std::size_t k = 0; k < m_; ++k)
                for_column(static_cast<std::size_t>(head_[k]), [&](std::size_t i, double a) { dense[k * m_ + i] = a; });
            const std::size_t bad = factor_.factorize(std::move(dense), m_);
            if (bad == m_) {
                factored_ = true;
                return;
            }
            repair(bad);
        }
        std::ostringstream os;
        os << "singular basis could not be repaired (condition estimate " << factor_.condition_estimate() << ")";
        throw SolverError(os.str());
    }

    /// Swaps the dependent basis column at `pos` for an unused row logical.
    void repair(std::size_t pos) {
        std::vector<char> logical_basic(m_, 0);
        for (int h : head_)
            if (static_cast<std::size_t>(h) >= n_) logical_basic[static_cast<std::size_t>(h) - n_] = 1;
        std::vector<char> covered(m_, 0);
        for (std::size_t k = 0; k < pos; ++k) {
            const auto h = static_cast<std::size_t>(head_[k]);
            if (h >= n_) covered[h - n_] = 1;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (logical_basic[i]) continue;
            const auto out = static_cast<std::size_t>(head_[pos]);
            head_[pos] = static_cast<int>(n_ + i);
            state_[n_ + i] = VarState::Basic;
            state_[out] = std::abs(x_[out] - lb_[out]) <= std::abs(x_[out] - ub_[out]) ? VarState::AtLower : VarState::AtUpper;
            place_nonbasic(out);
            return;
        }
        std::ostringstream os;
        os << "singular basis with no free logical (condition estimate " << factor_.condition_estimate() << ")";
        throw SolverError(os.str());
    }

    void compute_primal() {
        std::vector<double> rhs(m_, 0.0);
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
            const double v = x_[j];
            for_column(j, [&](std::size_t i, double a) { rhs[i] -= a * v; });
        }
        factor_.ftran(rhs);
        for (std::size_t k = 0; k < m_; ++k) x_[static_cast<std::size_t>(head_[k])] = rhs[k];
    }

    double infeasibility(std::size_t j) const { return std::max({0.0, lb_[j] - x_[j], x_[j] - ub_[j]}); }

    double max_primal_infeasibility() const {
        double w = 0.0;
        for (int h : head_) w = std::max(w, infeasibility(static_cast<std::size_t>(h)));
        return w;
    }

    std::vector<double> duals() const {
        std::vector<double> y(m_);
        for (std::size_t k = 0; k < m_; ++k) y[k] = cost_[static_cast<std::size_t>(head_[k])];
        factor_.btran(y);
        return y;
    }

    bool dual_feasible() const {
        const auto y = duals();
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (state_[j] == VarState::Basic || fixed(j)) continue;
            const double d = cost_[j] - dot_column(y, j);
            if (state_[j] == VarState::AtLower && d < -opt_.dual_tol) return false;
            if (state_[j] == VarState::AtUpper && d > opt_.dual_tol) return false;
            if (state_[j] == VarState::Free && std::abs(d) > opt_.dual_tol) return false;
        }
        return true;
    }

    void pivot(std::size_t r, std::size_t enter, const std::vector<double>& alpha) {
        head_[r] = static_cast<int>(enter);
        state_[enter] = VarState::Basic;
        factor_.update(r, alpha);
        if (std::abs(alpha[r]) < 1e-7 || factor_.eta_count() >= opt_.refactor_interval) {
            refactor();
            compute_primal();
        }
    }

    // ------------------------------------------------------------- primal
    LpStatus primal_loop() {
        const double ptol = opt_.primal_tol;
        const double dtol = opt_.dual_tol;
        int degenerate_run = 0;
        bool bland = false;
        std::vector<double> cb(m_), alpha(m_);
        while (true) {
            if (++iterations_ > limit_) return LpStatus::IterationLimit;
            ++total_iterations_;

            bool phase1 = false;
            for (std::size_t k = 0; k < m_; ++k) {
                const auto b = static_cast<std::size_t>(head_[k]);
                if (x_[b] < lb_[b] - ptol) {
                    cb[k] = -1.0;
                    phase1 = true;
                } else if (x_[b] > ub_[b] + ptol) {
                    cb[k] = 1.0;
                    phase1 = true;
                } else {
                    cb[k] = 0.0;
                }
            }
            if (!phase1)
                for (std::size_t k = 0; k < m_; ++k) cb[k] = cost_[static_cast<std::size_t>(head_[k])];
            std::vector<double> y = cb;
            factor_.btran(y);

            std::size_t enter = n_ + m_;
            int dir = 0;
            double best = 0.0;
            for (std::size_t j = 0; j < n_ + m_; ++j) {
                if (state_[j] == VarState::Basic || fixed(j)) continue;
                const double d = (phase1 ? 0.0 : cost_[j]) - dot_column(y, j);
                int dj = 0;
                if (state_[j] == VarState::AtLower && d < -dtol) dj = 1;
                else if (state_[j] == VarState::AtUpper && d > dtol) dj = -1;
                else if (state_[j] == VarState::Free && std::abs(d) > dtol) dj = d < 0 ? 1 : -1;
                if (dj == 0) continue;
                if (bland) {
                    enter = j;
                    dir = dj;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    enter = j;
                    dir = dj;
                }
            }
            if (enter == n_ + m_) return phase1 ? LpStatus::Infeasible : LpStatus::Optimal;

            std::fill(alpha.begin(), alpha.end(), 0.0);
            for_column(enter, [&](std::size_t i, double a) { alpha[i] = a; });
            factor_.ftran(alpha);

            // Harris two-pass ratio test; basic variable k moves by delta_k * theta.
            auto limit = [&](std::size_t k, double tol, bool& to_lower) -> double {
                const auto b = static_cast<std::size_t>(head_[k]);
                const double delta = -dir * alpha[k];
                const double v = x_[b];
                if (phase1 && v < lb_[b] - ptol) {
                    to_lower = true;
                    return delta > 0 ? (lb_[b] - v + tol) / delta : kInf;
                }
                if (phase1 && v > ub_[b] + ptol) {
                    to_lower = false;
                    return delta < 0 ? (v - ub_[b] + tol) / -delta : kInf;
                }
                if (delta < 0 && std::isfinite(lb_[b])) {
                    to_lower = true;
                    return (v - lb_[b] + tol) / -delta;
                }
                if (delta > 0 && std::isfinite(ub_[b])) {
                    to_lower = false;
                    return (ub_[b] - v + tol) / delta;
                }
                return kInf;
            };
            const double flip = std::isfinite(lb_[enter]) && std::isfinite(ub_[enter]) ? ub_[enter] - lb_[enter] : kInf;
            std::size_t r = m_;
            bool r_to_lower = false;
            double theta = kInf;
            if (bland) {
                for (std::size_t k = 0; k < m_; ++k) {
                    if (std::abs(alpha[k]) <= opt_.pivot_tol) continue;
                    bool tl = false;
                    const double lim = std::max(0.0, limit(k, 0.0, tl));
                    if (lim < theta - 1e-12 ||
                        (lim <= theta + 1e-12 && r < m_ && head_[k] < head_[r])) {
                        theta = lim;
                        r = k;
                        r_to_lower = tl;
                    }
                }
            } else {
                double theta_max = kInf;
                for (std::size_t k = 0; k < m_; ++k) {
                    if (std::abs(alpha[k]) <= opt_.pivot_tol) continue;
                    bool tl = false;
                    theta_max = std::min(theta_max, limit(k, ptol, tl));
                }
                double best_pivot = 0.0;
                for (std::size_t k = 0; k < m_; ++k) {
                    if (std::abs(alpha[k]) <= opt_.pivot_tol) continue;
                    bool tl = false;
                    const double lim = limit(k, 0.0, tl);
                    if (lim <= theta_max && std::abs(alpha[k]) > best_pivot) {
                        best_pivot = std::abs(alpha[k]);
                        r = k;
                        r_to_lower = tl;
                        theta = std::max(0.0, lim);
                    }
                }
            }

            if (flip <= theta) {
                theta = flip;
                r = m_;
            }
            if (!std::isfinite(theta)) {
                if (!phase1) return LpStatus::Unbounded;
                bland = true;  // numerically inconsistent direction; retry conservatively
                refactor();
                compute_primal();
                continue;
            }

            x_[enter] += dir * theta;
            for (std::size_t k = 0; k < m_; ++k) x_[static_cast<std::size_t>(head_[k])] -= dir * alpha[k] * theta;
            if (r == m_) {
                state_[enter] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
                x_[enter] = dir > 0 ? ub_[enter] : lb_[enter];
            } else {
                const auto leave = static_cast<std::size_t>(head_[r]);
                state_[leave] = r_to_lower ? VarState::AtLower : VarState::AtUpper;
                x_[leave] = r_to_lower ? lb_[leave] : ub_[leave];
                pivot(r, enter, alpha);
            }

            if (theta <= 1e-12) {
                if (++degenerate_run > opt_.degenerate_threshold) bland = true;
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    // --------------------------------------------------------------- dual
    /// Dual simplex on perturbed costs; the primal pass that follows
    /// restores optimality for the true costs.
    LpStatus dual_loop() {
        const std::vector<double> true_cost = cost_;
        for (std::size_t j = 0; j < n_; ++j) {
            if (state_[j] == VarState::Basic || fixed(j)) continue;
            const double frac = static_cast<double>((j * 2654435761u) % 1024u) / 1024.0;
            const double delta = 1e-6 * (1.0 + std::abs(cost_[j])) * (0.5 + frac);
            if (state_[j] == VarState::AtLower) cost_[j] += delta;
            else if (state_[j] == VarState::AtUpper) cost_[j] -= delta;
        }
        const LpStatus st = dual_iterations();
        cost_ = true_cost;
        return st;
    }

    LpStatus dual_iterations() {
        const double ptol = opt_.primal_tol;
        const double dtol = opt_.dual_tol;
        const long dual_limit = iterations_ + static_cast<long>(20 * (n_ + m_) + 1000);
        std::vector<double> rho(m_), alpha(m_);
        while (true) {
            if (++iterations_ > std::min(limit_, dual_limit)) return LpStatus::IterationLimit;
            ++total_iterations_;

            std::size_t r = m_;
            double worst = ptol;
            for (std::size_t k = 0; k < m_; ++k) {
                const double inf = infeasibility(static_cast<std::size_t>(head_[k]));
                if (inf > worst) {
                    worst = inf;
                    r = k;
                }
            }
            if (r == m_) return LpStatus::Optimal;
            const auto leave = static_cast<std::size_t>(head_[r]);
            const bool to_lower = x_[leave] < lb_[leave];

            std::fill(rho.begin(), rho.end(), 0.0);
            rho[r] = 1.0;
            factor_.btran(rho);
            const auto y = duals();

            struct Candidate {
                std::size_t j;
                double a;
                double ratio;
            };
            std::vector<Candidate> cands;
            double theta_max = kInf;
            for (std::size_t j = 0; j < n_ + m_; ++j) {
                if (state_[j] == VarState::Basic || fixed(j)) continue;
                const double a = dot_column(rho, j);
                if (std::abs(a) <= opt_.pivot_tol) continue;
                const VarState s = state_[j];
                bool ok = false;
                if (to_lower)
                    ok = (s == VarState::AtLower && a < 0) || (s == VarState::AtUpper && a > 0) || s == VarState::Free;
                else
                    ok = (s == VarState::AtLower && a > 0) || (s == VarState::AtUpper && a < 0) || s == VarState::Free;
                if (!ok) continue;
                const double d = cost_[j] - dot_column(y, j);
                const double signed_d = s == VarState::AtUpper ? -d : s == VarState::Free ? std::abs(d) : d;
                const double ratio = std::max(0.0, signed_d) / std::abs(a);
                theta_max = std::min(theta_max, (std::max(0.0, signed_d) + dtol) / std::abs(a));
                cands.push_back({j, a, ratio});
            }
            if (cands.empty()) return worst > 1e-7 ? LpStatus::Infeasible : LpStatus::Optimal;
            std::size_t q = cands.front().j;
            double best_pivot = 0.0;
            for (const auto& c : cands)
                if (c.ratio <= theta_max && std::abs(c.a) > best_pivot) {
                    best_pivot = std::abs(c.a);
                    q = c.j;
                }

            std::fill(alpha.begin(), alpha.end(), 0.0);
            for_column(q, [&](std::size_t i, double a) { alpha[i] = a; });
            factor_.ftran(alpha);
            if (std::abs(alpha[r]) <= opt_.pivot_tol) {
                refactor();
                compute_primal();
                continue;
            }
            const double bound = to_lower ? lb_[leave] : ub_[leave];
            const double step = (x_[leave] - bound) / alpha[r];
            x_[q] += step;
            for (std::size_t k = 0; k < m_; ++k) x_[static_cast<std::size_t>(head_[k])] -= step * alpha[k];
            state_[leave] = to_lower ? VarState::AtLower : VarState::AtUpper;
            x_[leave] = bound;
            pivot(r, q, alpha);
        }
    }

    LpOptions opt_;
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<std::size_t> col_start_;
    std::vector<std::size_t> row_idx_;
    std::vector<double> val_;
    std::vector<double> row_scale_, col_scale_;
    std::vector<double> lb_, ub_, root_lb_, root_ub_;
    std::vector<double> cost_, source_cost_;
    double obj_scale_ = 1.0;

    std::vector<int> head_;
    std::vector<VarState> state_;
    std::vector<double> x_;
    BasisFactor factor_;
    bool factored_ = false;
    long iterations_ = 0;
    long limit_ = 0;
    long total_iterations_ = 0;
};

}  // namespace vaxnet::milp
