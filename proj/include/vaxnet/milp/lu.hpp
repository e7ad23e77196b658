#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace vaxnet::milp {

/// Dense LU factorisation with partial (row) pivoting, followed by a
/// product-form eta file for basis updates between refactorisations.
class BasisFactor {
public:
    struct Eta {
        std::size_t pivot_row = 0;
        double pivot = 1.0;                                  // 1 / alpha_r
        std::vector<std::pair<std::size_t, double>> column;  // -alpha_i / alpha_r, i != r
    };

    /// Factorises the m x m matrix given column-major in `dense`.
    /// Returns the basis position of the first dependent column, or m on success.
    std::size_t factorize(std::vector<double> dense, std::size_t m, double singular_tol = 1e-11) {
        m_ = m;
        lu_ = std::move(dense);
        perm_.resize(m);
        for (std::size_t i = 0; i < m; ++i) perm_[i] = i;
        etas_.clear();
        max_pivot_ = 0.0;
        min_pivot_ = m ? std::numeric_limits<double>::infinity() : 0.0;
        double scale = 0.0;
        for (double v : lu_) scale = std::max(scale, std::abs(v));
        if (scale == 0.0) scale = 1.0;
        std::vector<std::size_t> nz;
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t p = k;
            double best = std::abs(at(k, k));
            for (std::size_t i = k + 1; i < m; ++i) {
                const double v = std::abs(at(i, k));
                if (v > best) {
                    best = v;
                    p = i;
                }
            }
            if (best <= singular_tol * scale) return k;
            max_pivot_ = std::max(max_pivot_, best);
            min_pivot_ = std::min(min_pivot_, best);
            if (p != k) {
                for (std::size_t j = 0; j < m; ++j) std::swap(at(k, j), at(p, j));
                std::swap(perm_[k], perm_[p]);
            }
            const double pivot = at(k, k);
            nz.clear();
            for (std::size_t i = k + 1; i < m; ++i)
                if (at(i, k) != 0.0) {
                    at(i, k) /= pivot;
                    nz.push_back(i);
                }
            if (nz.empty()) continue;
            const double* lk = &lu_[k * m_];
            for (std::size_t j = k + 1; j < m; ++j) {
                const double ukj = at(k, j);
                if (ukj == 0.0) continue;
                double* col = &lu_[j * m_];
                for (std::size_t i : nz) col[i] -= lk[i] * ukj;
            }
        }
        compress();
        return m;
    }

    /// Ratio of the largest to the smallest LU pivot.
    double condition_estimate() const { return min_pivot_ > 0.0 ? max_pivot_ / min_pivot_ : std::numeric_limits<double>::infinity(); }
    std::size_t eta_count() const { return etas_.size(); }

    /// Overwrites `v` with B^{-1} v.
    void ftran(std::span<double> v) const {
        std::vector<double> w(m_);
        for (std::size_t k = 0; k < m_; ++k) w[k] = v[perm_[k]];
        for (std::size_t k = 0; k < m_; ++k) {
            const double wk = w[k];
            if (wk == 0.0) continue;
            for (const auto& [i, val] : lcol_[k]) w[i] -= val * wk;
        }
        for (std::size_t k = m_; k-- > 0;) {
            if (w[k] == 0.0) continue;
            w[k] /= diag_[k];
            const double wk = w[k];
            for (const auto& [i, val] : ucol_[k]) w[i] -= val * wk;
        }
        for (const Eta& e : etas_) {
            const double xr = w[e.pivot_row];
            if (xr == 0.0) continue;
            w[e.pivot_row] = e.pivot * xr;
            for (const auto& [i, val] : e.column) w[i] += val * xr;
        }
        std::copy(w.begin(), w.end(), v.begin());
    }

    /// Overwrites `v` with B^{-T} v.
    void btran(std::span<double> v) const {
        std::vector<double> z(v.begin(), v.end());
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = it->pivot * z[it->pivot_row];
            for (const auto& [i, val] : it->column) s += val * z[i];
            z[it->pivot_row] = s;
        }
        // U^T w = z
        for (std::size_t k = 0; k < m_; ++k) {
            double s = z[k];
            for (const auto& [i, val] : ucol_[k]) s -= val * z[i];
            z[k] = s / diag_[k];
        }
        // L^T u = w
        for (std::size_t k = m_; k-- > 0;) {
            double s = z[k];
            for (const auto& [i, val] : lcol_[k]) s -= val * z[i];
            z[k] = s;
        }
        for (std::size_t k = 0; k < m_; ++k) v[perm_[k]] = z[k];
    }

    /// Records the basis change at `row` given the FTRAN'd entering column.
    void update(std::size_t row, std::span<const double> alpha) {
        Eta e;
        e.pivot_row = row;
        e.pivot = 1.0 / alpha[row];
        for (std::size_t i = 0; i < m_; ++i)
            if (i != row && alpha[i] != 0.0) e.column.emplace_back(i, -alpha[i] / alpha[row]);
        etas_.push_back(std::move(e));
    }

private:
    // Nonzeros of the factors by column, for the triangular solves.
    void compress() {
        lcol_.assign(m_, {});
        ucol_.assign(m_, {});
        diag_.assign(m_, 0.0);
        for (std::size_t k = 0; k < m_; ++k) {
            const double* c = &lu_[k * m_];
            for (std::size_t i = 0; i < k; ++i)
                if (c[i] != 0.0) ucol_[k].emplace_back(i, c[i]);
            diag_[k] = c[k];
            for (std::size_t i = k + 1; i < m_; ++i)
                if (c[i] != 0.0) lcol_[k].emplace_back(i, c[i]);
        }
    }

    double& at(std::size_t i, std::size_t j) { return lu_[j * m_ + i]; }
    double at(std::size_t i, std::size_t j) const { return lu_[j * m_ + i]; }

    std::size_t m_ = 0;
    std::vector<double> lu_;
    std::vector<std::size_t> perm_;
    std::vector<Eta> etas_;
    std::vector<std::vector<std::pair<std::size_t, double>>> lcol_, ucol_;
    std::vector<double> diag_;
    double max_pivot_ = 0.0;
    double min_pivot_ = 0.0;
};

}  // namespace vaxnet::milp
