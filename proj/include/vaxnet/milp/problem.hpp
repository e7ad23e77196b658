#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vaxnet/model.hpp"

namespace vaxnet::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Domain { Continuous, Integer, Binary };
enum class RowSense { LessEqual, Equal, GreaterEqual };

struct Variable {
    std::string name;
    Domain domain = Domain::Continuous;
    double lower = 0.0;
    double upper = kInf;

    bool is_integral() const { return domain != Domain::Continuous; }
    bool operator==(const Variable&) const = default;
};

struct Term {
    int column = 0;
    double coef = 0.0;
    bool operator==(const Term&) const = default;
};

struct Row {
    std::string name;
    std::vector<Term> terms;  // sorted by column, no duplicates, no zeros
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;

    bool operator==(const Row&) const = default;
};

/// A linear program over bounded columns, always maximised.
struct MilpProblem {
    std::string name = "problem";
    std::vector<Variable> variables;
    std::vector<double> objective;  // one entry per variable
    std::vector<Row> rows;

    bool operator==(const MilpProblem&) const = default;

    std::size_t columns() const { return variables.size(); }

    int add_variable(std::string var_name, Domain domain, double lower = 0.0, double upper = kInf,
                     double cost = 0.0) {
        if (domain == Domain::Binary) {
            lower = std::max(lower, 0.0);
            upper = std::min(upper, 1.0);
        }
        variables.push_back({std::move(var_name), domain, lower, upper});
        objective.push_back(cost);
        return static_cast<int>(variables.size() - 1);
    }

    /// Adds a row after merging duplicate columns and dropping exact zeros.
    std::size_t add_row(std::string row_name, std::vector<Term> terms, RowSense sense, double rhs) {
        std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.column < b.column; });
        std::vector<Term> merged;
        for (const Term& t : terms) {
            if (t.column < 0 || static_cast<std::size_t>(t.column) >= variables.size())
                throw Error("row " + row_name + " references an undeclared column");
            if (!merged.empty() && merged.back().column == t.column)
                merged.back().coef += t.coef;
            else
                merged.push_back(t);
        }
        std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
        rows.push_back({std::move(row_name), std::move(merged), sense, rhs});
        return rows.size() - 1;
    }

    bool has_integers() const {
        return std::any_of(variables.begin(), variables.end(), [](const Variable& v) { return v.is_integral(); });
    }

    double evaluate_objective(const std::vector<double>& x) const {
        double z = 0.0;
        for (std::size_t j = 0; j < objective.size(); ++j) z += objective[j] * x[j];
        return z;
    }

    double activity(std::size_t row, const std::vector<double>& x) const {
        double a = 0.0;
        for (const Term& t : rows[row].terms) a += t.coef * x[static_cast<std::size_t>(t.column)];
        return a;
    }

    /// Largest bound or row violation of `x`, in the problem's own units.
    double max_violation(const std::vector<double>& x) const {
        double worst = 0.0;
        for (std::size_t j = 0; j < variables.size(); ++j) {
            worst = std::max(worst, variables[j].lower - x[j]);
            worst = std::max(worst, x[j] - variables[j].upper);
        }
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const double a = activity(r, x);
            switch (rows[r].sense) {
            case RowSense::LessEqual: worst = std::max(worst, a - rows[r].rhs); break;
            case RowSense::GreaterEqual: worst = std::max(worst, rows[r].rhs - a); break;
            case RowSense::Equal: worst = std::max(worst, std::abs(a - rows[r].rhs)); break;
            }
        }
        return worst;
    }

    /// Coefficients must reference declared columns and be finite; bounds must be ordered.
    void check() const {
        if (objective.size() != variables.size()) throw Error("objective length differs from column count");
        for (std::size_t j = 0; j < variables.size(); ++j) {
            const auto& v = variables[j];
            if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper || v.lower == kInf || v.upper == -kInf)
                throw Error("column " + v.name + " has inconsistent bounds");
            if (!std::isfinite(objective[j])) throw Error("column " + v.name + " has a non-finite cost");
        }
        for (const auto& row : rows) {
            if (!std::isfinite(row.rhs)) throw Error("row " + row.name + " has a non-finite right-hand side");
            for (const auto& t : row.terms) {
                if (t.column < 0 || static_cast<std::size_t>(t.column) >= variables.size())
                    throw Error("row " + row.name + " references an undeclared column");
                if (!std::isfinite(t.coef)) throw Error("row " + row.name + " has a non-finite coefficient");
            }
        }
    }
};

}  // namespace vaxnet::milp
