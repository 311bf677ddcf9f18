#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "posthoc/errors.hpp"

namespace posthoc {

enum class RowSense { LessEq, GreaterEq, Eq };

/// Dense LP in the form: maximize c.x subject to A x {<=,>=,=} rhs and
/// lower <= x <= upper. Every variable must carry finite box bounds; the
/// instances built in this library are all box-constrained by construction.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<RowSense> senses;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t n_vars() const { return objective.size(); }
    std::size_t n_rows() const { return rows.size(); }

    void add_row(std::vector<double> coeffs, RowSense sense, double b) {
        rows.push_back(std::move(coeffs));
        senses.push_back(sense);
        rhs.push_back(b);
    }

    void validate() const {
        if (lower.size() != n_vars() || upper.size() != n_vars())
            throw Error(Errc::DimensionMismatch, "bounds do not match variable count");
        for (std::size_t j = 0; j < n_vars(); ++j) {
            if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || lower[j] > upper[j])
                throw Error(Errc::InvalidArgument, "variables must have finite, ordered box bounds");
            if (!std::isfinite(objective[j]))
                throw Error(Errc::InvalidArgument, "objective coefficients must be finite");
        }
        if (rhs.size() != n_rows() || senses.size() != n_rows())
            throw Error(Errc::DimensionMismatch, "row metadata does not match row count");
        for (std::size_t i = 0; i < n_rows(); ++i) {
            if (rows[i].size() != n_vars())
                throw Error(Errc::DimensionMismatch, "row " + std::to_string(i) + " has wrong width");
            for (double a : rows[i])
                if (!std::isfinite(a)) throw Error(Errc::InvalidArgument, "constraint entries must be finite");
            if (!std::isfinite(rhs[i])) throw Error(Errc::InvalidArgument, "rhs entries must be finite");
        }
    }
};

struct LpSolution {
    double value = 0.0;
    std::vector<double> x;
};

namespace detail {

inline constexpr double kLpPivotTol = 1e-9;
inline constexpr double kLpFeasTol = 1e-8;

/// Equality-form tableau: m rows plus an objective row (minimized), each of
/// width n_cols + 1 with the rhs in the last column. All variables >= 0.
struct Tableau {
    std::vector<std::vector<double>> rows;  // size m + 1
    std::vector<std::size_t> basis;         // size m
    std::size_t n_cols = 0;

    std::size_t m() const { return basis.size(); }

    void pivot(std::size_t row, std::size_t col) {
        const double piv = rows[row][col];
        for (std::size_t j = 0; j <= n_cols; ++j) rows[row][j] /= piv;
        for (std::size_t i = 0; i <= m(); ++i) {
            if (i == row) continue;
            const double f = rows[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_cols; ++j) rows[i][j] -= f * rows[row][j];
        }
        basis[row] = col;
    }

    // Primal simplex with Bland's rule for anti-cycling.
    void run() {
        auto& obj = rows[m()];
        for (;;) {
            std::size_t enter = n_cols;
            for (std::size_t j = 0; j < n_cols; ++j) {
                if (obj[j] < -kLpPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == n_cols) return;
            double min_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m(); ++i)
                if (rows[i][enter] > kLpPivotTol)
                    min_ratio = std::min(min_ratio, rows[i][n_cols] / rows[i][enter]);
            if (!std::isfinite(min_ratio))
                throw Error(Errc::Unbounded,
                            "no leaving row; an unbounded direction in a boxed LP is a modeling bug");
            std::size_t leave = m();
            for (std::size_t i = 0; i < m(); ++i) {
                if (rows[i][enter] <= kLpPivotTol) continue;
                const double ratio = rows[i][n_cols] / rows[i][enter];
                if (ratio <= min_ratio + kLpPivotTol &&
                    (leave == m() || basis[i] < basis[leave]))
                    leave = i;
            }
            pivot(leave, enter);
        }
    }
};

}  // namespace detail

/// Two-phase dense simplex, optimal within ~1e-8 on desk-scale instances.
inline LpSolution lp_solve(const LinearProgram& lp) {
    lp.validate();
    const std::size_t n = lp.n_vars();

    // Shift to y = x - lower >= 0; upper bounds become explicit rows.
    std::vector<std::vector<double>> rows = lp.rows;
    std::vector<double> rhs = lp.rhs;
    std::vector<RowSense> senses = lp.senses;
    for (std::size_t i = 0; i < lp.n_rows(); ++i) {
        double shift = 0.0;
        for (std::size_t j = 0; j < n; ++j) shift += lp.rows[i][j] * lp.lower[j];
        rhs[i] -= shift;
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> r(n, 0.0);
        r[j] = 1.0;
        rows.push_back(std::move(r));
        rhs.push_back(lp.upper[j] - lp.lower[j]);
        senses.push_back(RowSense::LessEq);
    }
    const std::size_t m = rows.size();

    // Normalize each row to nonnegative rhs, attach slack/surplus columns,
    // and give rows without a basic slack an artificial variable.
    std::size_t n_slack = 0;
    for (RowSense s : senses)
        if (s != RowSense::Eq) ++n_slack;
    const std::size_t n_struct = n + n_slack;

    std::vector<int> art_col(m, -1);
    std::size_t n_art = 0;
    {
        // Pre-count artificials to size the tableau.
        for (std::size_t i = 0; i < m; ++i) {
            RowSense s = senses[i];
            if (rhs[i] < 0.0) s = (s == RowSense::LessEq)   ? RowSense::GreaterEq
                              : (s == RowSense::GreaterEq) ? RowSense::LessEq
                                                           : RowSense::Eq;
            if (s != RowSense::LessEq) art_col[i] = static_cast<int>(n_struct + n_art++);
        }
    }
    const std::size_t n_cols = n_struct + n_art;

    detail::Tableau tab;
    tab.n_cols = n_cols;
    tab.rows.assign(m + 1, std::vector<double>(n_cols + 1, 0.0));
    tab.basis.assign(m, 0);

    std::size_t slack_col = n;
    for (std::size_t i = 0; i < m; ++i) {
        const double sign = rhs[i] < 0.0 ? -1.0 : 1.0;
        RowSense s = senses[i];
        if (sign < 0.0) s = (s == RowSense::LessEq)   ? RowSense::GreaterEq
                          : (s == RowSense::GreaterEq) ? RowSense::LessEq
                                                       : RowSense::Eq;
        for (std::size_t j = 0; j < n; ++j) tab.rows[i][j] = sign * rows[i][j];
        tab.rows[i][n_cols] = sign * rhs[i];
        if (senses[i] != RowSense::Eq) {
            tab.rows[i][slack_col] = s == RowSense::LessEq ? 1.0 : -1.0;
            if (s == RowSense::LessEq) tab.basis[i] = slack_col;
            ++slack_col;
        }
        if (art_col[i] >= 0) {
            const auto a = static_cast<std::size_t>(art_col[i]);
            tab.rows[i][a] = 1.0;
            tab.basis[i] = a;
        }
    }

    // Phase 1: minimize the sum of artificials.
    if (n_art > 0) {
        auto& obj = tab.rows[m];
        for (std::size_t j = n_struct; j < n_cols; ++j) obj[j] = 1.0;
        for (std::size_t i = 0; i < m; ++i)
            if (tab.basis[i] >= n_struct)
                for (std::size_t j = 0; j <= n_cols; ++j) obj[j] -= tab.rows[i][j];
        tab.run();
        if (tab.rows[m][n_cols] < -detail::kLpFeasTol)
            throw Error(Errc::Infeasible, "phase-1 optimum positive; constraints are inconsistent");
        // Pivot leftover artificials out of the basis where possible.
        for (std::size_t i = 0; i < m; ++i) {
            if (tab.basis[i] < n_struct) continue;
            std::size_t j = 0;
            for (; j < n_struct; ++j)
                if (std::abs(tab.rows[i][j]) > detail::kLpPivotTol) break;
            if (j < n_struct) tab.pivot(i, j);
        }
    }

    // Rebuild without artificial columns, dropping redundant rows whose
    // artificial could not be pivoted out (their rhs is necessarily ~0).
    detail::Tableau tab2;
    tab2.n_cols = n_struct;
    for (std::size_t i = 0; i < m; ++i) {
        if (tab.basis[i] >= n_struct) continue;
        std::vector<double> row(tab.rows[i].begin(), tab.rows[i].begin() + n_struct);
        row.push_back(tab.rows[i][n_cols]);
        tab2.rows.push_back(std::move(row));
        tab2.basis.push_back(tab.basis[i]);
    }

    // Phase 2: minimize -c.y.
    std::vector<double> obj(n_struct + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) obj[j] = -lp.objective[j];
    tab2.rows.push_back(std::move(obj));
    for (std::size_t i = 0; i < tab2.m(); ++i) {
        const double f = tab2.rows[tab2.m()][tab2.basis[i]];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j <= n_struct; ++j)
            tab2.rows[tab2.m()][j] -= f * tab2.rows[i][j];
    }
    tab2.run();

    LpSolution sol;
    sol.x.assign(n, 0.0);
    for (std::size_t i = 0; i < tab2.m(); ++i)
        if (tab2.basis[i] < n) sol.x[tab2.basis[i]] = tab2.rows[i][n_struct];
    for (std::size_t j = 0; j < n; ++j) {
        sol.x[j] += lp.lower[j];
        sol.x[j] = std::min(std::max(sol.x[j], lp.lower[j]), lp.upper[j]);
        sol.value += lp.objective[j] * sol.x[j];
    }
    return sol;
}

}  // namespace posthoc
