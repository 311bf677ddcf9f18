#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "posthoc/errors.hpp"

namespace posthoc {

inline constexpr double kMassTol = 1e-12;   // mass-sum / exact-identity tolerance
inline constexpr double kProbTol = 1e-9;    // default tolerance on probabilities and expectations

/// Probability mass function on an indexed finite support.
struct FiniteDistribution {
    std::vector<std::string> labels;
    std::vector<double> mass;

    FiniteDistribution() = default;
    FiniteDistribution(std::vector<std::string> labels_, std::vector<double> mass_)
        : labels(std::move(labels_)), mass(std::move(mass_)) {
        validate();
    }

    std::size_t size() const { return mass.size(); }

    void validate() const {
        if (labels.size() != mass.size())
            throw Error(Errc::DimensionMismatch, "labels and mass differ in length");
        double total = 0.0;
        for (double m : mass) {
            if (!(m >= 0.0)) throw Error(Errc::InvalidArgument, "negative or NaN mass entry");
            total += m;
        }
        if (std::abs(total - 1.0) > kMassTol)
            throw Error(Errc::InvalidArgument, "masses sum to " + std::to_string(total) + ", not 1");
        std::set<std::string> seen(labels.begin(), labels.end());
        if (seen.size() != labels.size())
            throw Error(Errc::InvalidArgument, "support labels are not unique");
    }
};

/// Indexed scenarios b with type-I losses L_b(0,1) and type-II losses L_b(1,0).
/// L_b(0,0) = L_b(1,1) = 0 implicitly.
struct LossFamily {
    std::vector<double> scenarios;  // ascending
    std::vector<double> type1;      // > 0, nondecreasing in scenario order, some entry > 1
    std::vector<double> type2;      // >= 0

    LossFamily() = default;
    LossFamily(std::vector<double> b, std::vector<double> t1, std::vector<double> t2)
        : scenarios(std::move(b)), type1(std::move(t1)), type2(std::move(t2)) {
        validate();
    }

    std::size_t size() const { return scenarios.size(); }

    void validate() const {
        if (scenarios.empty()) throw Error(Errc::InvalidArgument, "empty scenario set");
        if (type1.size() != scenarios.size() || type2.size() != scenarios.size())
            throw Error(Errc::DimensionMismatch, "scenario/type1/type2 lengths differ");
        bool any_above_one = false;
        for (std::size_t j = 0; j < scenarios.size(); ++j) {
            if (j > 0 && !(scenarios[j] > scenarios[j - 1]))
                throw Error(Errc::InvalidArgument, "scenario indices must be strictly ascending");
            if (j > 0 && type1[j] < type1[j - 1])
                throw Error(Errc::InvalidArgument, "type-I losses must be nondecreasing in b");
            if (!(type1[j] > 0.0)) throw Error(Errc::InvalidArgument, "type-I losses must be positive");
            if (!(type2[j] >= 0.0)) throw Error(Errc::InvalidArgument, "type-II losses must be nonnegative");
            if (type1[j] > 1.0) any_above_one = true;
        }
        if (!any_above_one)
            throw Error(Errc::InvalidArgument, "no scenario with L_b(0,1) > 1; always-reject would be risk safe");
    }
};

/// Sorted, deduplicated set of attained type-I losses.
inline std::vector<double> loss_span(const LossFamily& l) {
    std::vector<double> span = l.type1;
    std::sort(span.begin(), span.end());
    span.erase(std::unique(span.begin(), span.end()), span.end());
    return span;
}

/// Point null P vs point alternative Q on a shared finite support. Points
/// carrying no mass under either measure are dropped at construction; points
/// with mass under exactly one measure are kept and surfaced by
/// validate_problem.
struct TestingProblem {
    FiniteDistribution null_dist;  // P
    FiniteDistribution alt_dist;   // Q
    LossFamily losses;
    std::vector<double> lr;        // Lambda(x) = Q(x)/P(x); +inf where P(x) = 0

    TestingProblem() = default;
    TestingProblem(FiniteDistribution p, FiniteDistribution q, LossFamily l)
        : losses(std::move(l)) {
        if (p.labels != q.labels)
            throw Error(Errc::DimensionMismatch, "null and alternative must share support labels");
        p.validate();
        q.validate();
        l_trim(std::move(p), std::move(q));
        lr.reserve(null_dist.size());
        for (std::size_t i = 0; i < null_dist.size(); ++i) {
            lr.push_back(null_dist.mass[i] > 0.0
                             ? alt_dist.mass[i] / null_dist.mass[i]
                             : std::numeric_limits<double>::infinity());
        }
    }

    std::size_t n_points() const { return null_dist.size(); }
    std::size_t n_scenarios() const { return losses.size(); }

  private:
    void l_trim(FiniteDistribution p, FiniteDistribution q) {
        std::vector<std::string> labels;
        std::vector<double> pm, qm;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p.mass[i] > 0.0 || q.mass[i] > 0.0) {
                labels.push_back(p.labels[i]);
                pm.push_back(p.mass[i]);
                qm.push_back(q.mass[i]);
            }
        }
        if (labels.empty()) throw Error(Errc::EmptySupport, "no point carries mass under P or Q");
        null_dist.labels = labels;
        null_dist.mass = std::move(pm);
        alt_dist.labels = std::move(labels);
        alt_dist.mass = std::move(qm);
    }
};

/// Forced decisions and the trimmed common support of a testing problem.
struct ValidationReport {
    std::vector<std::size_t> forced_reject;   // P(x) = 0 < Q(x): reject for all b
    std::vector<std::size_t> forced_sustain;  // Q(x) = 0 < P(x): sustain for all b
    std::vector<std::size_t> common_support;  // P(x) > 0 and Q(x) > 0

    bool has_forced_points() const { return !forced_reject.empty() || !forced_sustain.empty(); }
};

/// Callers of admissibility checks must apply the forced decisions listed here.
inline ValidationReport validate_problem(const TestingProblem& p) {
    ValidationReport r;
    for (std::size_t i = 0; i < p.n_points(); ++i) {
        const double pm = p.null_dist.mass[i];
        const double qm = p.alt_dist.mass[i];
        if (pm == 0.0 && qm > 0.0)
            r.forced_reject.push_back(i);
        else if (qm == 0.0 && pm > 0.0)
            r.forced_sustain.push_back(i);
        else
            r.common_support.push_back(i);
    }
    return r;
}

/// Likelihood ratio Q(x)/P(x). Throws ZeroNullMass where P(x) = 0; per the
/// forced-decision rule such points must be rejected at every loss.
inline double likelihood_ratio(const TestingProblem& p, std::size_t x) {
    if (x >= p.n_points()) throw Error(Errc::InvalidArgument, "point index out of range");
    if (p.null_dist.mass[x] == 0.0)
        throw Error(Errc::ZeroNullMass, "P(x) = 0 at '" + p.null_dist.labels[x] + "'");
    return p.alt_dist.mass[x] / p.null_dist.mass[x];
}

/// Midpoint-quadrature discretization of a pair of densities onto a cell
/// grid. The grid is a list of cell boundaries (ascending). Masses are
/// renormalized to sum to 1, so the result approximates the continuous
/// problem with error vanishing as the grid refines.
inline TestingProblem discretize_continuous(const std::function<double(double)>& density_null,
                                            const std::function<double(double)>& density_alt,
                                            const std::vector<double>& grid,
                                            LossFamily losses) {
    if (grid.size() < 2) throw Error(Errc::InvalidArgument, "grid needs at least two boundaries");
    const std::size_t cells = grid.size() - 1;
    std::vector<std::string> labels(cells);
    std::vector<double> pm(cells), qm(cells);
    double ptot = 0.0, qtot = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        const double lo = grid[i], hi = grid[i + 1];
        if (!(hi > lo)) throw Error(Errc::InvalidArgument, "grid boundaries must be ascending");
        const double mid = 0.5 * (lo + hi);
        const double w = hi - lo;
        const double fp = density_null(mid);
        const double fq = density_alt(mid);
        if (!(fp >= 0.0) || !(fq >= 0.0))
            throw Error(Errc::InvalidArgument, "densities must be nonnegative on the grid");
        pm[i] = fp * w;
        qm[i] = fq * w;
        ptot += pm[i];
        qtot += qm[i];
        labels[i] = "c" + std::to_string(i);
    }
    if (ptot < kMassTol) throw Error(Errc::NonpositiveTotalMass, "null density integrates to ~0 over the grid");
    if (qtot < kMassTol) throw Error(Errc::NonpositiveTotalMass, "alt density integrates to ~0 over the grid");
    for (std::size_t i = 0; i < cells; ++i) {
        pm[i] /= ptot;
        qm[i] /= qtot;
    }
    return TestingProblem(FiniteDistribution(labels, pm), FiniteDistribution(labels, qm),
                          std::move(losses));
}

// ---------------------------------------------------------------------------
// Named desk-scale fixtures.

namespace fixtures {

/// Scenario grid b = 1..n with L_b(0,1) = b and L_b(1,0) = 1.
inline LossFamily grid_losses(std::size_t n = 100) {
    std::vector<double> b(n), t1(n), t2(n, 1.0);
    for (std::size_t j = 0; j < n; ++j) b[j] = t1[j] = static_cast<double>(j + 1);
    return LossFamily(std::move(b), std::move(t1), std::move(t2));
}

/// {x1,x2}, P = (0.5, 0.5), Q = (0.2, 0.8), losses (2, 4), type-II (1, 1).
inline TestingProblem tp1() {
    return TestingProblem(FiniteDistribution({"x1", "x2"}, {0.5, 0.5}),
                          FiniteDistribution({"x1", "x2"}, {0.2, 0.8}),
                          LossFamily({1, 2}, {2, 4}, {1, 1}));
}

/// {1..4}, P uniform, Q = (0.1, 0.2, 0.3, 0.4), Lambda = (0.4, 0.8, 1.2, 1.6).
inline TestingProblem u4(LossFamily losses = LossFamily({1, 2}, {2, 4}, {1, 1})) {
    return TestingProblem(FiniteDistribution({"1", "2", "3", "4"}, {0.25, 0.25, 0.25, 0.25}),
                          FiniteDistribution({"1", "2", "3", "4"}, {0.1, 0.2, 0.3, 0.4}),
                          std::move(losses));
}

/// Two-coordinate support, P uniform, Q the product of two Bernoulli(0.8)
/// coordinates. The sum statistic T groups {(0,1), (1,0)}.
inline TestingProblem rb1() {
    return TestingProblem(
        FiniteDistribution({"(0,0)", "(0,1)", "(1,0)", "(1,1)"}, {0.25, 0.25, 0.25, 0.25}),
        FiniteDistribution({"(0,0)", "(0,1)", "(1,0)", "(1,1)"}, {0.04, 0.16, 0.16, 0.64}),
        LossFamily({1, 2}, {2, 4}, {1, 1}));
}

/// Statistic labels for rb1's coordinate sum.
inline std::vector<std::string> rb1_sum_statistic() { return {"0", "1", "1", "2"}; }

inline double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * 3.14159265358979323846));
}

/// N(0,1) vs N(1,1) discretized on [lo, hi] with the given cell count.
inline TestingProblem normal_shift_grid(std::size_t cells = 400, double lo = -6.0, double hi = 7.0,
                                        LossFamily losses = grid_losses()) {
    std::vector<double> grid(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells);
    return discretize_continuous([](double x) { return normal_pdf(x, 0.0, 1.0); },
                                 [](double x) { return normal_pdf(x, 1.0, 1.0); }, grid,
                                 std::move(losses));
}

}  // namespace fixtures

}  // namespace posthoc
