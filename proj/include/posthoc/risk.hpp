#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "posthoc/errors.hpp"
#include "posthoc/problem.hpp"
#include "posthoc/testfam.hpp"

namespace posthoc {

/// A map from support points to scenario indices: the post-hoc selection of
/// a loss after seeing the data.
struct Adversary {
    std::vector<std::size_t> choice;

    std::size_t size() const { return choice.size(); }
};

inline Adversary constant_adversary(std::size_t b, std::size_t n_points, std::size_t n_scenarios) {
    if (b >= n_scenarios) throw Error(Errc::ScenarioNotFound, "scenario index out of range");
    Adversary a;
    a.choice.assign(n_points, b);
    return a;
}

struct RiskReport {
    double type1_risk = 0.0;
    Adversary witness;                          // achieves the worst case
    std::vector<double> per_point_contribution;  // max_b L_b(0,1) * entry(x,b)
};

/// Worst-case expected type-I loss over all adversaries. The inner sup over
/// maps decomposes pointwise on a finite support, so the witness is the
/// per-point argmax scenario (smallest index on ties).
inline RiskReport type1_risk(const TestFamily& t, const FiniteDistribution& null_dist,
                             const LossFamily& l) {
    if (t.n_points != null_dist.size() || t.n_scenarios != l.size())
        throw Error(Errc::DimensionMismatch, "family does not match distribution or losses");
    RiskReport r;
    r.witness.choice.resize(t.n_points);
    r.per_point_contribution.resize(t.n_points);
    for (std::size_t x = 0; x < t.n_points; ++x) {
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t b = 0; b < t.n_scenarios; ++b) {
            const double v = l.type1[b] * t(x, b);
            if (v > best) {
                best = v;
                arg = b;
            }
        }
        r.per_point_contribution[x] = best;
        r.witness.choice[x] = arg;
        r.type1_risk += null_dist.mass[x] * best;
    }
    return r;
}

inline RiskReport type1_risk(const TestFamily& t, const TestingProblem& p) {
    return type1_risk(t, p.null_dist, p.losses);
}

inline bool is_type1_risk_safe(const TestFamily& t, const TestingProblem& p, double tol = kProbTol) {
    return type1_risk(t, p).type1_risk <= 1.0 + tol;
}

/// Composite null: the outer sup over a finite list of null distributions.
inline double type1_risk_composite(const TestFamily& t,
                                   const std::vector<FiniteDistribution>& nulls,
                                   const LossFamily& l) {
    if (nulls.empty()) throw Error(Errc::InvalidArgument, "empty null list");
    double worst = 0.0;
    for (const auto& d : nulls) worst = std::max(worst, type1_risk(t, d, l).type1_risk);
    return worst;
}

inline double risk_under_adversary(const TestFamily& t, const Adversary& a,
                                   const TestingProblem& p) {
    if (a.size() != t.n_points || t.n_points != p.n_points())
        throw Error(Errc::DimensionMismatch, "adversary does not match family shape");
    double s = 0.0;
    for (std::size_t x = 0; x < t.n_points; ++x) {
        const std::size_t b = a.choice[x];
        if (b >= t.n_scenarios) throw Error(Errc::ScenarioNotFound, "adversary picks a missing scenario");
        s += p.null_dist.mass[x] * p.losses.type1[b] * t(x, b);
    }
    return s;
}

/// Expected type-II loss under Q with the adversary's per-point loss choice,
/// using L_b(1, delta) = L_b(1,0) (1 - delta).
inline double type2_risk(const TestFamily& t, const Adversary& a, const FiniteDistribution& q,
                         const LossFamily& l) {
    if (a.size() != t.n_points || t.n_points != q.size())
        throw Error(Errc::DimensionMismatch, "adversary does not match family shape");
    double s = 0.0;
    for (std::size_t x = 0; x < t.n_points; ++x) {
        const std::size_t b = a.choice[x];
        if (b >= t.n_scenarios) throw Error(Errc::ScenarioNotFound, "adversary picks a missing scenario");
        s += q.mass[x] * l.type2[b] * (1.0 - t(x, b));
    }
    return s;
}

/// E_Q[delta(X, b)] per scenario.
inline std::vector<double> power_curve(const TestFamily& t, const FiniteDistribution& q) {
    if (t.n_points != q.size())
        throw Error(Errc::DimensionMismatch, "family does not match distribution");
    std::vector<double> power(t.n_scenarios, 0.0);
    for (std::size_t b = 0; b < t.n_scenarios; ++b)
        for (std::size_t x = 0; x < t.n_points; ++x) power[b] += q.mass[x] * t(x, b);
    return power;
}

struct PreferenceMargins {
    double weak = 0.0;    // min over adversary maps of the type-II risk gap
    double strict = 0.0;  // max over adversary maps of the type-II risk gap
};

/// Decides preference of phi over delta with respect to the full adversary
/// class: phi is weakly preferable iff weak >= 0, strictly preferable iff
/// additionally strict > 0. Maps choose scenarios independently per point,
/// so the min and max over maps decompose pointwise.
inline PreferenceMargins u_preference_margins(const TestFamily& phi, const TestFamily& delta,
                                              const FiniteDistribution& q, const LossFamily& l) {
    if (phi.n_points != delta.n_points || phi.n_scenarios != delta.n_scenarios ||
        phi.n_points != q.size() || phi.n_scenarios != l.size())
        throw Error(Errc::DimensionMismatch, "families do not match in shape");
    PreferenceMargins m;
    for (std::size_t x = 0; x < phi.n_points; ++x) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < phi.n_scenarios; ++b) {
            const double gap = l.type2[b] * (phi(x, b) - delta(x, b));
            lo = std::min(lo, gap);
            hi = std::max(hi, gap);
        }
        m.weak += q.mass[x] * lo;
        m.strict += q.mass[x] * hi;
    }
    return m;
}

}  // namespace posthoc
