#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "posthoc/errors.hpp"
#include "posthoc/problem.hpp"

namespace posthoc {

/// Nonnegative evidence value per support point. The e-variable contract
/// (null expectation at most 1) is relative to a distribution and is checked
/// by the operations that need it, not at construction.
struct EVariable {
    std::vector<double> values;

    EVariable() = default;
    explicit EVariable(std::vector<double> v) : values(std::move(v)) {
        for (double x : values)
            if (!(x >= 0.0)) throw Error(Errc::InvalidArgument, "e-variable values must be nonnegative");
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Likelihood-ratio threshold and randomization weight of a calibrated test:
/// reject outright above kappa, with probability gamma at kappa.
struct NPCalibration {
    double kappa = 0.0;
    double gamma = 0.0;

    double reject_prob(double lambda) const {
        if (lambda > kappa) return 1.0;
        if (lambda == kappa) return gamma;
        return 0.0;
    }
};

inline double ev_mean(const EVariable& e, const FiniteDistribution& d) {
    if (e.size() != d.size())
        throw Error(Errc::DimensionMismatch, "e-variable and distribution lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += d.mass[i] * e.values[i];
    return s;
}

inline bool is_sharp(const EVariable& e, const TestingProblem& p, double tol = kProbTol) {
    return std::abs(ev_mean(e, p.null_dist) - 1.0) <= tol;
}

/// The likelihood ratio as an e-variable (it is sharp whenever P and Q are
/// mutually absolutely continuous).
inline EVariable lr_evariable(const TestingProblem& p) { return EVariable(p.lr); }

/// Chooses (kappa, gamma) so that P(Lambda > kappa) + gamma P(Lambda = kappa)
/// equals `target`. kappa is always an attained Lambda value: the largest one
/// whose closed upper tail still holds at least `target` P-mass.
inline NPCalibration np_calibrate(const TestingProblem& p, double target) {
    if (!(target > 0.0 && target <= 1.0))
        throw Error(Errc::InvalidArgument, "rejection target must lie in (0, 1]");
    // Aggregate P-mass per distinct Lambda value, descending.
    std::map<double, double, std::greater<double>> tail;
    for (std::size_t i = 0; i < p.n_points(); ++i)
        if (p.null_dist.mass[i] > 0.0) tail[p.lr[i]] += p.null_dist.mass[i];
    double above = 0.0;  // P(Lambda > kappa candidate)
    for (const auto& [lambda, mass] : tail) {
        if (above + mass >= target - kMassTol) {
            NPCalibration c;
            c.kappa = lambda;
            c.gamma = mass > 0.0 ? std::clamp((target - above) / mass, 0.0, 1.0) : 0.0;
            return c;
        }
        above += mass;
    }
    // target exceeds all available mass only through rounding; reject everywhere.
    NPCalibration c;
    c.kappa = tail.empty() ? 0.0 : tail.rbegin()->first;
    c.gamma = 1.0;
    return c;
}

/// E^NP for scenario b*: the type-I loss spent on the calibrated likelihood
/// ratio test, L_{b*}(0,1) * phi^NP(x, b*). Sharp by construction.
inline EVariable np_evariable(const TestingProblem& p, std::size_t b_star) {
    if (b_star >= p.n_scenarios())
        throw Error(Errc::ScenarioNotFound, "scenario index " + std::to_string(b_star) + " out of range");
    const double loss = p.losses.type1[b_star];
    if (loss < 1.0)
        throw Error(Errc::InvalidArgument, "np_evariable needs L_{b*}(0,1) >= 1");
    const NPCalibration cal = np_calibrate(p, 1.0 / loss);
    std::vector<double> v(p.n_points());
    for (std::size_t i = 0; i < p.n_points(); ++i) v[i] = loss * cal.reject_prob(p.lr[i]);
    return EVariable(std::move(v));
}

inline EVariable mixture_evariable(const std::vector<EVariable>& parts,
                                   const std::vector<double>& weights) {
    if (parts.empty() || parts.size() != weights.size())
        throw Error(Errc::BadWeights, "need one weight per mixture component");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw Error(Errc::BadWeights, "mixture weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > kProbTol)
        throw Error(Errc::BadWeights, "mixture weights must sum to 1");
    const std::size_t n = parts.front().size();
    std::vector<double> v(n, 0.0);
    for (std::size_t k = 0; k < parts.size(); ++k) {
        if (parts[k].size() != n)
            throw Error(Errc::DimensionMismatch, "mixture components differ in length");
        for (std::size_t i = 0; i < n; ++i) v[i] += weights[k] * parts[k].values[i];
    }
    return EVariable(std::move(v));
}

/// Conditional expectation of e given the sigma-field of a statistic, under
/// the null: within each statistic class the value becomes the P-weighted
/// class average. Preserves the null mean (law of total expectation).
inline EVariable rao_blackwellize(const EVariable& e, const std::vector<std::string>& statistic,
                                  const TestingProblem& p) {
    if (e.size() != p.n_points() || statistic.size() != p.n_points())
        throw Error(Errc::DimensionMismatch, "e-variable/statistic/support lengths differ");
    std::map<std::string, std::pair<double, double>> acc;  // label -> (sum P*e, sum P)
    for (std::size_t i = 0; i < p.n_points(); ++i) {
        auto& [num, den] = acc[statistic[i]];
        num += p.null_dist.mass[i] * e.values[i];
        den += p.null_dist.mass[i];
    }
    for (const auto& [label, nd] : acc)
        if (nd.second <= 0.0)
            throw Error(Errc::EmptyClass, "statistic class '" + label + "' has zero P-mass");
    std::vector<double> v(p.n_points());
    for (std::size_t i = 0; i < p.n_points(); ++i) {
        const auto& [num, den] = acc[statistic[i]];
        v[i] = num / den;
    }
    return EVariable(std::move(v));
}

/// Support-point order for spending evidence budget: decreasing likelihood
/// ratio, ties broken by index so results are deterministic.
inline std::vector<std::size_t> decreasing_lr_order(const TestingProblem& p) {
    std::vector<std::size_t> order(p.n_points());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p.lr[a] > p.lr[b]; });
    return order;
}

/// Raises e pointwise until its null mean is exactly 1, placing the slack on
/// support points in decreasing-Lambda order. With `cap_at_loss_span` the
/// raised values stop at max(loss span) and the remainder moves down the
/// order; uncapped, the highest-Lambda point absorbs everything.
inline EVariable sharpen(const EVariable& e, const TestingProblem& p,
                         bool cap_at_loss_span = false) {
    const double mean = ev_mean(e, p.null_dist);
    if (mean > 1.0 + kProbTol)
        throw Error(Errc::InvalidArgument, "cannot sharpen: null mean already exceeds 1");
    double slack = 1.0 - mean;
    if (slack <= 0.0) return e;
    const double cap =
        cap_at_loss_span ? loss_span(p.losses).back() : std::numeric_limits<double>::infinity();
    std::vector<double> v = e.values;
    for (std::size_t i : decreasing_lr_order(p)) {
        if (slack <= 0.0) break;
        const double pm = p.null_dist.mass[i];
        if (pm <= 0.0) continue;
        const double headroom = cap - v[i];
        if (headroom <= 0.0) continue;
        const double raise = std::min(headroom, slack / pm);
        v[i] += raise;
        slack -= raise * pm;
    }
    return EVariable(std::move(v));
}

/// Rounds every value down to the loss span (or 0), then spends the freed
/// type-I budget in decreasing-Lambda order on full steps up to the next
/// span element. Leftover budget too small for any full step is discarded,
/// so the output mean never exceeds the input mean (up to roundoff).
inline EVariable compatibilize(const EVariable& e, const TestingProblem& p) {
    if (e.size() != p.n_points())
        throw Error(Errc::DimensionMismatch, "e-variable and support lengths differ");
    const std::vector<double> span = loss_span(p.losses);
    auto round_down = [&](double x) {
        double best = 0.0;
        for (double s : span)
            if (s <= x + kMassTol) best = s;
        return best;
    };
    auto next_up = [&](double x) -> double {
        for (double s : span)
            if (s > x + kMassTol) return s;
        return std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<double> v(p.n_points());
    double budget = 0.0;
    for (std::size_t i = 0; i < p.n_points(); ++i) {
        v[i] = round_down(e.values[i]);
        budget += p.null_dist.mass[i] * (e.values[i] - v[i]);
    }
    for (std::size_t i : decreasing_lr_order(p)) {
        const double pm = p.null_dist.mass[i];
        if (pm <= 0.0) continue;
        for (double up = next_up(v[i]); !std::isnan(up); up = next_up(v[i])) {
            const double cost = pm * (up - v[i]);
            if (cost > budget + kMassTol) break;
            budget -= cost;
            v[i] = up;
        }
    }
    return EVariable(std::move(v));
}

inline bool is_compatible(const EVariable& e, const LossFamily& l, double tol = kProbTol) {
    const std::vector<double> span = loss_span(l);
    for (double x : e.values) {
        bool ok = std::abs(x) <= tol;
        for (double s : span) ok = ok || std::abs(x - s) <= tol;
        if (!ok) return false;
    }
    return true;
}

/// True when e is a nondecreasing function of the likelihood ratio:
/// constant (up to tol) within each Lambda-tie group and nondecreasing
/// across strictly increasing Lambda groups.
inline bool is_monotone_in_lr(const EVariable& e, const TestingProblem& p, double tol = kProbTol) {
    if (e.size() != p.n_points())
        throw Error(Errc::DimensionMismatch, "e-variable and support lengths differ");
    std::map<double, std::pair<double, double>> groups;  // Lambda -> (min e, max e)
    for (std::size_t i = 0; i < p.n_points(); ++i) {
        auto it = groups.find(p.lr[i]);
        if (it == groups.end()) {
            groups.emplace(p.lr[i], std::make_pair(e.values[i], e.values[i]));
        } else {
            it->second.first = std::min(it->second.first, e.values[i]);
            it->second.second = std::max(it->second.second, e.values[i]);
        }
    }
    double prev_max = -std::numeric_limits<double>::infinity();
    for (const auto& [lambda, mm] : groups) {
        if (mm.second - mm.first > tol) return false;        // unequal within a tie group
        if (mm.first < prev_max - tol) return false;         // decreasing across groups
        prev_max = std::max(prev_max, mm.second);
    }
    return true;
}

}  // namespace posthoc
