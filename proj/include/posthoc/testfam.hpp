#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "posthoc/errors.hpp"
#include "posthoc/evar.hpp"
#include "posthoc/problem.hpp"
#include "posthoc/rng.hpp"

namespace posthoc {

// Slack toward rejection for binary comparisons e(x) >= L_b(0,1):
// compatibilize produces values numerically equal to span members, and a
// strict comparison would flip those decisions on rounding noise.
inline constexpr double kBinarySlack = 1e-12;

enum class TestMode { Randomized, Binary };

/// Rejection probability per (support point, scenario). Binary families hold
/// entries in {0,1} only.
struct TestFamily {
    TestMode mode = TestMode::Randomized;
    std::size_t n_points = 0;
    std::size_t n_scenarios = 0;
    std::vector<double> entries;  // row-major: point * n_scenarios + scenario

    TestFamily() = default;
    TestFamily(TestMode m, std::size_t np, std::size_t ns, std::vector<double> cells)
        : mode(m), n_points(np), n_scenarios(ns), entries(std::move(cells)) {
        validate();
    }

    double operator()(std::size_t x, std::size_t b) const { return entries[x * n_scenarios + b]; }
    double& at(std::size_t x, std::size_t b) { return entries[x * n_scenarios + b]; }

    void validate() const {
        if (entries.size() != n_points * n_scenarios)
            throw Error(Errc::DimensionMismatch, "entry count does not match matrix shape");
        for (double v : entries) {
            if (!(v >= 0.0 && v <= 1.0))
                throw Error(Errc::InvalidArgument, "rejection probabilities must lie in [0, 1]");
            if (mode == TestMode::Binary && v != 0.0 && v != 1.0)
                throw Error(Errc::NotBinary, "binary family has a fractional entry");
        }
    }
};

/// Per-scenario likelihood-ratio thresholds t(b); +inf marks a scenario that
/// never rejects.
struct DecisionCurve {
    std::vector<double> thresholds;
};

/// delta_E(x, b) = min{1, e(x) / L_b(0,1)}.
inline TestFamily canonical_from_evariable(const EVariable& e, const TestingProblem& p) {
    if (e.size() != p.n_points())
        throw Error(Errc::DimensionMismatch, "e-variable and support lengths differ");
    std::vector<double> cells(p.n_points() * p.n_scenarios());
    for (std::size_t x = 0; x < p.n_points(); ++x)
        for (std::size_t b = 0; b < p.n_scenarios(); ++b)
            cells[x * p.n_scenarios() + b] = std::min(1.0, e.values[x] / p.losses.type1[b]);
    return TestFamily(TestMode::Randomized, p.n_points(), p.n_scenarios(), std::move(cells));
}

/// phi_E(x, b) = 1{L_b(0,1) <= e(x)}.
inline TestFamily binary_from_evariable(const EVariable& e, const TestingProblem& p) {
    if (e.size() != p.n_points())
        throw Error(Errc::DimensionMismatch, "e-variable and support lengths differ");
    std::vector<double> cells(p.n_points() * p.n_scenarios());
    for (std::size_t x = 0; x < p.n_points(); ++x)
        for (std::size_t b = 0; b < p.n_scenarios(); ++b)
            cells[x * p.n_scenarios() + b] =
                e.values[x] >= p.losses.type1[b] - kBinarySlack ? 1.0 : 0.0;
    return TestFamily(TestMode::Binary, p.n_points(), p.n_scenarios(), std::move(cells));
}

/// E_delta(x) = max over b of L_b(0,1) * entry(x, b).
inline EVariable induced_evariable(const TestFamily& t, const LossFamily& l) {
    if (t.n_scenarios != l.size())
        throw Error(Errc::DimensionMismatch, "family and loss family scenario counts differ");
    std::vector<double> v(t.n_points, 0.0);
    for (std::size_t x = 0; x < t.n_points; ++x)
        for (std::size_t b = 0; b < t.n_scenarios; ++b)
            v[x] = std::max(v[x], l.type1[b] * t(x, b));
    return EVariable(std::move(v));
}

/// The post-hoc extension of the likelihood ratio test calibrated at b*.
/// Randomized mode spreads the spent type-I loss across scenarios via the
/// canonical construction; binary mode rejects below b* exactly when the
/// calibrated test does, which requires the calibration to be deterministic.
inline TestFamily np_posthoc_family(const TestingProblem& p, std::size_t b_star, TestMode mode) {
    if (b_star >= p.n_scenarios())
        throw Error(Errc::ScenarioNotFound, "scenario index out of range");
    if (mode == TestMode::Randomized)
        return canonical_from_evariable(np_evariable(p, b_star), p);
    const NPCalibration cal = np_calibrate(p, 1.0 / p.losses.type1[b_star]);
    if (cal.gamma != 0.0 && cal.gamma != 1.0)
        throw Error(Errc::RandomizationRequired,
                    "the calibrated test randomizes (gamma = " + std::to_string(cal.gamma) +
                        ") on this discrete problem");
    std::vector<double> cells(p.n_points() * p.n_scenarios(), 0.0);
    for (std::size_t x = 0; x < p.n_points(); ++x) {
        const double reject = cal.reject_prob(p.lr[x]);
        for (std::size_t b = 0; b <= b_star; ++b) cells[x * p.n_scenarios() + b] = reject;
    }
    return TestFamily(TestMode::Binary, p.n_points(), p.n_scenarios(), std::move(cells));
}

/// Reads off t(b) = min{Lambda(x) : entry(x,b) = 1} per scenario, +inf for
/// all-zero columns. Each column must be a nondecreasing function of Lambda,
/// i.e. exactly the set {Lambda >= t(b)}.
inline DecisionCurve decision_curve(const TestFamily& t, const TestingProblem& p) {
    if (t.mode != TestMode::Binary) throw Error(Errc::NotBinary, "decision curves require a binary family");
    if (t.n_points != p.n_points() || t.n_scenarios != p.n_scenarios())
        throw Error(Errc::DimensionMismatch, "family does not match problem shape");
    DecisionCurve curve;
    curve.thresholds.assign(p.n_scenarios(), std::numeric_limits<double>::infinity());
    for (std::size_t b = 0; b < p.n_scenarios(); ++b) {
        double tau = std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < p.n_points(); ++x)
            if (t(x, b) == 1.0) tau = std::min(tau, p.lr[x]);
        for (std::size_t x = 0; x < p.n_points(); ++x) {
            const double expected = p.lr[x] >= tau ? 1.0 : 0.0;
            if (t(x, b) != expected)
                throw Error(Errc::NotMonotoneInLR,
                            "scenario " + std::to_string(b) +
                                " rejects at a lower likelihood ratio while sustaining higher");
        }
        curve.thresholds[b] = tau;
    }
    return curve;
}

/// One Bernoulli(entry) draw, fully determined by the seed. Callers own
/// reproducibility by deriving per-draw seeds.
inline int sample_decision(const TestFamily& t, std::size_t x, std::size_t b,
                           std::uint64_t rng_seed) {
    const double prob = t(x, b);
    if (prob <= 0.0) return 0;
    if (prob >= 1.0) return 1;
    CounterRng rng(rng_seed);
    return rng.next_unit() < prob ? 1 : 0;
}

/// True when rebuilding the family from its induced e-variable reproduces
/// every entry: the representation any admissible family must have.
inline bool is_canonical(const TestFamily& t, const TestingProblem& p, double tol = kProbTol) {
    const EVariable e = induced_evariable(t, p.losses);
    const TestFamily rebuilt = t.mode == TestMode::Randomized ? canonical_from_evariable(e, p)
                                                              : binary_from_evariable(e, p);
    for (std::size_t i = 0; i < t.entries.size(); ++i)
        if (std::abs(t.entries[i] - rebuilt.entries[i]) > tol) return false;
    return true;
}

}  // namespace posthoc
