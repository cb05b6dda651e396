#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "gbest/data.hpp"
#include "gbest/error.hpp"
#include "gbest/estimators.hpp"

namespace gbest {

struct EvaluationResult {
    double ibs = 0.0;
    StepFunction per_time_brier;
    double horizon = 0.0;  // 0.8 * max observed test time
};

namespace detail {

// Graf-style IPCW Brier score at time t for precomputed per-subject curves.
// Subjects whose required censoring weight vanishes are dropped from both
// numerator and denominator; subjects censored before t contribute zero.
inline double brier_at(const std::vector<StepFunction>& curves, const Dataset& test, double t,
                       const StepFunction& censor_model) {
    double total = 0.0;
    std::size_t included = 0;
    for (std::size_t i = 0; i < test.n(); ++i) {
        const auto& r = test.record(i);
        const double s = curves[i](t);
        if (r.time <= t && r.event) {
            const double g = censor_model.eval_left(r.time);
            if (!(g > 0.0)) continue;
            total += s * s / g;
            ++included;
        } else if (r.time > t) {
            const double g = censor_model(t);
            if (!(g > 0.0)) continue;
            total += (1.0 - s) * (1.0 - s) / g;
            ++included;
        } else {
            ++included;  // censored at or before t: weight 0, still counted
        }
    }
    return included > 0 ? total / static_cast<double>(included) : 0.0;
}

}  // namespace detail

// BS(t) for a predictor mapping a covariate vector to a survival curve.
// censor_model is the Kaplan-Meier of the censoring distribution on the
// evaluation data.
template <class Predict>
double brier_score(Predict&& predict, const Dataset& test, double t, const StepFunction& censor_model) {
    if (!(t >= 0.0)) throw Error("brier_score: t must be nonnegative");
    std::vector<StepFunction> curves;
    curves.reserve(test.n());
    for (const auto& r : test.records()) curves.push_back(predict(r.covariates));
    return detail::brier_at(curves, test, t, censor_model);
}

// Integrated Brier Score over [0, 0.8 * max test time], integrated exactly on
// the union grid of prediction knots, censoring knots and test times.
template <class Predict>
EvaluationResult integrated_brier(Predict&& predict, const Dataset& test, const StepFunction& censor_model) {
    const double horizon = 0.8 * test.max_time();
    if (!(horizon > 0.0)) throw Error("integrated_brier: all test times are zero");

    std::vector<StepFunction> curves;
    curves.reserve(test.n());
    for (const auto& r : test.records()) curves.push_back(predict(r.covariates));

    std::vector<double> grid;
    grid.push_back(0.0);
    for (const auto& r : test.records()) grid.push_back(r.time);
    for (const auto& c : curves)
        for (double k : c.knots()) grid.push_back(k);
    for (double k : censor_model.knots()) grid.push_back(k);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    while (!grid.empty() && grid.back() >= horizon) grid.pop_back();

    std::vector<double> bs(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
        bs[g] = detail::brier_at(curves, test, grid[g], censor_model);

    double integral = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double hi = g + 1 < grid.size() ? grid[g + 1] : horizon;
        integral += bs[g] * (hi - grid[g]);
    }

    EvaluationResult out;
    out.horizon = horizon;
    out.ibs = integral / horizon;
    std::vector<double> knots(grid.begin() + 1, grid.end());
    std::vector<double> values(bs.begin() + 1, bs.end());
    out.per_time_brier = StepFunction(std::move(knots), std::move(values), bs.empty() ? 0.0 : bs.front());
    return out;
}

// Convenience overload: censoring model fitted on the test fold itself.
template <class Predict>
EvaluationResult integrated_brier(Predict&& predict, const Dataset& test) {
    return integrated_brier(std::forward<Predict>(predict), test,
                            censoring_km(std::span<const TimeToEventRecord>(test.records())));
}

// log(p / (1-p)) with the argument clamped to [1e-6, 1 - 1e-6].
inline double logit(double p) {
    const double q = std::clamp(p, 1e-6, 1.0 - 1e-6);
    return std::log(q / (1.0 - q));
}

// Type-7 linear-interpolation quantile of a sorted sample.
inline double quantile_type7(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw Error("quantile: empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double h = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

struct SummaryStats {
    double mean = 0.0;
    double median = 0.0;
    double q05 = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double q95 = 0.0;
    double sd = 0.0;
};

inline SummaryStats summarize(std::span<const double> values) {
    if (values.empty()) throw Error("summarize: empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    SummaryStats s;
    double sum = 0.0;
    for (double v : sorted) sum += v;
    s.mean = sum / static_cast<double>(sorted.size());
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.sd = sorted.size() > 1 ? std::sqrt(ss / static_cast<double>(sorted.size() - 1)) : 0.0;
    s.median = quantile_type7(sorted, 0.5);
    s.q05 = quantile_type7(sorted, 0.05);
    s.q25 = quantile_type7(sorted, 0.25);
    s.q75 = quantile_type7(sorted, 0.75);
    s.q95 = quantile_type7(sorted, 0.95);
    return s;
}

inline SummaryStats summarize(const std::vector<double>& values) {
    return summarize(std::span<const double>(values));
}

}  // namespace gbest
