#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "gbest/data.hpp"
#include "gbest/error.hpp"

namespace gbest {

namespace detail {

// Per distinct time: weighted event mass, weighted censoring mass, and the
// weighted at-risk total just before anything at that time is removed.
struct RiskTable {
    std::vector<double> times;
    std::vector<double> event_weight;
    std::vector<double> censor_weight;
    std::vector<double> at_risk;
};

inline RiskTable build_risk_table(std::span<const TimeToEventRecord> records) {
    struct Obs {
        double time;
        bool event;
        double weight;
    };
    std::vector<Obs> obs;
    obs.reserve(records.size());
    double total = 0.0;
    for (const auto& r : records) {
        if (r.weight < 0.0) throw Error("risk table: negative weight");
        if (r.weight == 0.0) continue;
        obs.push_back({r.time, r.event, r.weight});
        total += r.weight;
    }
    if (!(total > 0.0)) throw Error("risk table: all weights are zero");
    std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.time < b.time; });

    RiskTable t;
    double at_risk = total;
    std::size_t i = 0;
    while (i < obs.size()) {
        const double time = obs[i].time;
        double de = 0.0, dc = 0.0;
        while (i < obs.size() && obs[i].time == time) {
            (obs[i].event ? de : dc) += obs[i].weight;
            ++i;
        }
        t.times.push_back(time);
        t.event_weight.push_back(de);
        t.censor_weight.push_back(dc);
        t.at_risk.push_back(at_risk);
        at_risk -= de + dc;
    }
    return t;
}

}  // namespace detail

// Weighted Kaplan-Meier product-limit survival curve. At each distinct event
// time t the curve multiplies by (1 - dN_w(t)/Y_w(t)); censored-only times
// add no factor. At tied times, events and censorings at t are both in the
// risk set Y_w(t).
inline StepFunction kaplan_meier(std::span<const TimeToEventRecord> records) {
    const auto t = detail::build_risk_table(records);
    std::vector<double> knots, values;
    double s = 1.0;
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        if (t.event_weight[i] > 0.0) {
            s *= 1.0 - t.event_weight[i] / t.at_risk[i];
            knots.push_back(t.times[i]);
            values.push_back(s);
        }
    }
    return StepFunction(std::move(knots), std::move(values), 1.0);
}

inline StepFunction kaplan_meier(const std::vector<TimeToEventRecord>& records) {
    return kaplan_meier(std::span<const TimeToEventRecord>(records));
}

// Weighted Nelson-Aalen cumulative hazard: H(t) = sum over event times s <= t
// of dN_w(s)/Y_w(s).
inline StepFunction nelson_aalen(std::span<const TimeToEventRecord> records) {
    const auto t = detail::build_risk_table(records);
    std::vector<double> knots, values;
    double h = 0.0;
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        if (t.event_weight[i] > 0.0) {
            h += t.event_weight[i] / t.at_risk[i];
            knots.push_back(t.times[i]);
            values.push_back(h);
        }
    }
    return StepFunction(std::move(knots), std::move(values), 0.0);
}

inline StepFunction nelson_aalen(const std::vector<TimeToEventRecord>& records) {
    return nelson_aalen(std::span<const TimeToEventRecord>(records));
}

// Kaplan-Meier of the censoring distribution: roles of event and censored
// swapped. At tied times, events leave the risk set before censorings.
inline StepFunction censoring_km(std::span<const TimeToEventRecord> records) {
    const auto t = detail::build_risk_table(records);
    std::vector<double> knots, values;
    double g = 1.0;
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        if (t.censor_weight[i] > 0.0) {
            const double at_risk_for_censoring = t.at_risk[i] - t.event_weight[i];
            g *= 1.0 - t.censor_weight[i] / at_risk_for_censoring;
            knots.push_back(t.times[i]);
            values.push_back(g);
        }
    }
    return StepFunction(std::move(knots), std::move(values), 1.0);
}

inline StepFunction censoring_km(const std::vector<TimeToEventRecord>& records) {
    return censoring_km(std::span<const TimeToEventRecord>(records));
}

}  // namespace gbest
