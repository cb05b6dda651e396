#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gbest/error.hpp"
#include "gbest/rng.hpp"

namespace gbest {

// One subject: observed follow-up time, event indicator (true = event,
// false = right-censored), covariate vector, nonnegative case weight.
struct TimeToEventRecord {
    double time = 0.0;
    bool event = false;
    std::vector<double> covariates;
    double weight = 1.0;
};

class Dataset {
public:
    Dataset(std::vector<TimeToEventRecord> records, std::vector<std::string> feature_names)
        : records_(std::move(records)), feature_names_(std::move(feature_names)) {
        if (records_.empty()) throw Error("Dataset: at least one record required");
        if (feature_names_.empty()) throw Error("Dataset: at least one feature required");
        const std::size_t p = feature_names_.size();
        for (std::size_t i = 0; i < records_.size(); ++i) {
            const auto& r = records_[i];
            if (r.covariates.size() != p)
                throw Error("Dataset: record " + std::to_string(i) + " has " +
                            std::to_string(r.covariates.size()) + " covariates, expected " + std::to_string(p));
            if (!(r.time >= 0.0)) throw Error("Dataset: record " + std::to_string(i) + " has negative time");
            if (!(r.weight >= 0.0)) throw Error("Dataset: record " + std::to_string(i) + " has negative weight");
        }
    }

    std::size_t n() const { return records_.size(); }
    std::size_t p() const { return feature_names_.size(); }
    const std::vector<TimeToEventRecord>& records() const { return records_; }
    const TimeToEventRecord& record(std::size_t i) const { return records_[i]; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    std::size_t event_count() const {
        return static_cast<std::size_t>(
            std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.event; }));
    }

    double max_time() const {
        double m = 0.0;
        for (const auto& r : records_) m = std::max(m, r.time);
        return m;
    }

    Dataset subset(std::span<const std::size_t> indices) const {
        std::vector<TimeToEventRecord> rows;
        rows.reserve(indices.size());
        for (std::size_t i : indices) rows.push_back(records_[i]);
        return Dataset(std::move(rows), feature_names_);
    }

private:
    std::vector<TimeToEventRecord> records_;
    std::vector<std::string> feature_names_;
};

// Right-continuous piecewise-constant function on [0, inf): f(t) equals the
// value at the largest knot <= t, or value_before_first_knot when t precedes
// every knot. Carrier for survival curves S(t) and cumulative hazards H(t).
class StepFunction {
public:
    StepFunction() : before_(1.0) {}

    StepFunction(std::vector<double> knots, std::vector<double> values, double value_before_first_knot)
        : knots_(std::move(knots)), values_(std::move(values)), before_(value_before_first_knot) {
        if (knots_.size() != values_.size()) throw Error("StepFunction: knots/values size mismatch");
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            if (!(knots_[i] >= 0.0)) throw Error("StepFunction: knots must be nonnegative");
            if (i > 0 && !(knots_[i] > knots_[i - 1]))
                throw Error("StepFunction: knots must be strictly increasing");
        }
    }

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }
    double value_before_first_knot() const { return before_; }

    double operator()(double t) const {
        if (!(t >= 0.0)) throw Error("StepFunction: evaluation at negative t");
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        if (it == knots_.begin()) return before_;
        return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
    }

    // Left limit f(t-): value at the largest knot strictly below t.
    double eval_left(double t) const {
        if (!(t >= 0.0)) throw Error("StepFunction: evaluation at negative t");
        auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
        if (it == knots_.begin()) return before_;
        return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
    }

    // Exact integral over [0, hi] of the step function.
    double integrate(double hi) const {
        if (!(hi >= 0.0)) throw Error("StepFunction: integration bound must be nonnegative");
        double area = 0.0;
        double prev_t = 0.0;
        double prev_v = before_;
        for (std::size_t i = 0; i < knots_.size() && knots_[i] < hi; ++i) {
            if (knots_[i] > prev_t) area += (knots_[i] - prev_t) * prev_v;
            prev_t = std::max(prev_t, knots_[i]);
            prev_v = values_[i];
        }
        if (hi > prev_t) area += (hi - prev_t) * prev_v;
        return area;
    }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
    double before_;
};

inline double step_eval(const StepFunction& f, double t) { return f(t); }

// True when f starts at 1 and is nonincreasing with values in [0, 1].
inline bool is_survival_curve(const StepFunction& f, double tol = 0.0) {
    if (std::abs(f.value_before_first_knot() - 1.0) > tol) return false;
    double prev = f.value_before_first_knot();
    for (double v : f.values()) {
        if (v < -tol || v > 1.0 + tol) return false;
        if (v > prev + tol) return false;
        prev = v;
    }
    return true;
}

// Atoms with probability masses; carrier for the random distributions drawn
// by the beta-Stacy bootstrap and for prior/posterior centerings on a grid.
class DiscreteDistribution {
public:
    DiscreteDistribution(std::vector<double> atoms, std::vector<double> masses)
        : atoms_(std::move(atoms)), masses_(std::move(masses)) {
        if (atoms_.empty()) throw Error("DiscreteDistribution: no atoms");
        if (atoms_.size() != masses_.size()) throw Error("DiscreteDistribution: atoms/masses size mismatch");
        double total = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (i > 0 && !(atoms_[i] > atoms_[i - 1]))
                throw Error("DiscreteDistribution: atoms must be distinct and sorted");
            if (!(masses_[i] >= 0.0)) throw Error("DiscreteDistribution: negative mass");
            total += masses_[i];
        }
        if (!(total > 0.0)) throw Error("DiscreteDistribution: total mass must be positive");
        if (total != 1.0)
            for (auto& m : masses_) m /= total;
        cum_.resize(masses_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < masses_.size(); ++i) {
            acc += masses_[i];
            cum_[i] = acc;
        }
        cum_.back() = 1.0;
    }

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& masses() const { return masses_; }

    double cdf(double x) const {
        auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
        if (it == atoms_.begin()) return 0.0;
        return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }

    std::size_t sample_index(RngStream& rng) const {
        const double u = rng.uniform();
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        if (it == cum_.end()) --it;
        return static_cast<std::size_t>(it - cum_.begin());
    }

    double sample(RngStream& rng) const { return atoms_[sample_index(rng)]; }

private:
    std::vector<double> atoms_;
    std::vector<double> masses_;
    std::vector<double> cum_;
};

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.uniform_int(i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace detail

// Disjoint random partition; train size = round(train_fraction * N).
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double train_fraction, RngStream rng) {
    if (d.n() < 2) throw Error("split_train_test: need at least 2 records");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error("split_train_test: train_fraction must be in (0,1)");
    const auto n = d.n();
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    const auto idx = detail::shuffled_indices(n, rng);
    std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    return {d.subset(train_idx), d.subset(test_idx)};
}

// k folds with disjoint test sets covering the data; sizes differ by at most one.
inline std::vector<std::pair<Dataset, Dataset>> kfold(const Dataset& d, std::size_t k, RngStream rng) {
    if (k < 2) throw Error("kfold: k must be at least 2");
    if (k > d.n()) throw Error("kfold: k exceeds the number of records");
    const auto idx = detail::shuffled_indices(d.n(), rng);
    std::vector<std::pair<Dataset, Dataset>> folds;
    folds.reserve(k);
    const std::size_t base = d.n() / k;
    const std::size_t extra = d.n() % k;
    std::size_t start = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        std::vector<std::size_t> test_idx(idx.begin() + static_cast<std::ptrdiff_t>(start),
                                          idx.begin() + static_cast<std::ptrdiff_t>(start + len));
        std::vector<std::size_t> train_idx;
        train_idx.reserve(d.n() - len);
        for (std::size_t i = 0; i < d.n(); ++i)
            if (i < start || i >= start + len) train_idx.push_back(idx[i]);
        folds.emplace_back(d.subset(train_idx), d.subset(test_idx));
        start += len;
    }
    return folds;
}

}  // namespace gbest
