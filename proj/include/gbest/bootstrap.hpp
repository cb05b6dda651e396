#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gbest/data.hpp"
#include "gbest/error.hpp"
#include "gbest/rng.hpp"

namespace gbest {

// Efron bootstrap weights: counts from Multinomial(n, uniform); sum = n.
inline std::vector<std::uint32_t> efron_weights(std::size_t n, RngStream& rng) {
    if (n == 0) throw Error("efron_weights: n must be positive");
    std::vector<std::uint32_t> counts(n, 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[rng.uniform_int(n)];
    return counts;
}

// Rubin bootstrap weights: flat Dirichlet D(1,...,1); sum = 1.
inline std::vector<double> rubin_weights(std::size_t n, RngStream& rng) {
    if (n == 0) throw Error("rubin_weights: n must be positive");
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& wi : w) {
        wi = rng.exponential();
        total += wi;
    }
    for (auto& wi : w) wi /= total;
    return w;
}

// Symmetric Dirichlet weights with the given per-component concentration,
// via normalized Gamma draws; sum = 1.
inline std::vector<double> dirichlet_weights(double concentration, std::size_t m, RngStream& rng) {
    if (m == 0) throw Error("dirichlet_weights: m must be positive");
    if (!(concentration > 0.0)) throw Error("dirichlet_weights: concentration must be positive");
    std::vector<double> w(m);
    double total = 0.0;
    for (auto& wi : w) {
        wi = rng.gamma(concentration);
        total += wi;
    }
    if (!(total > 0.0)) {
        // All gammas underflowed; fall back to the symmetric limit.
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(m));
        return w;
    }
    for (auto& wi : w) wi /= total;
    return w;
}

// Univariate sampler for one covariate's prior.
struct CovariatePrior {
    enum class Family { uniform, normal };
    Family family = Family::uniform;
    double a = 0.0;  // uniform: lower bound; normal: mean
    double b = 1.0;  // uniform: upper bound; normal: standard deviation

    double sample(RngStream& rng) const {
        switch (family) {
            case Family::uniform: return rng.uniform(a, b);
            case Family::normal: return rng.normal(a, b);
        }
        throw Error("CovariatePrior: unknown family");
    }
};

// Prior for the proper Bayesian / beta-Stacy bootstrap: a discrete grid
// approximation of the time centering F0, independent univariate priors for
// the covariates, and the Dirichlet-process precision k.
struct PriorSpec {
    DiscreteDistribution time_prior;
    std::vector<CovariatePrior> covariate_priors;
    double precision_k = 0.0;

    PriorSpec(DiscreteDistribution tp, std::vector<CovariatePrior> cp, double k)
        : time_prior(std::move(tp)), covariate_priors(std::move(cp)), precision_k(k) {
        if (!(precision_k >= 0.0)) throw Error("PriorSpec: precision k must be nonnegative");
    }

    // Uniform-mass time grid on (0, headroom * max observed time] with
    // `grid_size` atoms, and per-covariate priors matched to the data
    // (uniform over the observed range, or moment-matched normal).
    static PriorSpec from_dataset(const Dataset& d, double k,
                                  CovariatePrior::Family family = CovariatePrior::Family::uniform,
                                  std::size_t grid_size = 512, double headroom = 1.5) {
        const double t_max = d.max_time();
        const double upper = (t_max > 0.0 ? t_max : 1.0) * headroom;
        std::vector<double> atoms(grid_size), masses(grid_size, 1.0 / static_cast<double>(grid_size));
        for (std::size_t i = 0; i < grid_size; ++i)
            atoms[i] = upper * static_cast<double>(i + 1) / static_cast<double>(grid_size);

        std::vector<CovariatePrior> priors(d.p());
        for (std::size_t j = 0; j < d.p(); ++j) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            double sum = 0.0, sumsq = 0.0;
            for (const auto& r : d.records()) {
                const double x = r.covariates[j];
                lo = std::min(lo, x);
                hi = std::max(hi, x);
                sum += x;
                sumsq += x * x;
            }
            const auto n = static_cast<double>(d.n());
            if (family == CovariatePrior::Family::uniform) {
                if (hi <= lo) hi = lo + 1e-9;
                priors[j] = {CovariatePrior::Family::uniform, lo, hi};
            } else {
                const double mean = sum / n;
                const double var = std::max(sumsq / n - mean * mean, 0.0);
                priors[j] = {CovariatePrior::Family::normal, mean, std::sqrt(var) > 0.0 ? std::sqrt(var) : 1e-9};
            }
        }
        return PriorSpec(DiscreteDistribution(std::move(atoms), std::move(masses)), std::move(priors), k);
    }
};

enum class RowOrigin : std::uint8_t { data, prior };

struct MixtureRow {
    std::vector<double> covariates;
    double time = std::numeric_limits<double>::quiet_NaN();  // set for data-origin rows only
    bool event = false;
    RowOrigin origin = RowOrigin::data;
};

struct MixtureDraw {
    std::vector<MixtureRow> rows;
    std::size_t prior_count = 0;
};

// Draw m rows from the mixture (k F0 + n Fn)/(n + k): with probability
// n/(n+k) copy a uniformly chosen data row (covariates plus its observed
// time and event flag), otherwise draw each covariate independently from its
// prior sampler (time-to-event label left unset).
inline MixtureDraw mixture_covariate_draw(const Dataset& d, const PriorSpec& prior, std::size_t m,
                                          RngStream& rng) {
    if (m == 0) throw Error("mixture_covariate_draw: m must be positive");
    if (prior.covariate_priors.size() != d.p())
        throw Error("mixture_covariate_draw: prior covariate count does not match the dataset");
    const auto n = static_cast<double>(d.n());
    const double data_prob = n / (n + prior.precision_k);
    MixtureDraw out;
    out.rows.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        MixtureRow& row = out.rows[i];
        if (rng.uniform() < data_prob) {
            const auto& src = d.record(rng.uniform_int(d.n()));
            row.covariates = src.covariates;
            row.time = src.time;
            row.event = src.event;
            row.origin = RowOrigin::data;
        } else {
            row.covariates.resize(d.p());
            for (std::size_t j = 0; j < d.p(); ++j) row.covariates[j] = prior.covariate_priors[j].sample(rng);
            row.origin = RowOrigin::prior;
            ++out.prior_count;
        }
    }
    return out;
}

// One bootstrap replica: m rows (data- or prior-origin), their origin flags,
// and a weight vector summing to one.
struct BootstrapReplica {
    std::vector<TimeToEventRecord> rows;
    std::vector<RowOrigin> origins;
    std::vector<double> weights;

    std::size_t size() const { return rows.size(); }

    // Rows with weights rescaled to effective observations (weight * m), so
    // downstream estimators see stopping rules in observation units.
    std::vector<TimeToEventRecord> effective_rows() const {
        std::vector<TimeToEventRecord> out = rows;
        const auto m = static_cast<double>(rows.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i].weight = weights[i] * m;
        return out;
    }
};

}  // namespace gbest
