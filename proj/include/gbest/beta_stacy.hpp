#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "gbest/bootstrap.hpp"
#include "gbest/data.hpp"
#include "gbest/error.hpp"
#include "gbest/rng.hpp"

namespace gbest {

// Beta-Stacy posterior for right-censored times under a discrete-support
// prior centering F0 with constant precision c(.) = k: support grid, the
// posterior centering survival Fbar*(t), and the posterior precision c*(t).
struct BetaStacyPosterior {
    std::vector<double> grid;
    std::vector<double> centering_survival;  // Fbar*(t) at each grid point, nonincreasing
    std::vector<double> precision;           // c*(t); 0 where Fbar* vanishes (unused there)

    // Discrete centering distribution Delta F*: the survival drop at each
    // grid point, with any residual tail mass assigned to the last point.
    DiscreteDistribution centering_distribution() const {
        std::vector<double> masses(grid.size());
        double prev = 1.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            masses[i] = prev - centering_survival[i];
            prev = centering_survival[i];
        }
        masses.back() += prev;
        return DiscreteDistribution(grid, std::move(masses));
    }
};

// Conjugate update of the beta-Stacy process on the union grid of observed
// times and prior atoms. With dN(s) the event count at s, Y(s) the at-risk
// count (times >= s) and Y+(s) the count strictly beyond s:
//   Fbar*(t) = prod_{s<=t} [1 - (k dF0(s) + dN(s)) / (k F0bar(s-) + Y(s))]
//   c*(t)    = (k F0bar(t) + Y+(t)) / Fbar*(t)   where Fbar*(t) > 0.
// Reductions: k=0 gives the Kaplan-Meier curve; no censoring gives the
// mixture survival with c* constant at n+k; n=0 returns the prior.
inline BetaStacyPosterior beta_stacy_posterior(const std::vector<double>& times, const std::vector<bool>& events,
                                               const PriorSpec& prior) {
    if (times.size() != events.size()) throw Error("beta_stacy_posterior: times/events size mismatch");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!(times[i] >= 0.0))
            throw Error("beta_stacy_posterior: negative time at index " + std::to_string(i));
    const double k = prior.precision_k;
    const auto& atoms = prior.time_prior.atoms();
    const auto& atom_mass = prior.time_prior.masses();
    if (k > 0.0 && !times.empty()) {
        const double t_max = *std::max_element(times.begin(), times.end());
        if (atoms.back() < t_max)
            throw Error("beta_stacy_posterior: time prior must cover the observed follow-up");
    }

    std::vector<double> grid(times);
    grid.insert(grid.end(), atoms.begin(), atoms.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> sorted_times(times);
    std::sort(sorted_times.begin(), sorted_times.end());
    std::map<double, int> event_count;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (events[i]) ++event_count[times[i]];

    BetaStacyPosterior post;
    post.grid = grid;
    post.centering_survival.resize(grid.size());
    post.precision.resize(grid.size());

    const auto n = static_cast<double>(times.size());
    double prior_tail_before = 1.0;  // F0bar(s-) = prior mass at atoms >= s
    std::size_t atom_i = 0;
    double fbar = 1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double s = grid[g];
        double df0 = 0.0;
        if (atom_i < atoms.size() && atoms[atom_i] == s) {
            df0 = atom_mass[atom_i];
            ++atom_i;
        }
        const auto it = event_count.find(s);
        const double dn = it != event_count.end() ? static_cast<double>(it->second) : 0.0;
        const double at_risk =
            n - static_cast<double>(std::lower_bound(sorted_times.begin(), sorted_times.end(), s) -
                                    sorted_times.begin());
        const double beyond =
            n - static_cast<double>(std::upper_bound(sorted_times.begin(), sorted_times.end(), s) -
                                    sorted_times.begin());
        const double numer = k * df0 + dn;
        const double denom = k * prior_tail_before + at_risk;
        if (numer > 0.0) {
            if (!(denom > 0.0)) throw Error("beta_stacy_posterior: empty risk set with positive jump mass");
            fbar *= 1.0 - numer / denom;
        }
        prior_tail_before -= df0;
        post.centering_survival[g] = fbar;
        post.precision[g] = fbar > 0.0 ? (k * prior_tail_before + beyond) / fbar : 0.0;
    }
    return post;
}

inline BetaStacyPosterior beta_stacy_posterior(const Dataset& d, const PriorSpec& prior) {
    std::vector<double> times(d.n());
    std::vector<bool> events(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
        times[i] = d.record(i).time;
        events[i] = d.record(i).event;
    }
    return beta_stacy_posterior(times, events, prior);
}

// One draw of a random distribution G_m from the beta-Stacy posterior:
// sample m values from the centering, keep the D distinct sorted values X_i,
// set alpha_i = c*(X_i) dF_m(X_i) and beta_i = c*(X_i) Fbar_m(X_i) from the
// empirical distribution F_m of the draws, generate U_i ~ Beta(alpha_i,
// beta_i) with U_D forced to 1, and stick-break Z_i = U_i prod_{j<i}(1-U_j).
// The last mass is taken as 1 minus the partial sum, so the masses sum to
// one exactly.
inline DiscreteDistribution beta_stacy_draw(const BetaStacyPosterior& post, std::size_t m, RngStream& rng) {
    if (m == 0) throw Error("beta_stacy_draw: m must be positive");
    const DiscreteDistribution centering = post.centering_distribution();

    std::map<std::size_t, std::size_t> counts;  // grid index -> multiplicity, keys sorted
    for (std::size_t i = 0; i < m; ++i) ++counts[centering.sample_index(rng)];

    const std::size_t d_distinct = counts.size();
    std::vector<double> atoms(d_distinct), u(d_distinct);
    {
        const auto md = static_cast<double>(m);
        std::size_t below = 0;
        std::size_t i = 0;
        for (const auto& [grid_idx, count] : counts) {
            atoms[i] = post.grid[grid_idx];
            const double alpha = post.precision[grid_idx] * (static_cast<double>(count) / md);
            const double beta = post.precision[grid_idx] * (static_cast<double>(m - below - count) / md);
            u[i] = (i + 1 == d_distinct) ? 1.0 : rng.beta(alpha, beta);
            below += count;
            ++i;
        }
    }

    std::vector<double> masses(d_distinct);
    double remaining_product = 1.0;
    double partial_sum = 0.0;
    for (std::size_t i = 0; i + 1 < d_distinct; ++i) {
        masses[i] = u[i] * remaining_product;
        remaining_product *= 1.0 - u[i];
        partial_sum += masses[i];
    }
    masses[d_distinct - 1] = std::max(0.0, 1.0 - partial_sum);
    return DiscreteDistribution(std::move(atoms), std::move(masses));
}

// r i.i.d. draws from a discrete distribution by inverse CDF over its atoms.
inline std::vector<double> sample_times(const DiscreteDistribution& g, std::size_t r, RngStream& rng) {
    std::vector<double> out(r);
    for (std::size_t i = 0; i < r; ++i) out[i] = g.sample(rng);
    return out;
}

// Linear functional G_m h = sum_i h(X_i) Z_i of a drawn distribution.
template <class H>
double apply_functional(const DiscreteDistribution& g, H&& h) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.atoms().size(); ++i) acc += h(g.atoms()[i]) * g.masses()[i];
    return acc;
}

}  // namespace gbest
