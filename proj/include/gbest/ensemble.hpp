#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gbest/beta_stacy.hpp"
#include "gbest/bootstrap.hpp"
#include "gbest/cox.hpp"
#include "gbest/data.hpp"
#include "gbest/error.hpp"
#include "gbest/estimators.hpp"
#include "gbest/tree.hpp"
#include "gbest/weibull.hpp"

namespace gbest {

enum class GbestVariant { beta_stacy_labels, weibull_labels, efron_bagging };

inline const char* to_string(GbestVariant v) {
    switch (v) {
        case GbestVariant::beta_stacy_labels: return "beta_stacy_labels";
        case GbestVariant::weibull_labels: return "weibull_labels";
        case GbestVariant::efron_bagging: return "efron_bagging";
    }
    return "?";
}

inline GbestVariant variant_from_string(const std::string& s) {
    if (s == "beta_stacy_labels") return GbestVariant::beta_stacy_labels;
    if (s == "weibull_labels") return GbestVariant::weibull_labels;
    if (s == "efron_bagging") return GbestVariant::efron_bagging;
    throw Error("unknown ensemble variant '" + s + "'");
}

struct GbestConfig {
    int trees = 100;                       // B
    double prior_weight = 0.1;             // w in [0,1); k = w n / (1 - w)
    std::optional<std::size_t> resample_m;  // defaults to n
    TreeParams tree_params;
    GbestVariant variant = GbestVariant::beta_stacy_labels;
    CovariatePrior::Family prior_family = CovariatePrior::Family::uniform;

    double precision_k(std::size_t n) const {
        return prior_weight * static_cast<double>(n) / (1.0 - prior_weight);
    }

    void validate() const {
        if (trees < 1) throw Error("GbestConfig: tree count must be positive");
        if (!(prior_weight >= 0.0 && prior_weight < 1.0)) throw Error("GbestConfig: prior weight must be in [0,1)");
    }
};

struct MatchedLabel {
    std::vector<double> covariates;
    double time;
    bool event;  // always true: prior-generated labels are realized event times
};

// Rank matching of sampled event times to prior-generated covariate rows:
// rows sorted by decreasing risk score (ties broken by the provided stream)
// receive the times in increasing order, so higher estimated hazard pairs
// with earlier failure.
inline std::vector<MatchedLabel> match_times_to_covariates(const std::vector<std::vector<double>>& prior_rows,
                                                           const std::vector<double>& times,
                                                           const CoxModel* scorer, RngStream& tie_rng) {
    if (prior_rows.size() != times.size())
        throw Error("match_times_to_covariates: row/time count mismatch");
    const std::size_t r = prior_rows.size();
    std::vector<double> score(r, 0.0);
    if (scorer)
        for (std::size_t i = 0; i < r; ++i) score[i] = scorer->risk_score(prior_rows[i]);
    std::vector<double> tiebreak(r);
    for (auto& t : tiebreak) t = tie_rng.uniform();

    std::vector<std::size_t> row_order(r);
    std::iota(row_order.begin(), row_order.end(), std::size_t{0});
    std::sort(row_order.begin(), row_order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return tiebreak[a] < tiebreak[b];
    });
    std::vector<double> sorted_times(times);
    std::sort(sorted_times.begin(), sorted_times.end());

    std::vector<MatchedLabel> out(r);
    for (std::size_t rank = 0; rank < r; ++rank) {
        const std::size_t i = row_order[rank];
        out[i] = {prior_rows[i], sorted_times[rank], true};
    }
    return out;
}

// B fitted weighted survival trees with the bootstrap replicas they were
// trained on, plus the risk scorer used to label prior-origin rows.
struct GbestModel {
    std::vector<SurvivalTree> trees;
    std::vector<BootstrapReplica> replicas;
    std::optional<CoxModel> matcher;
    GbestConfig config;
    std::vector<std::string> feature_names;
    std::vector<std::string> fit_notes;  // run log: fallbacks and warnings
};

namespace detail {

inline double km_median(const StepFunction& s, double fallback) {
    for (std::size_t i = 0; i < s.knots().size(); ++i)
        if (s.values()[i] <= 0.5) return s.knots()[i];
    return fallback;
}

}  // namespace detail

// Fit the GBEST ensemble. Per replica b (independent rng substream):
// mixture-draw m rows, draw Dirichlet weights with concentration (n+k)/m,
// sample a random distribution from the beta-Stacy posterior of the training
// times, draw the r prior-origin labels from it, rank-match them to the
// prior rows by the Cox risk score, and fit a weighted survival tree.
// Variant weibull_labels labels prior rows with the median of a fitted
// Weibull AFT curve instead; variant efron_bagging resamples the data rows
// only (k forced to 0).
inline GbestModel gbest_fit(const Dataset& train, GbestConfig cfg, RngStream rng) {
    cfg.validate();
    if (train.event_count() == 0) throw Error("gbest_fit: training data has no events");

    GbestModel model;
    model.feature_names = train.feature_names();

    const std::size_t n = train.n();
    const std::size_t m = cfg.resample_m.value_or(n);
    if (m == 0) throw Error("gbest_fit: resample size must be positive");
    if (cfg.variant == GbestVariant::efron_bagging) cfg.prior_weight = 0.0;
    if (cfg.prior_weight > 0.3)
        model.fit_notes.push_back("prior weight w > 0.3 exceeds the recommended range");
    const double k = cfg.precision_k(n);

    PriorSpec prior = PriorSpec::from_dataset(train, k, cfg.prior_family);

    std::optional<BetaStacyPosterior> posterior;
    std::optional<WeibullAftModel> label_model;
    if (k > 0.0) {
        if (cfg.variant == GbestVariant::beta_stacy_labels) {
            posterior = beta_stacy_posterior(train, prior);
            try {
                model.matcher = cox_fit(train);
            } catch (const ConvergenceError& e) {
                model.fit_notes.push_back(std::string("cox matcher failed (") + e.what() +
                                          "); falling back to random matching");
            }
        } else if (cfg.variant == GbestVariant::weibull_labels) {
            try {
                label_model = weibull_aft_fit(train);
            } catch (const ConvergenceError& e) {
                model.fit_notes.push_back(std::string("weibull label model failed (") + e.what() +
                                          "); labelling prior rows with the marginal survival median");
            }
        }
    }
    const double marginal_median =
        detail::km_median(kaplan_meier(std::span<const TimeToEventRecord>(train.records())), train.max_time());

    model.config = cfg;
    model.trees.reserve(static_cast<std::size_t>(cfg.trees));
    model.replicas.reserve(static_cast<std::size_t>(cfg.trees));

    for (int b = 0; b < cfg.trees; ++b) {
        RngStream rs = rng.substream(static_cast<std::uint64_t>(b) + 1);
        BootstrapReplica replica;

        if (cfg.variant == GbestVariant::efron_bagging) {
            const auto counts = efron_weights(n, rs);
            replica.rows = train.records();
            replica.origins.assign(n, RowOrigin::data);
            replica.weights.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                replica.weights[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
                replica.rows[i].weight = replica.weights[i];
            }
        } else {
            auto draw = mixture_covariate_draw(train, prior, m, rs);
            auto weights = dirichlet_weights((static_cast<double>(n) + k) / static_cast<double>(m), m, rs);

            std::vector<std::size_t> prior_rows_idx;
            std::vector<std::vector<double>> prior_covs;
            for (std::size_t i = 0; i < m; ++i) {
                if (draw.rows[i].origin == RowOrigin::prior) {
                    prior_rows_idx.push_back(i);
                    prior_covs.push_back(draw.rows[i].covariates);
                }
            }
            if (!prior_rows_idx.empty()) {
                if (cfg.variant == GbestVariant::beta_stacy_labels) {
                    const DiscreteDistribution gm = beta_stacy_draw(*posterior, m, rs);
                    const auto sampled = sample_times(gm, prior_rows_idx.size(), rs);
                    const auto matched = match_times_to_covariates(
                        prior_covs, sampled, model.matcher ? &*model.matcher : nullptr, rs);
                    for (std::size_t j = 0; j < prior_rows_idx.size(); ++j) {
                        draw.rows[prior_rows_idx[j]].time = matched[j].time;
                        draw.rows[prior_rows_idx[j]].event = true;
                    }
                } else {
                    for (std::size_t j = 0; j < prior_rows_idx.size(); ++j) {
                        const auto& x = prior_covs[j];
                        const double label = label_model ? weibull_survival(*label_model, x).median()
                                                         : marginal_median;
                        draw.rows[prior_rows_idx[j]].time = label;
                        draw.rows[prior_rows_idx[j]].event = true;
                    }
                }
            }

            replica.rows.resize(m);
            replica.origins.resize(m);
            replica.weights = std::move(weights);
            for (std::size_t i = 0; i < m; ++i) {
                replica.rows[i].time = draw.rows[i].time;
                replica.rows[i].event = draw.rows[i].event;
                replica.rows[i].covariates = std::move(draw.rows[i].covariates);
                replica.rows[i].weight = replica.weights[i];
                replica.origins[i] = draw.rows[i].origin;
            }
        }

        model.trees.push_back(fit_survival_tree(replica, cfg.tree_params, rs));
        model.replicas.push_back(std::move(replica));
    }
    return model;
}

// Pool the weighted members of the leaf x falls into in every tree and
// return the Kaplan-Meier curve of the pooled multiset.
inline StepFunction gbest_predict_survival(const GbestModel& model, std::span<const double> x) {
    if (x.size() != model.feature_names.size())
        throw Error("gbest_predict_survival: covariate vector has wrong length");
    std::vector<TimeToEventRecord> pooled;
    for (const auto& tree : model.trees) tree.append_leaf_members(tree.find_leaf(x), pooled);
    return kaplan_meier(pooled);
}

inline StepFunction gbest_predict_survival(const GbestModel& model, const std::vector<double>& x) {
    return gbest_predict_survival(model, std::span<const double>(x));
}

// Random survival forest baseline: Efron-bootstrap trees with per-split
// feature subsampling; prediction averages the leaf Nelson-Aalen cumulative
// hazards across trees and returns exp(-mean H).
struct RsfModel {
    std::vector<SurvivalTree> trees;
    std::vector<std::string> feature_names;
};

inline RsfModel rsf_fit(const Dataset& train, int trees, TreeParams params, RngStream rng) {
    if (train.event_count() == 0) throw Error("rsf_fit: training data has no events");
    if (trees < 1) throw Error("rsf_fit: tree count must be positive");
    if (!params.mtry)
        params.mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(train.p()))));
    RsfModel model;
    model.feature_names = train.feature_names();
    model.trees.reserve(static_cast<std::size_t>(trees));
    const std::size_t n = train.n();
    for (int b = 0; b < trees; ++b) {
        RngStream rs = rng.substream(static_cast<std::uint64_t>(b) + 1);
        const auto counts = efron_weights(n, rs);
        BootstrapReplica replica;
        replica.rows = train.records();
        replica.origins.assign(n, RowOrigin::data);
        replica.weights.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            replica.weights[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
            replica.rows[i].weight = replica.weights[i];
        }
        model.trees.push_back(fit_survival_tree(replica, params, rs));
    }
    return model;
}

inline StepFunction rsf_predict_survival(const RsfModel& model, std::span<const double> x) {
    if (x.size() != model.feature_names.size())
        throw Error("rsf_predict_survival: covariate vector has wrong length");
    std::vector<StepFunction> hazards;
    hazards.reserve(model.trees.size());
    std::vector<double> grid;
    for (const auto& tree : model.trees) {
        hazards.push_back(nelson_aalen(tree.leaf_members(tree.find_leaf(x))));
        const auto& k = hazards.back().knots();
        grid.insert(grid.end(), k.begin(), k.end());
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<double> values(grid.size());
    const auto b = static_cast<double>(hazards.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double h = 0.0;
        for (const auto& hz : hazards) h += hz(grid[g]);
        values[g] = std::exp(-h / b);
    }
    return StepFunction(std::move(grid), std::move(values), 1.0);
}

inline StepFunction rsf_predict_survival(const RsfModel& model, const std::vector<double>& x) {
    return rsf_predict_survival(model, std::span<const double>(x));
}

// ---- model persistence ----------------------------------------------------
// Self-describing plain-text dump (format tag "gbest-model 1"): config,
// feature names, replicas (rows, origins, weights) and tree node arrays.
// Numbers are written with 17 significant digits so a load reproduces the
// model's predictions bit for bit.

namespace detail {

inline void write_double(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

}  // namespace detail

inline void save_model(const GbestModel& model, std::ostream& os) {
    os << "gbest-model 1\n";
    os << "variant " << to_string(model.config.variant) << '\n';
    os << "trees " << model.config.trees << '\n';
    os << "prior_weight ";
    detail::write_double(os, model.config.prior_weight);
    os << '\n';
    os << "min_node_weight ";
    detail::write_double(os, model.config.tree_params.min_node_weight);
    os << '\n';
    os << "min_events_per_child " << model.config.tree_params.min_events_per_child << '\n';
    os << "max_depth " << model.config.tree_params.max_depth << '\n';
    os << "mtry " << (model.config.tree_params.mtry ? *model.config.tree_params.mtry : -1) << '\n';
    os << "features " << model.feature_names.size();
    for (const auto& f : model.feature_names) os << ' ' << f;
    os << '\n';
    for (std::size_t b = 0; b < model.trees.size(); ++b) {
        const auto& replica = model.replicas[b];
        os << "replica " << b << ' ' << replica.rows.size() << '\n';
        for (std::size_t i = 0; i < replica.rows.size(); ++i) {
            const auto& r = replica.rows[i];
            os << (r.event ? 1 : 0) << ' ' << (replica.origins[i] == RowOrigin::prior ? 1 : 0) << ' ';
            detail::write_double(os, r.time);
            os << ' ';
            detail::write_double(os, replica.weights[i]);
            for (double x : r.covariates) {
                os << ' ';
                detail::write_double(os, x);
            }
            os << '\n';
        }
        const auto& nodes = model.trees[b].nodes();
        os << "tree " << b << ' ' << nodes.size() << '\n';
        for (const auto& nd : nodes) {
            os << nd.feature << ' ';
            detail::write_double(os, nd.threshold);
            os << ' ' << nd.left << ' ' << nd.right << ' ' << nd.members.size();
            for (std::size_t i : nd.members) os << ' ' << i;
            os << '\n';
        }
    }
    os << "end\n";
}

inline void save_model(const GbestModel& model, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("save_model: cannot write '" + path + "'");
    save_model(model, os);
}

inline GbestModel load_model(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "gbest-model" || version != 1)
        throw Error("load_model: not a gbest-model file");
    GbestModel model;
    std::string key;
    std::size_t feature_count = 0;
    while (is >> key) {
        if (key == "variant") {
            std::string v;
            is >> v;
            model.config.variant = variant_from_string(v);
        } else if (key == "trees") {
            is >> model.config.trees;
        } else if (key == "prior_weight") {
            is >> model.config.prior_weight;
        } else if (key == "min_node_weight") {
            is >> model.config.tree_params.min_node_weight;
        } else if (key == "min_events_per_child") {
            is >> model.config.tree_params.min_events_per_child;
        } else if (key == "max_depth") {
            is >> model.config.tree_params.max_depth;
        } else if (key == "mtry") {
            int v;
            is >> v;
            if (v >= 0) model.config.tree_params.mtry = v;
        } else if (key == "features") {
            is >> feature_count;
            model.feature_names.resize(feature_count);
            for (auto& f : model.feature_names) is >> f;
        } else if (key == "replica") {
            std::size_t idx = 0, rows = 0;
            is >> idx >> rows;
            BootstrapReplica replica;
            replica.rows.resize(rows);
            replica.origins.resize(rows);
            replica.weights.resize(rows);
            for (std::size_t i = 0; i < rows; ++i) {
                int event = 0, origin = 0;
                is >> event >> origin >> replica.rows[i].time >> replica.weights[i];
                replica.rows[i].event = event != 0;
                replica.origins[i] = origin != 0 ? RowOrigin::prior : RowOrigin::data;
                replica.rows[i].weight = replica.weights[i];
                replica.rows[i].covariates.resize(feature_count);
                for (auto& x : replica.rows[i].covariates) is >> x;
            }
            model.replicas.push_back(std::move(replica));
        } else if (key == "tree") {
            std::size_t idx = 0, count = 0;
            is >> idx >> count;
            std::vector<SurvivalTree::Node> nodes(count);
            for (auto& nd : nodes) {
                std::size_t members = 0;
                is >> nd.feature >> nd.threshold >> nd.left >> nd.right >> members;
                nd.members.resize(members);
                for (auto& mi : nd.members) is >> mi;
            }
            if (model.replicas.size() != idx + 1) throw Error("load_model: tree without its replica");
            model.trees.emplace_back(model.replicas[idx].effective_rows(), model.config.tree_params,
                                     std::move(nodes));
        } else if (key == "end") {
            if (model.trees.size() != static_cast<std::size_t>(model.config.trees))
                throw Error("load_model: tree count mismatch");
            return model;
        } else {
            throw Error("load_model: unexpected key '" + key + "'");
        }
    }
    throw Error("load_model: truncated file");
}

inline GbestModel load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("load_model: cannot open '" + path + "'");
    return load_model(is);
}

}  // namespace gbest
