#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gbest/config.hpp"
#include "gbest/cox.hpp"
#include "gbest/csv.hpp"
#include "gbest/data.hpp"
#include "gbest/ensemble.hpp"
#include "gbest/error.hpp"
#include "gbest/eval.hpp"
#include "gbest/rng.hpp"
#include "gbest/sim.hpp"

namespace gbest {

// A model column in the benchmark: the family name plus, for the gbest
// variants, the prior weight it runs with.
struct ModelSpec {
    std::string name;  // gbest_bsb | gbest_old | cox | rsf
    double prior_weight = 0.0;

    bool uses_prior_weight() const { return name == "gbest_bsb" || name == "gbest_old"; }

    std::string key() const {
        if (!uses_prior_weight()) return name;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%s w=%g", name.c_str(), prior_weight);
        return buf;
    }
};

struct GridSpec {
    std::vector<std::size_t> sample_sizes{50, 75, 100, 200};
    std::vector<double> censoring_levels{0.1, 0.4, 0.7};
    std::vector<double> prior_weights{0.0, 0.1, 0.2};
    std::vector<std::string> models{"gbest_bsb", "cox", "rsf"};
    int replications = 50;
    std::vector<CovariatePrior::Family> priors{CovariatePrior::Family::uniform};
    std::vector<CovariateFamily> covariate_families{CovariateFamily::uniform_0_10};
    int trees = 100;
    TreeParams tree_params;
    double train_fraction = 0.5;

    void validate() const {
        if (sample_sizes.empty() || censoring_levels.empty() || prior_weights.empty() || models.empty() ||
            priors.empty() || covariate_families.empty())
            throw Error("GridSpec: all setting lists must be nonempty");
        if (replications < 2) throw Error("GridSpec: replications must be at least 2");
        if (trees < 1) throw Error("GridSpec: tree count must be positive");
        for (const auto& m : models)
            if (m != "gbest_bsb" && m != "gbest_old" && m != "cox" && m != "rsf")
                throw Error("GridSpec: unknown model '" + m + "'");
        for (std::size_t n : sample_sizes)
            if (n < 4) throw Error("GridSpec: sample sizes must be at least 4");
    }

    // gbest variants expand over the prior-weight list; cox/rsf appear once.
    std::vector<ModelSpec> expanded_models() const {
        std::vector<ModelSpec> out;
        for (const auto& m : models) {
            if (m == "gbest_bsb" || m == "gbest_old")
                for (double w : prior_weights) out.push_back({m, w});
            else
                out.push_back({m, 0.0});
        }
        return out;
    }
};

struct ResultRow {
    std::string setting_id;
    std::size_t n = 0;
    double cens_target = 0.0;
    double cens_realized = 0.0;
    std::string model;
    double prior_weight = 0.0;
    std::string prior;
    std::string cov_family;
    int rep = 0;
    double ibs = std::numeric_limits<double>::quiet_NaN();
    double runtime_ms = 0.0;
    std::string error;
};

inline const char* to_string(CovariatePrior::Family f) {
    return f == CovariatePrior::Family::uniform ? "uniform" : "normal";
}

inline CovariatePrior::Family prior_family_from_string(const std::string& s) {
    if (s == "uniform") return CovariatePrior::Family::uniform;
    if (s == "normal") return CovariatePrior::Family::normal;
    throw Error("unknown prior family '" + s + "' (expected uniform or normal)");
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::string sanitize_error(std::string msg) {
    for (auto& c : msg)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return msg;
}

inline double censored_fraction(const Dataset& d) {
    return static_cast<double>(d.n() - d.event_count()) / static_cast<double>(d.n());
}

// Fit one model on the training fold and return its test-fold IBS.
inline double fit_and_score(const ModelSpec& model, const GridSpec& spec, const Dataset& train,
                            const Dataset& test, CovariatePrior::Family prior_family, RngStream rng) {
    if (model.name == "cox") {
        const CoxModel m = cox_fit(train);
        return integrated_brier([&](const std::vector<double>& x) { return cox_survival(m, x); }, test).ibs;
    }
    if (model.name == "rsf") {
        const RsfModel m = rsf_fit(train, spec.trees, spec.tree_params, rng);
        return integrated_brier([&](const std::vector<double>& x) { return rsf_predict_survival(m, x); }, test)
            .ibs;
    }
    GbestConfig cfg;
    cfg.trees = spec.trees;
    cfg.tree_params = spec.tree_params;
    cfg.prior_weight = model.prior_weight;
    cfg.prior_family = prior_family;
    cfg.variant =
        model.name == "gbest_old" ? GbestVariant::weibull_labels : GbestVariant::beta_stacy_labels;
    const GbestModel m = gbest_fit(train, cfg, rng);
    return integrated_brier([&](const std::vector<double>& x) { return gbest_predict_survival(m, x); }, test)
        .ibs;
}

template <class Task>
inline void run_tasks(std::size_t count, int jobs, Task&& task) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const auto workers = static_cast<std::size_t>(jobs);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                task(i);
            }
        });
    for (auto& t : pool) t.join();
}

}  // namespace detail

// Run the simulation grid: for every (N, censoring, prior, covariate family)
// setting and replication, simulate one dataset, split it, and score every
// model on the shared split (paired comparison). Rows come back in canonical
// (setting, replication, model) order regardless of the job count, and every
// random stream is derived from a label of the cell, so reruns with the same
// seed are identical and adding a model never changes other models' rows.
// Per-model failures land in the row's error column; the grid never aborts.
// Wall-clock timings are recorded only when record_timings is set, since
// they would break byte-level reproducibility of the output.
inline std::vector<ResultRow> run_grid(const GridSpec& spec, std::uint64_t master_seed, int jobs = 1,
                                       bool record_timings = false) {
    spec.validate();
    const auto models = spec.expanded_models();

    struct Setting {
        std::size_t n;
        double cens;
        CovariatePrior::Family prior;
        CovariateFamily family;
        std::string id;
    };
    std::vector<Setting> settings;
    for (std::size_t n : spec.sample_sizes)
        for (double cens : spec.censoring_levels)
            for (auto prior : spec.priors)
                for (auto family : spec.covariate_families) {
                    std::ostringstream id;
                    id << "N" << n << "_c" << detail::format_double(cens) << '_' << to_string(prior) << '_'
                       << to_string(family);
                    settings.push_back({n, cens, prior, family, id.str()});
                }

    const std::size_t reps = static_cast<std::size_t>(spec.replications);
    std::vector<ResultRow> rows(settings.size() * reps * models.size());

    detail::run_tasks(settings.size() * reps, jobs, [&](std::size_t task) {
        const Setting& st = settings[task / reps];
        const int rep = static_cast<int>(task % reps);
        const std::string cell = st.id + "|rep=" + std::to_string(rep);

        SimConfig sim_cfg = SimConfig::defaults(st.n, st.family, st.cens);
        const Dataset data = simulate_dataset(sim_cfg, RngStream(master_seed, stream_label("data|" + cell)));
        const double realized = detail::censored_fraction(data);
        const auto [train, test] =
            split_train_test(data, spec.train_fraction, RngStream(master_seed, stream_label("split|" + cell)));

        for (std::size_t mi = 0; mi < models.size(); ++mi) {
            ResultRow& row = rows[task * models.size() + mi];
            row.setting_id = st.id;
            row.n = st.n;
            row.cens_target = st.cens;
            row.cens_realized = realized;
            row.model = models[mi].name;
            row.prior_weight = models[mi].prior_weight;
            row.prior = to_string(st.prior);
            row.cov_family = to_string(st.family);
            row.rep = rep;
            RngStream model_rng(master_seed, stream_label("model|" + cell + "|" + models[mi].key()));
            const auto started = std::chrono::steady_clock::now();
            try {
                row.ibs = detail::fit_and_score(models[mi], spec, train, test, st.prior, model_rng);
            } catch (const std::exception& e) {
                row.error = detail::sanitize_error(e.what());
            }
            if (record_timings)
                row.runtime_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                        .count();
        }
    });
    return rows;
}

// k-fold cross-validation on a real dataset; one row per (model, fold).
inline std::vector<ResultRow> run_real(const Dataset& data, const GridSpec& spec, std::size_t folds,
                                       std::uint64_t master_seed, int jobs = 1, bool record_timings = false) {
    spec.validate();
    if (spec.priors.size() != 1) throw Error("run_real: exactly one prior family expected");
    const auto models = spec.expanded_models();
    const auto prior = spec.priors.front();
    const double overall_censoring = detail::censored_fraction(data);

    const auto fold_sets = kfold(data, folds, RngStream(master_seed, stream_label("cv")));
    std::vector<ResultRow> rows(folds * models.size());

    detail::run_tasks(folds, jobs, [&](std::size_t f) {
        const auto& [train, test] = fold_sets[f];
        for (std::size_t mi = 0; mi < models.size(); ++mi) {
            ResultRow& row = rows[f * models.size() + mi];
            row.setting_id = "real";
            row.n = data.n();
            row.cens_target = overall_censoring;
            row.cens_realized = detail::censored_fraction(test);
            row.model = models[mi].name;
            row.prior_weight = models[mi].prior_weight;
            row.prior = to_string(prior);
            row.cov_family = "real";
            row.rep = static_cast<int>(f);
            RngStream model_rng(master_seed,
                                stream_label("real|fold=" + std::to_string(f) + "|" + models[mi].key()));
            const auto started = std::chrono::steady_clock::now();
            try {
                row.ibs = detail::fit_and_score(models[mi], spec, train, test, prior, model_rng);
            } catch (const std::exception& e) {
                row.error = detail::sanitize_error(e.what());
            }
            if (record_timings)
                row.runtime_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                        .count();
        }
    });
    return rows;
}

// ---- results CSV ------------------------------------------------------------

inline const char* results_csv_header() {
    return "setting_id,N,cens_target,cens_realized,model,w,prior,cov_family,rep,ibs,runtime_ms,error";
}

inline void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << results_csv_header() << '\n';
    for (const auto& r : rows) {
        os << r.setting_id << ',' << r.n << ',' << detail::format_double(r.cens_target) << ','
           << detail::format_double(r.cens_realized) << ',' << r.model << ','
           << detail::format_double(r.prior_weight) << ',' << r.prior << ',' << r.cov_family << ',' << r.rep
           << ',';
        if (std::isfinite(r.ibs)) os << detail::format_double(r.ibs);
        os << ',' << detail::format_double(r.runtime_ms) << ',' << r.error << '\n';
    }
}

inline void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream os(path);
    if (!os) throw Error("write_results_csv: cannot write '" + path + "'");
    write_results_csv(os, rows);
}

inline std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("read_results_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw Error("read_results_csv: empty file");
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != results_csv_header())
        throw Error("read_results_csv: unexpected header in '" + path + "'");
    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() < 11)
            throw Error("read_results_csv: malformed line " + std::to_string(line_no));
        ResultRow r;
        r.setting_id = cells[0];
        r.n = static_cast<std::size_t>(std::stoul(cells[1]));
        r.cens_target = detail::parse_cell(cells[2], line_no, "cens_target");
        r.cens_realized = detail::parse_cell(cells[3], line_no, "cens_realized");
        r.model = cells[4];
        r.prior_weight = detail::parse_cell(cells[5], line_no, "w");
        r.prior = cells[6];
        r.cov_family = cells[7];
        r.rep = static_cast<int>(std::stol(cells[8]));
        r.ibs = cells[9].empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : detail::parse_cell(cells[9], line_no, "ibs");
        r.runtime_ms = detail::parse_cell(cells[10], line_no, "runtime_ms");
        r.error = cells.size() > 11 ? cells[11] : "";
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---- config file binding ----------------------------------------------------

inline GridSpec grid_spec_from_config(const Config& cfg) {
    GridSpec spec;
    if (cfg.has("grid", "sample_sizes")) {
        spec.sample_sizes.clear();
        for (double v : cfg.get_double_list("grid", "sample_sizes"))
            spec.sample_sizes.push_back(static_cast<std::size_t>(v));
    }
    if (cfg.has("grid", "censoring_levels")) spec.censoring_levels = cfg.get_double_list("grid", "censoring_levels");
    if (cfg.has("grid", "prior_weights")) spec.prior_weights = cfg.get_double_list("grid", "prior_weights");
    if (cfg.has("grid", "models")) spec.models = cfg.get_list("grid", "models");
    if (cfg.has("grid", "replications")) spec.replications = static_cast<int>(cfg.get_int("grid", "replications"));
    if (cfg.has("grid", "priors")) {
        spec.priors.clear();
        for (const auto& s : cfg.get_list("grid", "priors")) spec.priors.push_back(prior_family_from_string(s));
    }
    if (cfg.has("grid", "covariate_families")) {
        spec.covariate_families.clear();
        for (const auto& s : cfg.get_list("grid", "covariate_families"))
            spec.covariate_families.push_back(covariate_family_from_string(s));
    }
    if (cfg.has("grid", "train_fraction")) spec.train_fraction = cfg.get_double("grid", "train_fraction");
    if (cfg.has("gbest", "trees")) spec.trees = static_cast<int>(cfg.get_int("gbest", "trees"));
    if (cfg.has("tree", "min_node_weight")) spec.tree_params.min_node_weight = cfg.get_double("tree", "min_node_weight");
    if (cfg.has("tree", "min_events_per_child"))
        spec.tree_params.min_events_per_child = static_cast<int>(cfg.get_int("tree", "min_events_per_child"));
    if (cfg.has("tree", "max_depth")) spec.tree_params.max_depth = static_cast<int>(cfg.get_int("tree", "max_depth"));
    if (cfg.has("tree", "mtry")) spec.tree_params.mtry = static_cast<int>(cfg.get_int("tree", "mtry"));
    return spec;
}

}  // namespace gbest
