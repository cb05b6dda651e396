#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gbest/bench.hpp"
#include "gbest/error.hpp"
#include "gbest/eval.hpp"
#include "gbest/rng.hpp"

namespace gbest {

struct RegressionReport {
    std::string reference_model;          // the (model, w) level absorbed by the intercept
    std::vector<std::string> terms;       // intercept first
    std::vector<double> coefficients;
    std::vector<double> sd;               // bootstrap standard deviation
    std::vector<double> lower;            // nonparametric 2.5% bound
    std::vector<double> upper;            // nonparametric 97.5% bound
};

namespace detail {

struct Design {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> terms;
};

inline Eigen::VectorXd ols_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const std::vector<std::string>& terms, bool check_rank) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (check_rank && qr.rank() < x.cols()) {
        const auto perm = qr.colsPermutation().indices();
        std::string bad;
        for (Eigen::Index i = qr.rank(); i < x.cols(); ++i) {
            if (!bad.empty()) bad += ", ";
            bad += terms[static_cast<std::size_t>(perm[i])];
        }
        throw Error("analyze_regression: design matrix is rank deficient; dependent columns: " + bad);
    }
    return qr.solve(y);
}

}  // namespace detail

// Ordinary least squares of logit(IBS) on the grid factors: sample size and
// censoring level as numeric covariates, dummies for each (model, w) level
// against the gbest_bsb w=0.1 reference, and dummies for prior and covariate
// family when more than one level is present. Uncertainty comes from a
// case-resampling bootstrap: coefficient sd and nonparametric 95% interval
// over bootstrap_reps refits.
inline RegressionReport analyze_regression(const std::vector<ResultRow>& all_rows, int bootstrap_reps,
                                           RngStream rng) {
    if (bootstrap_reps < 2) throw Error("analyze_regression: bootstrap_reps must be at least 2");
    std::vector<const ResultRow*> rows;
    for (const auto& r : all_rows)
        if (r.error.empty() && std::isfinite(r.ibs)) rows.push_back(&r);
    if (rows.size() < 3) throw Error("analyze_regression: not enough valid rows");

    std::set<std::string> model_keys_set, settings, priors, families;
    for (const auto* r : rows) {
        model_keys_set.insert(ModelSpec{r->model, r->prior_weight}.key());
        settings.insert(r->setting_id);
        priors.insert(r->prior);
        families.insert(r->cov_family);
    }
    if (model_keys_set.size() < 2) throw Error("analyze_regression: need at least 2 models in the results");
    if (settings.size() < 2) throw Error("analyze_regression: need at least 2 settings in the results");

    const std::string reference = model_keys_set.count("gbest_bsb w=0.1") ? "gbest_bsb w=0.1"
                                                                          : *model_keys_set.begin();
    std::vector<std::string> model_levels;
    for (const auto& k : model_keys_set)
        if (k != reference) model_levels.push_back(k);
    std::vector<std::string> prior_levels(priors.size() > 1 ? std::vector<std::string>(++priors.begin(), priors.end())
                                                            : std::vector<std::string>{});
    std::vector<std::string> family_levels(
        families.size() > 1 ? std::vector<std::string>(++families.begin(), families.end())
                            : std::vector<std::string>{});

    detail::Design d;
    d.terms.push_back("intercept");
    d.terms.push_back("N");
    d.terms.push_back("cens");
    for (const auto& m : model_levels) d.terms.push_back("model=" + m);
    for (const auto& p : prior_levels) d.terms.push_back("prior=" + p);
    for (const auto& f : family_levels) d.terms.push_back("covariate=" + f);

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto k = static_cast<Eigen::Index>(d.terms.size());
    d.x.setZero(n, k);
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const ResultRow& r = *rows[static_cast<std::size_t>(i)];
        const std::string key = ModelSpec{r.model, r.prior_weight}.key();
        Eigen::Index c = 0;
        d.x(i, c++) = 1.0;
        d.x(i, c++) = static_cast<double>(r.n);
        d.x(i, c++) = r.cens_target;
        for (const auto& m : model_levels) d.x(i, c++) = key == m ? 1.0 : 0.0;
        for (const auto& p : prior_levels) d.x(i, c++) = r.prior == p ? 1.0 : 0.0;
        for (const auto& f : family_levels) d.x(i, c++) = r.cov_family == f ? 1.0 : 0.0;
        d.y(i) = logit(r.ibs);
    }

    const Eigen::VectorXd beta = detail::ols_solve(d.x, d.y, d.terms, true);

    std::vector<std::vector<double>> draws(static_cast<std::size_t>(k));
    Eigen::MatrixXd xb(n, k);
    Eigen::VectorXd yb(n);
    for (int rep = 0; rep < bootstrap_reps; ++rep) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto pick = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
            xb.row(i) = d.x.row(pick);
            yb(i) = d.y(pick);
        }
        const Eigen::VectorXd bb = detail::ols_solve(xb, yb, d.terms, false);
        for (Eigen::Index c = 0; c < k; ++c) draws[static_cast<std::size_t>(c)].push_back(bb(c));
    }

    RegressionReport report;
    report.reference_model = reference;
    report.terms = d.terms;
    for (Eigen::Index c = 0; c < k; ++c) {
        auto& sample = draws[static_cast<std::size_t>(c)];
        std::sort(sample.begin(), sample.end());
        const auto stats = summarize(sample);
        report.coefficients.push_back(beta(c));
        report.sd.push_back(stats.sd);
        report.lower.push_back(quantile_type7(sample, 0.025));
        report.upper.push_back(quantile_type7(sample, 0.975));
    }
    return report;
}

}  // namespace gbest
