#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gbest/data.hpp"
#include "gbest/error.hpp"

namespace gbest {

// Cox proportional hazards model with Breslow tie handling and a Breslow
// baseline cumulative hazard, so S(t|x) = exp(-H0(t) * exp(beta'x)).
struct CoxModel {
    std::vector<double> coefficients;
    StepFunction baseline_cumulative_hazard;
    std::vector<std::string> feature_names;

    double risk_score(std::span<const double> x) const {
        if (x.size() != coefficients.size()) throw Error("CoxModel: covariate vector has wrong length");
        double eta = 0.0;
        for (std::size_t j = 0; j < coefficients.size(); ++j) eta += coefficients[j] * x[j];
        return eta;
    }
};

namespace detail {

struct CoxWork {
    // Rows sorted by descending time; ties grouped.
    Eigen::MatrixXd x;          // centered covariates
    Eigen::VectorXd weight;
    Eigen::VectorXd time;
    std::vector<char> event;
    Eigen::VectorXd center;
    double total_event_weight = 0.0;
};

inline CoxWork cox_prepare(const Dataset& d) {
    const auto n = static_cast<Eigen::Index>(d.n());
    const auto p = static_cast<Eigen::Index>(d.p());
    std::vector<std::size_t> order(d.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d.record(a).time > d.record(b).time; });

    CoxWork w;
    w.x.resize(n, p);
    w.weight.resize(n);
    w.time.resize(n);
    w.event.resize(d.n());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = d.record(order[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < p; ++j) w.x(i, j) = r.covariates[static_cast<std::size_t>(j)];
        w.weight(i) = r.weight;
        w.time(i) = r.time;
        w.event[static_cast<std::size_t>(i)] = r.event ? 1 : 0;
        if (r.event) w.total_event_weight += r.weight;
    }
    const double wsum = w.weight.sum();
    if (!(wsum > 0.0)) throw Error("cox_fit: all weights are zero");
    w.center = (w.x.transpose() * w.weight) / wsum;
    w.x.rowwise() -= w.center.transpose();
    return w;
}

// Breslow log partial likelihood with gradient and Hessian, one sweep over
// descending times (the risk set grows as the sweep advances).
inline double cox_loglik(const CoxWork& w, const Eigen::VectorXd& beta, Eigen::VectorXd* grad,
                         Eigen::MatrixXd* hess) {
    const Eigen::Index n = w.x.rows();
    const Eigen::Index p = w.x.cols();
    double ll = 0.0;
    if (grad) grad->setZero(p);
    if (hess) hess->setZero(p, p);

    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);

    Eigen::Index i = 0;
    while (i < n) {
        const double t = w.time(i);
        Eigen::Index j = i;
        while (j < n && w.time(j) == t) {
            const double r = w.weight(j) * std::exp(w.x.row(j).dot(beta));
            s0 += r;
            s1 += r * w.x.row(j).transpose();
            if (hess) s2 += r * (w.x.row(j).transpose() * w.x.row(j));
            ++j;
        }
        double dw = 0.0;
        Eigen::VectorXd dx = Eigen::VectorXd::Zero(p);
        for (Eigen::Index m = i; m < j; ++m) {
            if (w.event[static_cast<std::size_t>(m)]) {
                dw += w.weight(m);
                dx += w.weight(m) * w.x.row(m).transpose();
                ll += w.weight(m) * w.x.row(m).dot(beta);
            }
        }
        if (dw > 0.0) {
            ll -= dw * std::log(s0);
            if (grad) *grad += dx - dw * (s1 / s0);
            if (hess) {
                const Eigen::VectorXd mean = s1 / s0;
                *hess -= dw * (s2 / s0 - mean * mean.transpose());
            }
        }
        i = j;
    }
    return ll;
}

}  // namespace detail

// Newton-Raphson fit of the Breslow partial likelihood. Iterates until the
// gradient max-norm drops below 1e-8 (at most 50 iterations, step halving up
// to 30 times); failure to converge, as under monotone-likelihood
// separation, raises ConvergenceError so callers can fall back.
inline CoxModel cox_fit(const Dataset& d) {
    if (d.event_count() == 0) throw Error("cox_fit: dataset has no events");
    auto w = detail::cox_prepare(d);
    if (!(w.total_event_weight > 0.0)) throw Error("cox_fit: no event carries positive weight");
    const Eigen::Index p = w.x.cols();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd grad(p);
    Eigen::MatrixXd hess(p, p);
    double ll = detail::cox_loglik(w, beta, &grad, &hess);

    bool converged = false;
    for (int iter = 0; iter < 50; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() < 1e-8) {
            converged = true;
            break;
        }
        Eigen::MatrixXd neg_h = -hess;
        Eigen::VectorXd step = neg_h.ldlt().solve(grad);
        if (!step.allFinite()) {
            neg_h.diagonal().array() += 1e-8 * (1.0 + neg_h.diagonal().array().abs().maxCoeff());
            step = neg_h.ldlt().solve(grad);
            if (!step.allFinite()) throw ConvergenceError("cox_fit: singular information matrix");
        }
        double lambda = 1.0;
        bool improved = false;
        for (int h = 0; h < 30; ++h) {
            const Eigen::VectorXd candidate = beta + lambda * step;
            const double ll_new = detail::cox_loglik(w, candidate, nullptr, nullptr);
            if (std::isfinite(ll_new) && ll_new > ll) {
                beta = candidate;
                ll = ll_new;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) throw ConvergenceError("cox_fit: step halving failed to increase the partial likelihood");
        ll = detail::cox_loglik(w, beta, &grad, &hess);
    }
    if (!converged && grad.lpNorm<Eigen::Infinity>() >= 1e-8)
        throw ConvergenceError("cox_fit: Newton iterations did not converge (possible separation)");

    // Breslow baseline on the raw covariate scale.
    const double center_shift = std::exp(-beta.dot(w.center));
    std::vector<double> knots, values;
    {
        const Eigen::Index n = w.x.rows();
        double s0 = 0.0;
        std::vector<std::pair<double, double>> increments;  // (time, dH) in descending time order
        Eigen::Index i = 0;
        while (i < n) {
            const double t = w.time(i);
            Eigen::Index j = i;
            double dw = 0.0;
            while (j < n && w.time(j) == t) {
                s0 += w.weight(j) * std::exp(w.x.row(j).dot(beta));
                if (w.event[static_cast<std::size_t>(j)]) dw += w.weight(j);
                ++j;
            }
            if (dw > 0.0) increments.emplace_back(t, dw / s0 * center_shift);
            i = j;
        }
        double h = 0.0;
        for (auto it = increments.rbegin(); it != increments.rend(); ++it) {
            h += it->second;
            knots.push_back(it->first);
            values.push_back(h);
        }
    }

    CoxModel model;
    model.coefficients.assign(beta.data(), beta.data() + beta.size());
    model.baseline_cumulative_hazard = StepFunction(std::move(knots), std::move(values), 0.0);
    model.feature_names = d.feature_names();
    return model;
}

// S(t|x) = exp(-H0(t) * exp(beta'x)) as a step function on the baseline knots.
inline StepFunction cox_survival(const CoxModel& m, std::span<const double> x) {
    const double risk = std::exp(m.risk_score(x));
    const auto& h0 = m.baseline_cumulative_hazard;
    std::vector<double> values(h0.values().size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::exp(-h0.values()[i] * risk);
    return StepFunction(h0.knots(), std::move(values), 1.0);
}

inline StepFunction cox_survival(const CoxModel& m, const std::vector<double>& x) {
    return cox_survival(m, std::span<const double>(x));
}

}  // namespace gbest
