#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "gbest/data.hpp"
#include "gbest/error.hpp"

namespace gbest {

// Weibull accelerated failure time model:
//   log T = intercept + beta'x + scale * eps,  eps ~ standard minimum Gumbel,
// equivalently S(t|x) = exp(-(t/lambda(x))^(1/scale)), lambda(x) = exp(intercept + beta'x).
struct WeibullAftModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    double log_scale = 0.0;

    double scale() const { return std::exp(log_scale); }

    double linear_predictor(std::span<const double> x) const {
        if (x.size() != coefficients.size()) throw Error("WeibullAftModel: covariate vector has wrong length");
        double lp = intercept;
        for (std::size_t j = 0; j < coefficients.size(); ++j) lp += coefficients[j] * x[j];
        return lp;
    }
};

// Continuous survival function for one covariate vector, evaluable at any t >= 0.
class WeibullSurvival {
public:
    WeibullSurvival(double lambda, double scale) : lambda_(lambda), scale_(scale) {}

    double operator()(double t) const {
        if (!(t >= 0.0)) throw Error("WeibullSurvival: t must be nonnegative");
        if (t == 0.0) return 1.0;
        return std::exp(-std::pow(t / lambda_, 1.0 / scale_));
    }

    // S(median()) = 1/2.
    double median() const { return lambda_ * std::pow(std::log(2.0), scale_); }

private:
    double lambda_;
    double scale_;
};

inline WeibullSurvival weibull_survival(const WeibullAftModel& m, std::span<const double> x) {
    return WeibullSurvival(std::exp(m.linear_predictor(x)), m.scale());
}

inline WeibullSurvival weibull_survival(const WeibullAftModel& m, const std::vector<double>& x) {
    return weibull_survival(m, std::span<const double>(x));
}

namespace detail {

// Right-censored Weibull AFT log likelihood in theta = (mu, beta, log sigma),
// with analytic gradient and Hessian. z = (log t - mu - beta'x)/sigma.
struct WeibullWork {
    Eigen::MatrixXd c;  // design with leading intercept column
    Eigen::VectorXd y;  // log times
    Eigen::VectorXd w;
    std::vector<char> event;
};

inline double weibull_loglik(const WeibullWork& wk, const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                             Eigen::MatrixXd* hess) {
    const Eigen::Index n = wk.c.rows();
    const Eigen::Index q = wk.c.cols();  // linear parameters
    const double s = theta(q);
    const double sigma = std::exp(s);
    double ll = 0.0;
    if (grad) grad->setZero(q + 1);
    if (hess) hess->setZero(q + 1, q + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double wi = wk.w(i);
        if (wi == 0.0) continue;
        const double z = (wk.y(i) - wk.c.row(i).dot(theta.head(q))) / sigma;
        const double u = std::exp(z);
        const double d = wk.event[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
        ll += wi * (d * (z - s) - u);
        if (grad) {
            const double common = (u - d) / sigma;
            grad->head(q) += wi * common * wk.c.row(i).transpose();
            (*grad)(q) += wi * (u * z - d * (1.0 + z));
        }
        if (hess) {
            const Eigen::VectorXd ci = wk.c.row(i).transpose();
            hess->topLeftCorner(q, q) -= wi * (u / (sigma * sigma)) * (ci * ci.transpose());
            const Eigen::VectorXd cross = wi * (d - u - u * z) / sigma * ci;
            hess->block(0, q, q, 1) += cross;
            hess->block(q, 0, 1, q) += cross.transpose();
            (*hess)(q, q) += wi * (z * (d - u) - u * z * z);
        }
    }
    return ll;
}

}  // namespace detail

// Maximum likelihood fit of the right-censored Weibull AFT model by Newton
// iterations with step halving, to gradient max-norm < 1e-6. Degenerate data
// (scale collapsing to zero) and iteration exhaustion raise ConvergenceError.
inline WeibullAftModel weibull_aft_fit(const Dataset& d) {
    if (d.event_count() == 0) throw Error("weibull_aft_fit: dataset has no events");
    const auto n = static_cast<Eigen::Index>(d.n());
    const auto p = static_cast<Eigen::Index>(d.p());
    const Eigen::Index q = p + 1;

    detail::WeibullWork wk;
    wk.c.resize(n, q);
    wk.y.resize(n);
    wk.w.resize(n);
    wk.event.resize(d.n());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = d.record(static_cast<std::size_t>(i));
        if (!(r.time > 0.0)) throw Error("weibull_aft_fit: times must be positive");
        wk.c(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < p; ++j) wk.c(i, j + 1) = r.covariates[static_cast<std::size_t>(j)];
        wk.y(i) = std::log(r.time);
        wk.w(i) = r.weight;
        wk.event[static_cast<std::size_t>(i)] = r.event ? 1 : 0;
    }

    // Least-squares warm start on log time.
    Eigen::VectorXd theta(q + 1);
    {
        const Eigen::VectorXd lin = (wk.c.transpose() * wk.c + 1e-9 * Eigen::MatrixXd::Identity(q, q))
                                        .ldlt()
                                        .solve(wk.c.transpose() * wk.y);
        const Eigen::VectorXd resid = wk.y - wk.c * lin;
        const double sd = std::sqrt(resid.squaredNorm() / std::max<double>(1.0, static_cast<double>(n - q)));
        theta.head(q) = lin;
        theta(q) = std::log(std::max(sd, 1e-3));
    }

    Eigen::VectorXd grad(q + 1);
    Eigen::MatrixXd hess(q + 1, q + 1);
    double ll = detail::weibull_loglik(wk, theta, &grad, &hess);
    if (!std::isfinite(ll)) throw ConvergenceError("weibull_aft_fit: likelihood not finite at start");

    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() < 1e-6) {
            converged = true;
            break;
        }
        if (theta(q) < std::log(1e-8)) throw ConvergenceError("weibull_aft_fit: scale degenerated toward zero");
        Eigen::MatrixXd neg_h = -hess;
        Eigen::VectorXd step = neg_h.ldlt().solve(grad);
        if (!step.allFinite()) {
            neg_h.diagonal().array() += 1e-8 * (1.0 + neg_h.diagonal().array().abs().maxCoeff());
            step = neg_h.ldlt().solve(grad);
            if (!step.allFinite()) throw ConvergenceError("weibull_aft_fit: singular information matrix");
        }
        double lambda = 1.0;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            const Eigen::VectorXd candidate = theta + lambda * step;
            const double ll_new = detail::weibull_loglik(wk, candidate, nullptr, nullptr);
            if (std::isfinite(ll_new) && ll_new > ll) {
                theta = candidate;
                ll = ll_new;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) throw ConvergenceError("weibull_aft_fit: step halving failed to increase the likelihood");
        ll = detail::weibull_loglik(wk, theta, &grad, &hess);
    }
    if (!converged && grad.lpNorm<Eigen::Infinity>() >= 1e-6)
        throw ConvergenceError("weibull_aft_fit: Newton iterations did not converge");

    WeibullAftModel m;
    m.intercept = theta(0);
    m.coefficients.assign(theta.data() + 1, theta.data() + q);
    m.log_scale = theta(q);
    return m;
}

}  // namespace gbest
