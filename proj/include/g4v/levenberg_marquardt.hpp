#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) for small dense weighted
// least-squares problems:  minimize sum_i w_i (y_i - f(x_i; p))^2.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace g4v {

template <int N>
using ParamVector = Eigen::Matrix<double, N, 1>;

// A curve model with an analytic gradient with respect to its parameters.
template <class M>
concept CurveModel = requires(const M m, double x, const ParamVector<M::n_params>& p) {
    { M::n_params } -> std::convertible_to<int>;
    { m.value(x, p) } -> std::convertible_to<double>;
    { m.gradient(x, p) } -> std::convertible_to<ParamVector<M::n_params>>;
    { m.admissible(p) } -> std::convertible_to<bool>;
};

struct LmOptions {
    double xtol = 1e-8;         // relative (scaled) parameter change
    int max_iterations = 200;   // accepted + rejected trial steps
    double lambda0 = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 10.0;
    double gtol = 1e-4;         // max |cos| between residual and Jacobian columns
};

template <int N>
struct LmResult {
    ParamVector<N> params;
    std::optional<Eigen::Matrix<double, N, N>> covariance;  // (J^T W J)^-1 when positive-definite
    double cost = 0.0;             // weighted sum of squared residuals
    double gradient_norm = 0.0;    // max scaled |cos| at the final point
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
};

namespace detail {

template <CurveModel M>
struct NormalEquations {
    static constexpr int N = M::n_params;
    Eigen::Matrix<double, N, N> jtj = Eigen::Matrix<double, N, N>::Zero();
    ParamVector<N> jtr = ParamVector<N>::Zero();
    double cost = 0.0;
};

template <CurveModel M>
NormalEquations<M> normal_equations(const M& model, std::span<const double> x, std::span<const double> y,
                                    std::span<const double> w, const ParamVector<M::n_params>& p) {
    NormalEquations<M> ne;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - model.value(x[i], p);
        const auto g = model.gradient(x[i], p);
        ne.jtj.noalias() += w[i] * g * g.transpose();
        ne.jtr.noalias() += w[i] * r * g;
        ne.cost += w[i] * r * r;
    }
    return ne;
}

template <CurveModel M>
double cost_at(const M& model, std::span<const double> x, std::span<const double> y, std::span<const double> w,
               const ParamVector<M::n_params>& p) {
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - model.value(x[i], p);
        c += w[i] * r * r;
    }
    return c;
}

// Largest |g_k| / sqrt(A_kk * cost): cosine between the weighted residual and
// each Jacobian column. Zero at an exact stationary point.
template <int N>
double scaled_gradient(const Eigen::Matrix<double, N, N>& jtj, const ParamVector<N>& jtr, double cost) {
    double worst = 0.0;
    for (int k = 0; k < N; ++k) {
        const double denom = std::sqrt(jtj(k, k) * cost);
        if (denom > 0.0) worst = std::max(worst, std::abs(jtr(k)) / denom);
    }
    return worst;
}

}  // namespace detail

template <CurveModel M>
double weighted_cost(const M& model, std::span<const double> x, std::span<const double> y,
                     std::span<const double> w, const ParamVector<M::n_params>& p) {
    return detail::cost_at(model, x, y, w, p);
}

template <CurveModel M>
LmResult<M::n_params> levenberg_marquardt(const M& model, std::span<const double> x, std::span<const double> y,
                                          std::span<const double> w, ParamVector<M::n_params> p,
                                          const LmOptions& opt = {}) {
    constexpr int N = M::n_params;
    LmResult<N> res;

    double signal = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) signal += w[i] * y[i] * y[i];
    const double exact_fit_cost = 1e-28 * std::max(signal, 1e-300);

    auto ne = detail::normal_equations(model, x, y, w, p);
    double lambda = opt.lambda0;
    bool step_small = false;

    while (res.iterations < opt.max_iterations) {
        if (ne.cost <= exact_fit_cost) {
            step_small = true;
            res.stop_reason = "exact fit";
            break;
        }
        ++res.iterations;

        ParamVector<N> diag = ne.jtj.diagonal();
        const double diag_floor = std::max(diag.maxCoeff(), 1.0) * 1e-15;
        diag = diag.cwiseMax(diag_floor);

        Eigen::Matrix<double, N, N> damped = ne.jtj;
        damped.diagonal() += lambda * diag;
        const ParamVector<N> delta = damped.ldlt().solve(ne.jtr);
        const ParamVector<N> trial = p + delta;

        const bool usable = delta.allFinite() && model.admissible(trial);
        const double trial_cost = usable ? detail::cost_at(model, x, y, w, trial) : INFINITY;

        if (!(trial_cost <= ne.cost)) {
            lambda *= opt.lambda_up;
            if (lambda > 1e16) {
                res.stop_reason = "damping exhausted";
                break;
            }
            continue;
        }

        const ParamVector<N> scale = diag.cwiseSqrt();
        const double step = scale.cwiseProduct(delta).norm();
        const double size = scale.cwiseProduct(p).norm();
        p = trial;
        ne = detail::normal_equations(model, x, y, w, p);
        lambda = std::max(lambda / opt.lambda_down, 1e-12);

        if (step <= opt.xtol * (size + opt.xtol)) {
            step_small = true;
            res.stop_reason = "parameter change below tolerance";
            break;
        }
    }
    if (res.stop_reason.empty()) res.stop_reason = "iteration limit";

    res.params = p;
    res.cost = ne.cost;
    res.gradient_norm = detail::scaled_gradient<N>(ne.jtj, ne.jtr, ne.cost);
    const bool exact = ne.cost <= exact_fit_cost;
    const bool stationary = exact || res.gradient_norm < opt.gtol;
    // A stalled damping schedule at a stationary point is rounding-limited convergence.
    res.converged = stationary && (step_small || res.stop_reason == "damping exhausted");

    Eigen::LLT<Eigen::Matrix<double, N, N>> llt(ne.jtj);
    if (llt.info() == Eigen::Success) {
        Eigen::Matrix<double, N, N> cov = llt.solve(Eigen::Matrix<double, N, N>::Identity());
        if (cov.allFinite() && (cov.diagonal().array() > 0.0).all()) res.covariance = cov;
    }
    return res;
}

}  // namespace g4v
