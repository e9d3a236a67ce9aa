#pragma once

// Parameter estimation: Lorentzian PLE lines, single/biexponential decays,
// the cubic linewidth-difference law and temperature series of C-linewidths.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "g4v/data.hpp"
#include "g4v/digest.hpp"
#include "g4v/error.hpp"
#include "g4v/levenberg_marquardt.hpp"
#include "g4v/physics.hpp"
#include "g4v/registry.hpp"
#include "g4v/version.hpp"

namespace g4v {

enum class FitModel { lorentzian, exp1, exp2, cubic_alpha, temp_series };

inline std::string_view to_string(FitModel m) {
    switch (m) {
        case FitModel::lorentzian: return "lorentzian";
        case FitModel::exp1: return "exp1";
        case FitModel::exp2: return "exp2";
        case FitModel::cubic_alpha: return "cubic_alpha";
        case FitModel::temp_series: return "temp_series";
    }
    return "unknown";
}

inline FitModel fit_model_from_string(std::string_view s) {
    for (auto m : {FitModel::lorentzian, FitModel::exp1, FitModel::exp2, FitModel::cubic_alpha, FitModel::temp_series})
        if (to_string(m) == s) return m;
    throw ParseError("unknown fit model '" + std::string(s) + "'");
}

struct FitParameter {
    std::string name;
    double value = 0.0;
    std::string unit;
    std::optional<double> std_error;

    bool operator==(const FitParameter&) const = default;
};

struct FitReport {
    FitModel model = FitModel::lorentzian;
    std::vector<FitParameter> params;
    std::vector<FitParameter> derived;  // quantities computed from the fitted parameters
    double reduced_chi2 = 0.0;
    int n_iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    std::vector<std::string> warnings;
    std::string input_digest;
    std::string toolkit_version = g4v::toolkit_version;

    const FitParameter* find(std::string_view name) const {
        for (const auto& p : params)
            if (p.name == name) return &p;
        for (const auto& p : derived)
            if (p.name == name) return &p;
        return nullptr;
    }
    double value(std::string_view name) const {
        if (const auto* p = find(name)) return p->value;
        throw std::out_of_range("fit report has no parameter '" + std::string(name) + "'");
    }
    std::optional<double> std_error(std::string_view name) const {
        const auto* p = find(name);
        return p ? p->std_error : std::nullopt;
    }
    bool has_warning(std::string_view fragment) const {
        return std::any_of(warnings.begin(), warnings.end(),
                           [&](const std::string& w) { return w.find(fragment) != std::string::npos; });
    }

    bool operator==(const FitReport&) const = default;
};

// ---------------------------------------------------------------------------
// Curve models

// offset + amplitude * (fwhm/2)^2 / ((x - center)^2 + (fwhm/2)^2)
struct LorentzianModel {
    static constexpr int n_params = 4;  // center, fwhm, amplitude, offset
    using Params = ParamVector<4>;

    double value(double x, const Params& p) const {
        const double hw = 0.5 * p[1];
        const double d = x - p[0];
        return p[3] + p[2] * hw * hw / (d * d + hw * hw);
    }
    Params gradient(double x, const Params& p) const {
        const double hw = 0.5 * p[1];
        const double d = x - p[0];
        const double den = d * d + hw * hw;
        const double den2 = den * den;
        Params g;
        g[0] = p[2] * hw * hw * 2.0 * d / den2;
        g[1] = p[2] * hw * d * d / den2;
        g[2] = hw * hw / den;
        g[3] = 1.0;
        return g;
    }
    bool admissible(const Params& p) const { return p[1] > 0.0; }
};

// amplitude * exp(-(t - t0)/lifetime) + offset, t0 = fit window start.
struct Exp1Model {
    static constexpr int n_params = 3;  // amplitude, lifetime, offset
    using Params = ParamVector<3>;
    double t0 = 0.0;

    double value(double t, const Params& p) const { return p[0] * std::exp(-(t - t0) / p[1]) + p[2]; }
    Params gradient(double t, const Params& p) const {
        const double e = std::exp(-(t - t0) / p[1]);
        Params g;
        g << e, p[0] * e * (t - t0) / (p[1] * p[1]), 1.0;
        return g;
    }
    bool admissible(const Params& p) const { return p[1] > 0.0; }
};

struct Exp2Model {
    static constexpr int n_params = 5;  // amplitude_1, lifetime_1, amplitude_2, lifetime_2, offset
    using Params = ParamVector<5>;
    double t0 = 0.0;

    double value(double t, const Params& p) const {
        return p[0] * std::exp(-(t - t0) / p[1]) + p[2] * std::exp(-(t - t0) / p[3]) + p[4];
    }
    Params gradient(double t, const Params& p) const {
        const double s = t - t0;
        const double e1 = std::exp(-s / p[1]);
        const double e2 = std::exp(-s / p[3]);
        Params g;
        g << e1, p[0] * e1 * s / (p[1] * p[1]), e2, p[2] * e2 * s / (p[3] * p[3]), 1.0;
        return g;
    }
    bool admissible(const Params& p) const { return p[1] > 0.0 && p[3] > 0.0; }
};

// C-linewidth versus temperature with gamma_others (and optionally alpha_gs) free.
template <int N>
struct TemperatureSeriesModel {
    static_assert(N == 1 || N == 2);
    static constexpr int n_params = N;  // gamma_others[, alpha_gs]
    using Params = ParamVector<N>;
    EmitterParams base;

    EmitterParams with(const Params& p) const {
        EmitterParams e = base;
        e.gamma_others = p[0];
        if constexpr (N == 2) e.alpha_gs = p[1];
        return e;
    }
    double value(double t, const Params& p) const { return linewidth_c(with(p), t).total; }
    Params gradient(double t, const Params& p) const {
        Params g;
        g[0] = 1.0;
        if constexpr (N == 2) {
            const double f = base.f_gs;
            g[1] = f * f * f * 1e3 * bose_occupation(f, t);
        }
        (void)p;
        return g;
    }
    bool admissible(const Params& p) const {
        if constexpr (N == 2) return p[1] >= 0.0;
        (void)p;
        return true;
    }
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> poisson_weights(std::span<const double> counts) {
    std::vector<double> w(counts.size());
    std::transform(counts.begin(), counts.end(), w.begin(), [](double c) { return 1.0 / std::max(c, 1.0); });
    return w;
}

inline double median(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lower);
    }
    return m;
}

// Copies an LM result into a report; scale multiplies the covariance (1 for
// absolute Poisson weights, the residual variance for unit weights).
template <int N>
void fill_report(FitReport& r, const LmResult<N>& lm, std::span<const std::string_view> names,
                 std::span<const std::string_view> units, std::size_t n_points, double covariance_scale = 1.0) {
    r.params.clear();
    for (int k = 0; k < N; ++k) {
        FitParameter fp{std::string(names[k]), lm.params[k], std::string(units[k]), std::nullopt};
        if (lm.covariance) fp.std_error = std::sqrt((*lm.covariance)(k, k) * covariance_scale);
        r.params.push_back(std::move(fp));
    }
    const auto dof = static_cast<double>(n_points) - N;
    r.reduced_chi2 = dof > 0 ? lm.cost / dof : 0.0;
    r.n_iterations = lm.iterations;
    r.converged = lm.converged;
    r.gradient_norm = lm.gradient_norm;
    if (!lm.converged) r.warnings.push_back("fit did not converge: " + lm.stop_reason);
    if (!lm.covariance) r.warnings.push_back("covariance not positive-definite; std errors omitted");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lorentzian

inline constexpr std::size_t min_spectrum_points = 8;

struct LorentzianGuess {
    double center, fwhm, amplitude, offset;
};

// Offset = median, center = argmax, amplitude = max - offset, fwhm from the
// half-maximum crossings found by linear interpolation.
inline LorentzianGuess initial_lorentzian_guess(const Spectrum& s) {
    const auto& x = s.detunings;
    const auto& y = s.counts;
    const auto imax = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double offset = detail::median(y);
    const double amplitude = y[imax] - offset;
    const double half = offset + 0.5 * amplitude;

    std::optional<double> left, right;
    for (std::size_t i = imax; i > 0; --i) {
        if (y[i - 1] < half) {
            left = x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1]);
            break;
        }
    }
    for (std::size_t i = imax; i + 1 < y.size(); ++i) {
        if (y[i + 1] < half) {
            right = x[i] + (y[i] - half) * (x[i + 1] - x[i]) / (y[i] - y[i + 1]);
            break;
        }
    }
    double fwhm;
    if (left && right) fwhm = *right - *left;
    else if (left) fwhm = 2.0 * (x[imax] - *left);
    else if (right) fwhm = 2.0 * (*right - x[imax]);
    else fwhm = 0.25 * (x.back() - x.front());
    if (!(fwhm > 0.0)) fwhm = x[std::min(imax + 1, x.size() - 1)] - x[imax > 0 ? imax - 1 : 0];
    return {x[imax], fwhm, amplitude, offset};
}

inline FitReport fit_lorentzian(const Spectrum& s, const LmOptions& opt = {}) {
    s.validate();
    if (s.size() < min_spectrum_points)
        throw FitError("spectrum has " + std::to_string(s.size()) + " points; at least 8 required");
    const auto [lo, hi] = std::minmax_element(s.counts.begin(), s.counts.end());
    if (*lo == *hi) throw FitError("no peak: all counts equal");

    FitReport r;
    r.model = FitModel::lorentzian;
    r.input_digest = content_digest(s);

    const auto g = initial_lorentzian_guess(s);
    if (!(*hi > 1.2 * g.offset)) r.warnings.push_back("weak peak: maximum not above 1.2 x median");

    LorentzianModel::Params p0;
    p0 << g.center, g.fwhm, g.amplitude, g.offset;
    const auto w = detail::poisson_weights(s.counts);
    const auto lm = levenberg_marquardt(LorentzianModel{}, s.detunings, s.counts, w, p0, opt);

    static constexpr std::string_view names[] = {"center", "fwhm", "amplitude", "offset"};
    static constexpr std::string_view units[] = {"MHz", "MHz", "counts", "counts"};
    detail::fill_report<4>(r, lm, names, units, s.size());
    return r;
}

// ---------------------------------------------------------------------------
// Decay traces

enum class DecayModel { exp1, exp2 };

struct DecayFitOptions {
    std::optional<double> window_start_ns;  // default: bin of maximum counts
    LmOptions lm{};
};

inline constexpr double degenerate_lifetime_ratio = 1.5;

namespace detail {

struct DecayWindow {
    std::vector<double> t, y, w;
    double t0 = 0.0;
};

inline DecayWindow decay_window(const DecayTrace& trace, std::optional<double> start) {
    std::size_t i0 = 0;
    if (start) {
        while (i0 < trace.size() && trace.bin_centers[i0] < *start) ++i0;
    } else {
        i0 = static_cast<std::size_t>(std::max_element(trace.counts.begin(), trace.counts.end()) -
                                      trace.counts.begin());
    }
    DecayWindow win;
    win.t.assign(trace.bin_centers.begin() + static_cast<std::ptrdiff_t>(i0), trace.bin_centers.end());
    win.y.assign(trace.counts.begin() + static_cast<std::ptrdiff_t>(i0), trace.counts.end());
    win.w = poisson_weights(win.y);
    win.t0 = win.t.empty() ? 0.0 : win.t.front();
    return win;
}

inline Exp1Model::Params exp1_guess(std::span<const double> t, std::span<const double> y, double t0) {
    const std::size_t n = y.size();
    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    double b = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) b += y[i];
    b /= static_cast<double>(tail);
    double a = y[0] - b;
    if (!(a > 0.0)) a = std::max(y[0], 1.0);
    const double level = b + a / std::numbers::e;
    double tau = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        if (y[i] <= level) {
            const double frac = (y[i - 1] - level) / std::max(y[i - 1] - y[i], 1e-300);
            tau = t[i - 1] + frac * (t[i] - t[i - 1]) - t0;
            break;
        }
    }
    if (!(tau > 0.0)) tau = 0.25 * (t.back() - t0);
    if (!(tau > 0.0)) tau = 1.0;
    return {a, tau, b};
}

}  // namespace detail

inline FitReport fit_decay(const DecayTrace& trace, DecayModel model, const DecayFitOptions& opt = {}) {
    trace.validate();
    if (trace.size() == 0) throw FitError("no decay: empty trace");
    const auto [lo, hi] = std::minmax_element(trace.counts.begin(), trace.counts.end());
    if (*lo == *hi) throw FitError("no decay: constant trace");

    const auto win = detail::decay_window(trace, opt.window_start_ns);
    const std::size_t n_params = model == DecayModel::exp1 ? 3 : 5;
    if (win.t.size() <= n_params) throw FitError("no decay: too few bins in fit window");
    if (std::all_of(win.y.begin(), win.y.end(), [&](double c) { return c == win.y.front(); }))
        throw FitError("no decay: constant trace in fit window");

    FitReport r;
    r.input_digest = content_digest(trace);
    double tau_reported = 0.0;
    std::optional<double> tau_error;

    const Exp1Model m1{win.t0};
    const auto p1 = detail::exp1_guess(win.t, win.y, win.t0);
    const auto lm1 = levenberg_marquardt(m1, win.t, win.y, win.w, p1, opt.lm);

    if (model == DecayModel::exp1) {
        r.model = FitModel::exp1;
        static constexpr std::string_view names[] = {"amplitude", "lifetime", "offset"};
        static constexpr std::string_view units[] = {"counts", "ns", "counts"};
        detail::fill_report<3>(r, lm1, names, units, win.t.size());
        tau_reported = lm1.params[1];
        tau_error = r.std_error("lifetime");
    } else {
        r.model = FitModel::exp2;
        const Exp2Model m2{win.t0};
        std::vector<Exp2Model::Params> starts;
        const double tau1 = lm1.params[1];
        const double y0 = win.y.front();
        // Tail fits past a few single-exponential lifetimes isolate the slow component.
        for (double k : {0.5, 1.0, 2.0, 3.0, 5.0}) {
            const double ts = win.t0 + k * tau1;
            auto it = std::lower_bound(win.t.begin(), win.t.end(), ts);
            const auto off = static_cast<std::size_t>(it - win.t.begin());
            if (win.t.size() - off < 10) continue;
            std::span<const double> tt(win.t.data() + off, win.t.size() - off);
            std::span<const double> yy(win.y.data() + off, win.y.size() - off);
            std::span<const double> ww(win.w.data() + off, win.w.size() - off);
            const Exp1Model tail_model{tt.front()};
            const auto tail = levenberg_marquardt(tail_model, tt, yy, ww, detail::exp1_guess(tt, yy, tt.front()), opt.lm);
            const double tau_s = tail.params[1];
            if (!(tau_s > 0.0) || !std::isfinite(tau_s)) continue;
            const double a_s = tail.params[0] * std::exp((tt.front() - win.t0) / tau_s);
            double a_f = y0 - tail.params[2] - a_s;
            if (!(a_f > 0.0)) a_f = 0.1 * y0;
            for (double div : {4.0, 10.0}) {
                Exp2Model::Params p;
                p << a_f, tau_s / div, a_s, tau_s, tail.params[2];
                starts.push_back(p);
            }
        }
        {
            Exp2Model::Params p;
            p << 0.5 * lm1.params[0], tau1 / 3.0, 0.5 * lm1.params[0], 2.0 * tau1, lm1.params[2];
            starts.push_back(p);
        }

        std::optional<LmResult<5>> best;
        for (const auto& s : starts) {
            auto lm = levenberg_marquardt(m2, win.t, win.y, win.w, s, opt.lm);
            if (!lm.params.allFinite()) continue;
            const bool better = !best || (lm.converged && !best->converged) ||
                                (lm.converged == best->converged && lm.cost < best->cost);
            if (better) best = std::move(lm);
        }
        if (!best) throw FitError("biexponential fit failed from every starting point");

        // Report components ordered by lifetime.
        auto lm = *best;
        if (lm.params[1] > lm.params[3]) {
            std::swap(lm.params[0], lm.params[2]);
            std::swap(lm.params[1], lm.params[3]);
            if (lm.covariance) {
                Eigen::Matrix<double, 5, 5> perm = Eigen::Matrix<double, 5, 5>::Zero();
                const int order[] = {2, 3, 0, 1, 4};
                for (int i = 0; i < 5; ++i) perm(i, order[i]) = 1.0;
                lm.covariance = perm * *lm.covariance * perm.transpose();
            }
        }
        static constexpr std::string_view names[] = {"amplitude_fast", "lifetime_fast", "amplitude_slow",
                                                     "lifetime_slow", "offset"};
        static constexpr std::string_view units[] = {"counts", "ns", "counts", "ns", "counts"};
        detail::fill_report<5>(r, lm, names, units, win.t.size());
        if (lm.params[3] / lm.params[1] < degenerate_lifetime_ratio)
            r.warnings.push_back("components degenerate: lifetime ratio below 1.5");
        tau_reported = lm.params[3];
        tau_error = r.std_error("lifetime_slow");
    }

    FitParameter tl{"transform_limit", transform_limit(tau_reported), "MHz", std::nullopt};
    if (tau_error) tl.std_error = tl.value * *tau_error / tau_reported;
    r.derived.push_back(std::move(tl));
    r.derived.push_back({"window_start", win.t0, "ns", std::nullopt});
    return r;
}

// ---------------------------------------------------------------------------
// Cubic law for the C/D linewidth difference

struct AlphaPoint {
    double f_gs = 0.0;         // GHz
    double delta_gamma = 0.0;  // MHz
    std::optional<double> weight;
};

enum class AlphaWeighting {
    inverse_square,  // 1 / delta_gamma^2 (equal relative errors)
    uniform,
    explicit_weights // per-point weight column
};

// Weighted least squares through the origin in the regressor f^3.
inline FitReport fit_cubic_alpha(std::span<const AlphaPoint> points,
                                 AlphaWeighting weighting = AlphaWeighting::inverse_square) {
    if (points.empty()) throw FitError("cubic alpha fit: no points");
    std::vector<double> f, dg;
    double num = 0.0, den = 0.0;
    std::vector<double> w;
    for (const auto& pt : points) {
        if (!(pt.f_gs > 0.0)) throw FitError("cubic alpha fit: f_gs must be > 0");
        if (!(pt.delta_gamma > 0.0)) throw FitError("cubic alpha fit: delta_gamma must be > 0");
        double wi = 1.0;
        switch (weighting) {
            case AlphaWeighting::inverse_square: wi = 1.0 / (pt.delta_gamma * pt.delta_gamma); break;
            case AlphaWeighting::uniform: wi = 1.0; break;
            case AlphaWeighting::explicit_weights:
                if (!pt.weight || !(*pt.weight > 0.0)) throw FitError("cubic alpha fit: explicit weight missing or <= 0");
                wi = *pt.weight;
                break;
        }
        const double f3 = pt.f_gs * pt.f_gs * pt.f_gs;
        const double y = pt.delta_gamma * 1e-3;  // GHz
        num += wi * y * f3;
        den += wi * f3 * f3;
        w.push_back(wi);
        f.push_back(pt.f_gs);
        dg.push_back(pt.delta_gamma);
    }
    const double alpha = num / den;

    double cost = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = dg[i] * 1e-3 - alpha * f[i] * f[i] * f[i];
        cost += w[i] * r * r;
    }

    FitReport r;
    r.model = FitModel::cubic_alpha;
    r.input_digest = content_digest(f, dg);
    r.converged = true;
    r.n_iterations = 0;
    FitParameter a{"alpha_tilde", alpha, "GHz^-2", std::nullopt};
    if (f.size() > 1) {
        const double s2 = cost / static_cast<double>(f.size() - 1);
        r.reduced_chi2 = s2;
        if (s2 > 0.0) a.std_error = std::sqrt(s2 / den);
    } else {
        r.warnings.push_back("single point: no degrees of freedom, std error omitted");
    }
    r.params.push_back(a);

    const EmitterRegistry reg;
    for (const char* name : {"SiV", "SnV"}) {
        EmitterParams e = reg.at(name);
        e.alpha_gs = alpha;
        FitParameter pred{std::string("delta_gamma_") + name, linewidth_difference(e), "MHz", std::nullopt};
        if (a.std_error) pred.std_error = pred.value * *a.std_error / alpha;
        r.derived.push_back(std::move(pred));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Temperature series of C-transition linewidths

struct TemperaturePoint {
    double temperature = 0.0;  // K
    double linewidth = 0.0;    // MHz
};

enum class TemperatureFreeParams { gamma_others, gamma_others_and_alpha_gs };

struct TemperatureSeriesOptions {
    TemperatureFreeParams free = TemperatureFreeParams::gamma_others;
    bool exclude_beyond_validity = false;  // drop points above single_phonon_validity_limit_k
    LmOptions lm{};
};

inline FitReport fit_temperature_series(std::span<const TemperaturePoint> points, const EmitterParams& emitter,
                                        const TemperatureSeriesOptions& opt = {}) {
    emitter.validate();
    std::vector<double> t, y;
    std::size_t excluded = 0;
    for (const auto& pt : points) {
        if (!(pt.temperature >= 0.0) || !std::isfinite(pt.linewidth))
            throw FitError("temperature series: invalid point");
        if (opt.exclude_beyond_validity && pt.temperature > single_phonon_validity_limit_k) {
            ++excluded;
            continue;
        }
        t.push_back(pt.temperature);
        y.push_back(pt.linewidth);
    }
    const std::size_t n_free = opt.free == TemperatureFreeParams::gamma_others ? 1 : 2;
    if (t.size() < 2) throw FitError("temperature series: at least 2 points required");
    if (t.size() < n_free) throw FitError("temperature series: fewer points than free parameters");
    {
        auto sorted = t;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw FitError("temperature series: temperatures must be distinct");
    }

    FitReport r;
    r.model = FitModel::temp_series;
    r.input_digest = content_digest(t, y);
    if (excluded) r.warnings.push_back("excluded " + std::to_string(excluded) + " points above 20 K");

    const std::vector<double> w(t.size(), 1.0);
    EmitterParams fitted = emitter;

    auto finish = [&]<int N>(const LmResult<N>& lm, std::span<const std::string_view> names,
                             std::span<const std::string_view> units) {
        const double dof = static_cast<double>(t.size()) - N;
        const double scale = dof > 0 ? lm.cost / dof : 0.0;
        detail::fill_report<N>(r, lm, names, units, t.size(), scale);
        if (dof <= 0) {
            for (auto& p : r.params) p.std_error.reset();
        }
        fitted.gamma_others = lm.params[0];
        if constexpr (N == 2) fitted.alpha_gs = lm.params[1];
    };

    EmitterParams zero = emitter;
    zero.gamma_others = 0.0;
    double others0 = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) others0 += y[i] - linewidth_c(zero, t[i]).total;
    others0 /= static_cast<double>(t.size());

    if (opt.free == TemperatureFreeParams::gamma_others) {
        const TemperatureSeriesModel<1> m{emitter};
        ParamVector<1> p0;
        p0 << others0;
        const auto lm = levenberg_marquardt(m, t, y, w, p0, opt.lm);
        static constexpr std::string_view names[] = {"gamma_others"};
        static constexpr std::string_view units[] = {"MHz"};
        finish(lm, names, units);
    } else {
        const TemperatureSeriesModel<2> m{emitter};
        ParamVector<2> p0;
        p0 << others0, emitter.alpha_gs > 0.0 ? emitter.alpha_gs : reference_alpha;
        const auto lm = levenberg_marquardt(m, t, y, w, p0, opt.lm);
        static constexpr std::string_view names[] = {"gamma_others", "alpha_gs"};
        static constexpr std::string_view units[] = {"MHz", "GHz^-2"};
        finish(lm, names, units);
    }

    if (fitted.gamma_others < 0.0) r.warnings.push_back("negative residual broadening");
    for (double ti : t)
        if (linewidth_c(fitted, ti).negative) {
            r.warnings.push_back("negative total linewidth predicted");
            break;
        }
    const auto th = temperature_threshold(fitted, 1.2);
    if (th.bounded()) r.derived.push_back({"threshold_1p2", th.temperature, "K", std::nullopt});
    return r;
}

// Sums counts of scans recorded on a common detuning grid; Poisson weights stay valid.
inline Spectrum stack_spectra(std::span<const Spectrum> scans) {
    if (scans.empty()) throw DomainError("stack_spectra: no scans");
    Spectrum out = scans.front();
    out.meta.scan_index.reset();
    for (std::size_t k = 1; k < scans.size(); ++k) {
        if (scans[k].detunings != out.detunings) throw DomainError("stack_spectra: scans use different grids");
        for (std::size_t i = 0; i < out.size(); ++i) out.counts[i] += scans[k].counts[i];
    }
    return out;
}

}  // namespace g4v
