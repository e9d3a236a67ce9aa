#pragma once

// Single-phonon relaxation model for the optical transitions of group-IV
// vacancy centers in diamond.
//
// Unit conventions used throughout:
//   splittings     ordinary frequency, GHz
//   couplings      reduced coupling a = (2 pi)^3 alpha, GHz^-2, so that a
//                  phonon rate in GHz is a * f^3 * n(f, T) for f in GHz
//   linewidths     FWHM, MHz
//   lifetimes      ns
//   temperatures   K

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "g4v/error.hpp"

namespace g4v {

namespace constants {
inline constexpr double planck = 6.62607015e-34;     // J s, exact SI
inline constexpr double boltzmann = 1.380649e-23;    // J/K, exact SI
// h / k_B expressed in K per GHz.
inline constexpr double h_over_kb = planck / boltzmann * 1e9;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace constants

// Queries above this temperature are answered but tagged as outside the
// range where single-phonon processes dominate.
inline constexpr double single_phonon_validity_limit_k = 20.0;

struct EmitterParams {
    std::string name;
    double f_gs = 0.0;                // GHz
    double f_es = 0.0;                // GHz
    std::optional<double> lifetime;   // ns
    double gamma0 = 0.0;              // MHz, transform limit
    double alpha_gs = 0.0;            // GHz^-2 (reduced)
    double alpha_es = 0.0;            // GHz^-2 (reduced)
    double gamma_others = 0.0;        // MHz, may be negative
    std::optional<double> dw_fraction;
    // true when gamma_others was not measured for this emitter and 0 was assumed
    bool gamma_others_assumed = false;

    // Throws DomainError on the first violated invariant.
    void validate() const;
};

struct PhononRates {
    double gamma_up = 0.0;    // MHz, absorption
    double gamma_down = 0.0;  // MHz, emission
};

enum class Transition { c, d };

// Linewidth of one zero-phonon line with its decomposition.
struct Linewidth {
    double gamma0 = 0.0;
    double gamma_others = 0.0;
    double gs_term = 0.0;  // ground-state phonon contribution (absorption for C, emission for D)
    double es_term = 0.0;  // excited-state phonon absorption
    double total = 0.0;
    bool negative = false;              // total < 0, reported unclamped
    bool beyond_single_phonon = false;  // T above single_phonon_validity_limit_k

    double phonon() const { return gs_term + es_term; }
};

// Mean thermal phonon number 1/(exp(h f / k_B T) - 1).
inline double bose_occupation(double f_ghz, double temperature_k) {
    if (!(f_ghz > 0.0)) throw DomainError("bose_occupation: frequency must be > 0");
    if (!(temperature_k >= 0.0)) throw DomainError("bose_occupation: temperature must be >= 0");
    if (temperature_k == 0.0) return 0.0;
    const double x = constants::h_over_kb * f_ghz / temperature_k;
    if (x > 700.0) return 0.0;
    if (x < 1e-6) return 1.0 / x - 0.5;
    return 1.0 / std::expm1(x);
}

inline PhononRates phonon_rates(double f_split_ghz, double temperature_k, double alpha) {
    if (!(alpha >= 0.0)) throw DomainError("phonon_rates: coupling must be >= 0");
    const double n = bose_occupation(f_split_ghz, temperature_k);
    const double base_mhz = alpha * f_split_ghz * f_split_ghz * f_split_ghz * 1e3;
    return {base_mhz * n, base_mhz * (n + 1.0)};
}

inline void EmitterParams::validate() const {
    auto fail = [this](const std::string& what) {
        throw DomainError("emitter '" + name + "': " + what);
    };
    if (!(f_gs > 0.0)) fail("f_gs must be > 0");
    if (!(f_es > 0.0)) fail("f_es must be > 0");
    if (!(alpha_gs >= 0.0)) fail("alpha_gs must be >= 0");
    if (!(alpha_es >= 0.0)) fail("alpha_es must be >= 0");
    if (!(gamma0 > 0.0)) fail("gamma0 must be > 0");
    if (!std::isfinite(gamma_others)) fail("gamma_others must be finite");
    if (lifetime) {
        if (!(*lifetime > 0.0)) fail("lifetime must be > 0");
        const double expected = 1e3 / (constants::two_pi * *lifetime);
        if (std::abs(gamma0 - expected) > 0.01 * expected)
            fail("gamma0 " + std::to_string(gamma0) + " MHz inconsistent with lifetime " +
                 std::to_string(*lifetime) + " ns (expects " + std::to_string(expected) + " MHz)");
    }
    if (dw_fraction && !(*dw_fraction >= 0.0 && *dw_fraction <= 1.0)) fail("dw_fraction must lie in [0, 1]");
}

namespace detail {
inline Linewidth assemble(const EmitterParams& p, double temperature_k, double gs_term) {
    Linewidth w;
    w.gamma0 = p.gamma0;
    w.gamma_others = p.gamma_others;
    w.gs_term = gs_term;
    w.es_term = phonon_rates(p.f_es, temperature_k, p.alpha_es).gamma_up;
    w.total = w.gamma0 + w.gamma_others + w.gs_term + w.es_term;
    w.negative = w.total < 0.0;
    w.beyond_single_phonon = temperature_k > single_phonon_validity_limit_k;
    return w;
}
}  // namespace detail

// C-transition: phonon absorption in both ground and excited state.
inline Linewidth linewidth_c(const EmitterParams& p, double temperature_k) {
    return detail::assemble(p, temperature_k, phonon_rates(p.f_gs, temperature_k, p.alpha_gs).gamma_up);
}

// D-transition: ground-state phonon emission, excited-state absorption.
inline Linewidth linewidth_d(const EmitterParams& p, double temperature_k) {
    return detail::assemble(p, temperature_k, phonon_rates(p.f_gs, temperature_k, p.alpha_gs).gamma_down);
}

inline Linewidth linewidth(const EmitterParams& p, double temperature_k, Transition t) {
    return t == Transition::c ? linewidth_c(p, temperature_k) : linewidth_d(p, temperature_k);
}

// Gamma_D - Gamma_C in MHz; independent of temperature.
inline double linewidth_difference(const EmitterParams& p) {
    return p.alpha_gs * p.f_gs * p.f_gs * p.f_gs * 1e3;
}

inline double transform_limit(double lifetime_ns) {
    if (!(lifetime_ns > 0.0)) throw DomainError("transform_limit: lifetime must be > 0");
    return 1e3 / (constants::two_pi * lifetime_ns);
}

inline double lifetime_from_linewidth(double fwhm_mhz) {
    if (!(fwhm_mhz > 0.0)) throw DomainError("lifetime_from_linewidth: linewidth must be > 0");
    return 1e3 / (constants::two_pi * fwhm_mhz);
}

struct Threshold {
    enum class Status {
        found,           // temperature holds the crossing
        unbounded,       // the C linewidth never reaches ratio * gamma0
        exceeded_at_zero // already above ratio * gamma0 at 0 K; temperature = 0
    };
    Status status = Status::unbounded;
    double temperature = 0.0;

    bool bounded() const { return status != Status::unbounded; }
};

// Temperature at which the C-line reaches ratio * gamma0, to 1 mK.
inline Threshold temperature_threshold(const EmitterParams& p, double ratio = 1.2) {
    if (!(ratio > 1.0)) throw DomainError("temperature_threshold: ratio must be > 1");
    p.validate();
    const double target = ratio * p.gamma0;
    auto excess = [&](double t) { return linewidth_c(p, t).total - target; };

    if (excess(0.0) >= 0.0) return {Threshold::Status::exceeded_at_zero, 0.0};
    if (p.alpha_gs == 0.0 && p.alpha_es == 0.0) return {Threshold::Status::unbounded, 0.0};

    double lo = 0.1;
    double hi = 400.0;
    if (excess(lo) >= 0.0) {
        hi = lo;
        lo = 0.0;
    } else {
        // Occupation grows without bound, so a nonzero coupling always crosses
        // eventually; the cap only guards against absurdly weak couplings.
        while (excess(hi) < 0.0) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e12) return {Threshold::Status::unbounded, 0.0};
        }
    }
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    return {Threshold::Status::found, 0.5 * (lo + hi)};
}

// Lorentzian line with peak value offset + amplitude at detuning == center.
inline double lorentzian(double detuning, double center, double fwhm, double amplitude, double offset) {
    if (!(fwhm > 0.0)) throw DomainError("lorentzian: fwhm must be > 0");
    const double hw = 0.5 * fwhm;
    const double d = detuning - center;
    return offset + amplitude * hw * hw / (d * d + hw * hw);
}

}  // namespace g4v
