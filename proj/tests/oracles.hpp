#pragma once

// Reference curves evaluated independently of the library, shared by the
// unit and acceptance suites.

#include <cmath>

namespace oracle {

// Mean of exp(-|t|/tc) over [lo, hi].
inline double mean_exp_abs(double lo, double hi, double tc) {
    auto prim = [tc](double t) {  // antiderivative, odd-extended through 0
        return t >= 0 ? tc * (1 - std::exp(-t / tc)) : -tc * (1 - std::exp(t / tc));
    };
    return (prim(hi) - prim(lo)) / (hi - lo);
}

// Bin-averaged g2 of a single emitter mixed with Poissonian background:
// 1 - rho^2 exp(-|tau|/tc).
inline double mixed_g2_bin(double tau, double bin_width, double rho, double tc) {
    return 1.0 - rho * rho * mean_exp_abs(tau - 0.5 * bin_width, tau + 0.5 * bin_width, tc);
}

inline double lorentzian(double x, double center, double fwhm, double amplitude) {
    const double hw = 0.5 * fwhm;
    return amplitude * hw * hw / ((x - center) * (x - center) + hw * hw);
}

// Expected counts in bin [a, b) for a photon-fraction mixture of exponentials.
inline double decay_bin(double a, double b, double total, double tau_slow, double frac_fast = 0.0,
                        double tau_fast = 1.0) {
    auto p = [](double a, double b, double tau) { return std::exp(-a / tau) - std::exp(-b / tau); };
    return total * ((1 - frac_fast) * p(a, b, tau_slow) + frac_fast * p(a, b, tau_fast));
}

}  // namespace oracle
