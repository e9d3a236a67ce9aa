#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "g4v/fitting.hpp"

using namespace g4v;

namespace {

template <class M>
void expect_gradient_matches_fd(const M& m, double x, const ParamVector<M::n_params>& p) {
    const auto g = m.gradient(x, p);
    for (int k = 0; k < M::n_params; ++k) {
        const double h = 1e-6 * (p[k] != 0.0 ? std::abs(p[k]) : 1e-3);
        auto up = p, dn = p;
        up[k] += h;
        dn[k] -= h;
        const double fd = (m.value(x, up) - m.value(x, dn)) / (2 * h);
        // central differences lose ~eps*|f|/h to rounding
        const double rounding = 1e-12 * std::max(std::abs(m.value(x, p)), 1.0) / h;
        const double scale = std::max(std::abs(fd), std::abs(g[k]));
        EXPECT_NEAR(g[k], fd, 1e-4 * scale + rounding) << "param " << k << " at x=" << x;
    }
}

}  // namespace

TEST(Gradient, Lorentzian) {
    LorentzianModel m;
    LorentzianModel::Params p;
    p << 3.0, 38.8, 1000.0, 10.0;
    for (double x : {-200.0, -30.0, -19.4, -1.0, 3.0, 7.5, 40.0, 180.0}) expect_gradient_matches_fd(m, x, p);
}

TEST(Gradient, Exp1) {
    Exp1Model m{1.5};
    Exp1Model::Params p;
    p << 5000.0, 4.4, 3.0;
    for (double t : {1.5, 2.0, 5.0, 12.0, 30.0}) expect_gradient_matches_fd(m, t, p);
}

TEST(Gradient, Exp2) {
    Exp2Model m{0.0};
    Exp2Model::Params p;
    p << 800.0, 0.5, 200.0, 5.5, 1.0;
    for (double t : {0.05, 0.3, 1.0, 4.0, 20.0}) expect_gradient_matches_fd(m, t, p);
}

TEST(Gradient, TemperatureSeries) {
    const auto pbv = EmitterRegistry{}.at("PbV");
    TemperatureSeriesModel<2> m{pbv};
    TemperatureSeriesModel<2>::Params p;
    p << 2.7, 7.51e-9;
    for (double t : {4.0, 8.0, 16.2, 20.0}) expect_gradient_matches_fd(m, t, p);
    TemperatureSeriesModel<1> m1{pbv};
    TemperatureSeriesModel<1>::Params p1;
    p1 << -1.0;
    expect_gradient_matches_fd(m1, 10.0, p1);
}

TEST(LevenbergMarquardt, RecoversNoiselessLorentzianFromPoorStart) {
    LorentzianModel m;
    LorentzianModel::Params truth;
    truth << 12.0, 38.8, 1000.0, 10.0;
    std::vector<double> x, y;
    for (double d = -200; d <= 200; d += 4) {
        x.push_back(d);
        y.push_back(m.value(d, truth));
    }
    std::vector<double> w(x.size(), 1.0);
    LorentzianModel::Params p0;
    p0 << 0.0, 80.0, 500.0, 0.0;
    const auto r = levenberg_marquardt(m, x, y, w, p0);
    EXPECT_TRUE(r.converged) << r.stop_reason;
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(r.params[k], truth[k], 1e-6 * std::abs(truth[k]));
}

TEST(LevenbergMarquardt, MinimumIsStableAgainstFiveSigmaPerturbations) {
    LorentzianModel m;
    LorentzianModel::Params truth;
    truth << 0.0, 38.8, 400.0, 20.0;
    std::mt19937_64 rng(7);
    std::vector<double> x, y;
    for (double d = -200; d <= 200; d += 4) {
        x.push_back(d);
        y.push_back(std::poisson_distribution<long long>(m.value(d, truth))(rng));
    }
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w[i] = 1.0 / std::max(y[i], 1.0);
    const auto r = levenberg_marquardt(m, x, y, w, truth);
    ASSERT_TRUE(r.converged);
    ASSERT_TRUE(r.covariance);
    const double c0 = weighted_cost(m, x, y, w, r.params);
    for (int k = 0; k < 4; ++k) {
        const double s = std::sqrt((*r.covariance)(k, k));
        for (double sign : {-1.0, 1.0}) {
            auto p = r.params;
            p[k] += sign * 5 * s;
            EXPECT_GT(weighted_cost(m, x, y, w, p), c0) << "param " << k;
        }
    }
}

TEST(LevenbergMarquardt, IterationLimitReportsNotConverged) {
    Exp1Model m{0.0};
    Exp1Model::Params truth;
    truth << 1000.0, 4.4, 5.0;
    std::vector<double> t, y;
    for (int i = 0; i < 200; ++i) {
        t.push_back(0.1 * i + 0.05);
        y.push_back(m.value(t.back(), truth));
    }
    std::vector<double> w(t.size(), 1.0);
    Exp1Model::Params p0;
    p0 << 10.0, 40.0, 0.0;
    LmOptions opt;
    opt.max_iterations = 1;
    const auto r = levenberg_marquardt(m, t, y, w, p0, opt);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.stop_reason, "iteration limit");
}

TEST(LevenbergMarquardt, RejectsInadmissibleSteps) {
    Exp1Model m{0.0};
    Exp1Model::Params truth;
    truth << 1000.0, 0.3, 0.0;
    std::vector<double> t, y;
    for (int i = 0; i < 100; ++i) {
        t.push_back(0.05 * i);
        y.push_back(m.value(t.back(), truth));
    }
    std::vector<double> w(t.size(), 1.0);
    Exp1Model::Params p0;
    p0 << 500.0, 3.0, 0.0;
    const auto r = levenberg_marquardt(m, t, y, w, p0);
    EXPECT_GT(r.params[1], 0.0);
    EXPECT_NEAR(r.params[1], 0.3, 1e-6);
}
