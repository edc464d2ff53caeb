#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "condfit/asymptotic.hpp"
#include "condfit/bootstrap.hpp"
#include "condfit/errors.hpp"

using namespace condfit;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Asymptotic, ScoreShiftExponential) {
    // dF/dtheta for F = 1 - exp(-theta x) at theta = 1, x = 1 is x e^{-theta x}
    const auto xi = score_shift(Family::Exponential, {1.0}, 1.0 - std::exp(-1.0));
    EXPECT_NEAR(xi(0), std::exp(-1.0), 1e-10);
    EXPECT_LT(std::abs(score_shift(Family::Exponential, {1.0}, 1e-9)(0)), 1e-8);
    EXPECT_LT(std::abs(score_shift(Family::Exponential, {1.0}, 1 - 1e-9)(0)), 1e-7);
}

TEST(Asymptotic, ScoreShiftMatchesFiniteDifferences) {
    const double h = 1e-5;
    for (const auto& [f, th] : std::vector<std::pair<Family, NaturalParam>>{
             {Family::Exponential, {2.0}}, {Family::Gamma, {2.0, 1.0}}, {Family::Gamma, {0.4, 1.5}},
             {Family::VonMises, {1.0, 0.5}}}) {
        for (int g = 1; g <= 10; ++g) {
            const double s = (g - 0.5) / 10.0;
            const double x = quantile(f, th, s);
            const auto xi = score_shift(f, th, s);
            for (int j = 0; j < th.size(); ++j) {
                const Vector e = Vector::Unit(th.size(), j) * h;
                const double fd = (cdf(f, NaturalParam(th.value + e), x) - cdf(f, NaturalParam(th.value - e), x)) / (2 * h);
                EXPECT_NEAR(xi(j), fd, 1e-6) << family_name(f) << " s=" << s << " j=" << j;
            }
        }
    }
}

TEST(Asymptotic, LimitCovarianceProperties) {
    const NaturalParam th{2.0, 1.0};
    for (double s : {0.1, 0.35, 0.8}) {
        for (double t : {0.2, 0.5, 0.95}) {
            EXPECT_NEAR(limit_covariance(Family::Gamma, th, s, t, false), std::min(s, t) - s * t, 1e-15);
            EXPECT_NEAR(limit_covariance(Family::Gamma, th, s, t), limit_covariance(Family::Gamma, th, t, s), 1e-12);
        }
        EXPECT_LE(limit_covariance(Family::Gamma, th, s, s), s * (1 - s));
    }
    EXPECT_THROW(limit_covariance(Family::Gamma, th, 0.0, 0.5), DomainError);
}

TEST(Asymptotic, KernelGridInvariants) {
    const auto g = make_kernel_grid(Family::VonMises, {1.0, 0.5}, StatKind::CramerVonMises, 64);
    EXPECT_LT((g.values - g.values.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        EXPECT_LE(g.values(ii, ii), g.s[i] * (1 - g.s[i]) + 1e-15);
    }
    EXPECT_THROW(make_kernel_grid(Family::Gamma, {2.0, 1.0}, StatKind::AndersonDarling, 64), DomainError);
}

TEST(Asymptotic, BrownianBridgeSpectrum) {
    const auto sp = nystrom_spectrum(bridge_kernel_grid(StatKind::CramerVonMises, 512), 100);
    for (int j = 1; j <= 5; ++j) {
        const double exact = 1.0 / (kPi * kPi * j * j);
        EXPECT_NEAR(sp.eigenvalues(j - 1), exact, 0.01 * exact);
    }
    const auto w = sp.weights();
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), sp.trace, 0.005 * sp.trace);
    EXPECT_NEAR(sp.trace, bridge_kernel_grid(StatKind::CramerVonMises, 512).trace_integral(), 1e-12);
    EXPECT_NEAR(sp.trace, 1.0 / 6.0, 1e-5);
    EXPECT_THROW(nystrom_spectrum(bridge_kernel_grid(StatKind::CramerVonMises, 100), 30), DomainError);
}

// Mean-centred bridge: eigenvalues 1/(4 pi^2 k^2), each twice; reference by a
// brute-force eigensolve at m = 2048.
TEST(Asymptotic, WatsonSpectrum) {
    const auto sp = nystrom_spectrum(bridge_kernel_grid(StatKind::Watson, 512), 100);
    const auto fine = nystrom_spectrum(bridge_kernel_grid(StatKind::Watson, 2048), 10);
    for (int j = 1; j <= 10; ++j) {
        const int k = (j + 1) / 2;
        const double exact = 1.0 / (4 * kPi * kPi * k * k);
        EXPECT_NEAR(sp.eigenvalues(j - 1), exact, 0.01 * exact);
        EXPECT_NEAR(fine.eigenvalues(j - 1), exact, 0.01 * exact);
    }
}

TEST(Asymptotic, SpectrumStableUnderGridDoubling) {
    const NaturalParam th{2.0, 1.0};
    const auto a = nystrom_spectrum(make_kernel_grid(Family::Gamma, th, StatKind::CramerVonMises, 256), 10);
    const auto b = nystrom_spectrum(make_kernel_grid(Family::Gamma, th, StatKind::CramerVonMises, 512), 10);
    for (int j = 0; j < 10; ++j) EXPECT_NEAR(a.eigenvalues(j), b.eigenvalues(j), 0.002 * b.eigenvalues(j)) << j;
    EXPECT_LE(b.eigenvalues.sum(), b.trace + 1e-12);
}

TEST(Asymptotic, WeightedChisqKnownCases) {
    const std::vector<double> one{1.0}, two{1.0, 1.0};
    EXPECT_NEAR(weighted_chisq_cdf(one, 3.841459).value, 0.9500000053, 1e-6);
    EXPECT_NEAR(weighted_chisq_cdf(two, 2.0).value, 1 - std::exp(-1.0), 1e-6);
    for (double x : {0.1, 0.7, 2.5, 9.0}) EXPECT_NEAR(weighted_chisq_cdf(two, x).value, -std::expm1(-x / 2), 1e-6);
    EXPECT_EQ(weighted_chisq_cdf(one, 0.0).value, 0.0);
    EXPECT_EQ(weighted_chisq_cdf(one, -1.0).value, 0.0);
    EXPECT_EQ(weighted_chisq_cdf(one, 3.0).method, "imhof");
    EXPECT_THROW(weighted_chisq_cdf(std::vector<double>{0.0}, 1.0), DomainError);
}

TEST(Asymptotic, WeightedChisqMonotoneWithLimits) {
    const auto sp = nystrom_spectrum(bridge_kernel_grid(StatKind::CramerVonMises, 512), 100);
    double prev = 0.0;
    for (int i = 1; i <= 60; ++i) {
        const double c = weighted_chisq_cdf(sp, 0.03 * i).value;
        EXPECT_GE(c, prev - 1e-9);
        prev = c;
    }
    EXPECT_GT(weighted_chisq_cdf(sp, 5.0).value, 1 - 1e-6);
}

// Classical asymptotic points, confirmed by tests/oracles/limit_quantiles.py
// (10^7 draws): CvM 0.95 point 0.4610, Watson 0.1869.
TEST(Asymptotic, ClassicalQuantiles) {
    const auto cvm = nystrom_spectrum(bridge_kernel_grid(StatKind::CramerVonMises, 1024), 200);
    EXPECT_NEAR(weighted_chisq_cdf(cvm, 0.461).value, 0.95, 2e-3);
    EXPECT_NEAR(weighted_chisq_quantile(cvm.weights(), 0.95), 0.461, 2e-3);
    const auto wat = nystrom_spectrum(bridge_kernel_grid(StatKind::Watson, 1024), 200);
    EXPECT_NEAR(weighted_chisq_quantile(wat.weights(), 0.95), 0.187, 2e-3);
}

// H_infinity against a large-n bootstrap null distribution.
TEST(Asymptotic, LimitLawMatchesLargeSampleNull) {
    const NaturalParam th{2.0, 1.0};
    const auto sp = nystrom_spectrum(make_kernel_grid(Family::Gamma, th, StatKind::CramerVonMises, 512), 100);
    const auto H = null_cdf(Family::Gamma, th, 500, StatKind::CramerVonMises, {5000, 2718, 1});
    double sup = 0.0;
    const auto& v = H.cdf.sorted();
    for (std::size_t i = 0; i < v.size(); i += 10) {
        const double F = weighted_chisq_cdf(sp, v[i]).value;
        sup = std::max({sup, std::abs(F - H(v[i])), std::abs(F - static_cast<double>(i) / v.size())});
    }
    EXPECT_LE(sup, 0.015);
}
