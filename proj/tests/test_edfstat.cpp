#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "condfit/edfstat.hpp"
#include "condfit/quadrature.hpp"

using namespace condfit;

namespace {

constexpr double kPi = std::numbers::pi;

PitVector random_pit(std::uint64_t seed, std::size_t n) {
    CounterRng rng(seed);
    std::vector<double> u(n);
    for (auto& v : u) v = rng.uniform();
    return make_pit(u);
}

// n * integral of (F_n(s) - s)^2 w(s) over (0, 1), integrated piecewise between order statistics.
double edf_integral(const PitVector& p, const std::function<double(double)>& w, double tol) {
    const std::size_t n = p.size();
    double total = 0.0;
    // Endpoints nudged inward so singular weights are never evaluated at 0 or 1.
    double lo = 1e-300;
    for (std::size_t i = 0; i <= n; ++i) {
        const double hi = i < n ? p.u[i] : 1.0 - 0x1.0p-53;
        const double Fn = static_cast<double>(i) / n;
        auto r = quad::adaptive_simpson([&](double s) { return (Fn - s) * (Fn - s) * w(s); }, lo, hi, tol);
        total += r.value;
        lo = hi;
    }
    return n * total;
}

}  // namespace

TEST(EdfStat, PitExamples) {
    const auto e = pit(std::vector<double>{std::log(2.0)}, Family::Exponential, {1.0});
    EXPECT_NEAR(e.u[0], 0.5, 1e-15);
    const auto v = pit(std::vector<double>{kPi}, Family::VonMises, {0.0, 0.0});
    EXPECT_NEAR(v.u[0], 0.5, 1e-12);
}

TEST(EdfStat, GammaPitMatchesDensityQuadrature) {
    CounterRng rng(8);
    const auto x = sample(Family::Gamma, {1.7, 0.8}, 15, rng);
    const auto th = mle(Family::Gamma, x);
    const auto p = pit(x, Family::Gamma, th);
    auto sorted = x;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        // substitution y = t^2 keeps the integrand smooth at 0
        auto r = quad::adaptive_simpson(
            [&](double t) { return t > 0 ? 2 * t * density(Family::Gamma, th, t * t) : 0.0; }, 0.0,
            std::sqrt(sorted[i]), 1e-12, 16);
        EXPECT_NEAR(p.u[i], r.value, 1e-8);
    }
}

TEST(EdfStat, CvmExamples) {
    EXPECT_NEAR(cvm(make_pit({0.5})).value, 1.0 / 12, 1e-15);
    EXPECT_NEAR(cvm(make_pit({0.25, 0.75})).value, 1.0 / 24, 1e-15);
    const auto p = random_pit(17, 20);
    EXPECT_NEAR(cvm(p).value, edf_integral(p, [](double) { return 1.0; }, 1e-14), 1e-10);
}

TEST(EdfStat, WatsonExamples) {
    EXPECT_NEAR(watson(make_pit({0.25, 0.75})).value, 1.0 / 24, 1e-15);
    EXPECT_NEAR(watson(make_pit({0.9})).value, 1.0 / 12, 1e-15);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto p = random_pit(100 + s, 30);
        double mean = 0;
        for (double u : p.u) mean += u / p.size();
        EXPECT_NEAR(watson(p).value, cvm(p).value - p.size() * (mean - 0.5) * (mean - 0.5), 1e-12);
        EXPECT_LE(watson(p).value, cvm(p).value);
    }
}

TEST(EdfStat, WatsonRotationInvariantForVonMises) {
    CounterRng rng(31);
    auto x = sample(Family::VonMises, {1.5, 0.7}, 40, rng);
    const double before = test_statistic(StatKind::Watson, Family::VonMises, x).stat.value;
    for (auto& v : x) v = std::fmod(v + 1.3, 2 * kPi);
    const double after = test_statistic(StatKind::Watson, Family::VonMises, x).stat.value;
    EXPECT_NEAR(before, after, 1e-8);
}

TEST(EdfStat, AndersonDarlingAndKs) {
    EXPECT_NEAR(anderson_darling(make_pit({0.5})).value, -1 - 2 * std::log(0.5), 1e-14);
    EXPECT_NEAR(kolmogorov_smirnov(make_pit({0.5})).value, 0.5, 1e-15);
    const auto p = random_pit(23, 50);
    const double quad = edf_integral(p, [](double s) { return 1.0 / (s * (1 - s)); }, 1e-13);
    EXPECT_NEAR(anderson_darling(p).value, quad, 1e-6);
}

TEST(EdfStat, PermutationInvariance) {
    CounterRng rng(4);
    auto x = sample(Family::Gamma, {2.0, 1.0}, 25, rng);
    std::vector<double> values;
    for (auto k : {StatKind::CramerVonMises, StatKind::Watson, StatKind::AndersonDarling, StatKind::KolmogorovSmirnov}) {
        values.push_back(test_statistic(k, Family::Gamma, x).stat.value);
    }
    std::reverse(x.begin(), x.end());
    std::rotate(x.begin(), x.begin() + 7, x.end());
    int i = 0;
    for (auto k : {StatKind::CramerVonMises, StatKind::Watson, StatKind::AndersonDarling, StatKind::KolmogorovSmirnov}) {
        EXPECT_NEAR(test_statistic(k, Family::Gamma, x).stat.value, values[i++], 1e-12);
    }
}

TEST(EdfStat, SpectralClosedFormMatchesDefiningIntegral) {
    const auto one = spectral_coefficients(make_pit({0.5}), 2);
    EXPECT_NEAR(one.U[0], 0.0, 1e-15);
    EXPECT_NEAR(one.U[1], -0.225079079039276, 1e-12);
    const auto p = random_pit(5, 7);
    const auto sc = spectral_coefficients(p, 6);
    const double n = p.size();
    for (std::size_t j = 1; j <= 6; ++j) {
        double total = 0.0, lo = 0.0;
        for (std::size_t i = 0; i <= p.size(); ++i) {
            const double hi = i < p.size() ? p.u[i] : 1.0;
            const double Fn = i / n;
            total += quad::adaptive_simpson(
                         [&](double s) { return std::sqrt(n) * (Fn - s) * std::sqrt(2.0) * std::sin(kPi * j * s); }, lo,
                         hi, 1e-14)
                         .value;
            lo = hi;
        }
        EXPECT_NEAR(sc.U[j - 1], total, 1e-10) << "j=" << j;
    }
}

TEST(EdfStat, ParsevalPartialSums) {
    const auto p = random_pit(9, 60);
    const auto sc = spectral_coefficients(p, 2000);
    const double w = cvm(p).value;
    double partial = 0.0, prev = 0.0;
    for (double U : sc.U) {
        partial += U * U;
        EXPECT_GE(partial, prev);
        prev = partial;
    }
    EXPECT_LE(partial, w + 1e-12);
    EXPECT_GT(partial, 0.99 * w);
    EXPECT_NEAR(sc.partial_sum_of_squares(), partial, 1e-12);
}

TEST(EdfStat, PitClampAndTies) {
    const auto p = make_pit({0.0, 1.0, 0.3, 0.3});
    EXPECT_EQ(p.u.front(), kPitClamp);
    EXPECT_EQ(p.u.back(), 1.0 - kPitClamp);
    EXPECT_EQ(p.u[1], 0.3);
    EXPECT_EQ(p.u[2], 0.3);
    EXPECT_EQ(parse_stat("watson"), StatKind::Watson);
}
