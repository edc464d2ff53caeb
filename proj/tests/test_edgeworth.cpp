#include <gtest/gtest.h>

#include <cmath>

#include "condfit/edgeworth.hpp"
#include "condfit/errors.hpp"
#include "condfit/experiments.hpp"
#include "condfit/mcstats.hpp"
#include "condfit/quadrature.hpp"
#include "condfit/special.hpp"

using namespace condfit;

TEST(Edgeworth, ExponentialCoefficient) {
    for (double theta : {0.5, 1.0, 3.0}) {
        const auto ms = moment_structure(Family::Exponential, {theta});
        const auto psi = psi11_coefficients(ms);
        EXPECT_NEAR(psi.a(0), -theta, 1e-12 * theta);
        // the general path reduces exactly to kappa_111 D^2 / 2 when k = 1
        EXPECT_EQ(psi.a(0), ms.kappa3(0, 0, 0) * ms.precision(0, 0) * ms.precision(0, 0) / 2.0);
        EXPECT_EQ(psi(Vector::Zero(1)), 0.0);
    }
    // rescaling theta -> c theta maps a1 -> -c theta
    const double c = 2.5;
    EXPECT_NEAR(psi11_coefficients(moment_structure(Family::Exponential, {c * 1.2})).a(0), -c * 1.2, 1e-12);
}

TEST(Edgeworth, GammaGeneralPathMatchesClosedForm) {
    for (const NaturalParam& th : {NaturalParam{1.0, 1.0}, NaturalParam{0.3, 2.0}, NaturalParam{5.0, 0.7}}) {
        const auto a = psi11_coefficients(moment_structure(Family::Gamma, th)).a;
        const auto closed = gamma_psi11_closed_form(th);
        EXPECT_NEAR(a(0), closed(0), 1e-10 * std::abs(closed(0)));
        EXPECT_NEAR(a(1), closed(1), 1e-10 * std::abs(closed(1)));
    }
}

// A display of the shape coefficient with psi'' in place of psi' in the middle
// term, and a three-sum form with D_ii D_il in the two-equal-index sum, both
// disagree with the general contraction; this test documents the gap.
TEST(Edgeworth, AlternativeDisplaysDisagree) {
    const NaturalParam th{2.0, 1.0};
    const double a = th[0], b = th[1];
    const double t1 = special::trigamma(a), t2 = special::tetragamma(a), delta = a * t1 - 1;
    const double displayed = (a * a * t2 + 2 * b * t1 + 2) / (2 * delta * delta);
    const double general = psi11_coefficients(moment_structure(Family::Gamma, th)).a(0);
    EXPECT_GT(std::abs(displayed - general), 0.1);

    const auto ms = moment_structure(Family::Gamma, th);
    const Matrix& D = ms.precision;
    double alt = 0.0;
    const int l = 0;
    for (int i = 0; i < 2; ++i) alt += ms.kappa3(i, i, i) * D(i, i) * D(i, l) / 2;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (i != j) alt += ms.kappa3(i, i, j) * (2 * D(i, j) * D(i, l) + D(i, i) * D(i, l)) / 2;
    EXPECT_GT(std::abs(alt - general), 0.1);
}

// For J = T(X_1) the conditional expectation is exactly T_n / n = mu on the
// fiber, so R must vanish: this pins the coefficient formula.
TEST(Edgeworth, LinearFunctionalHasZeroCorrection) {
    for (Family f : {Family::Gamma, Family::VonMises}) {
        const NaturalParam th = f == Family::Gamma ? NaturalParam{1.7, 0.6} : NaturalParam{1.2, -0.4};
        const auto ms = moment_structure(f, th);
        const auto psi = psi11_coefficients(ms);
        for (int c = 0; c < 2; ++c) {
            ExpansionInput in;
            in.m = 1;
            in.value = ms.mean(c);
            in.gradient = ms.cov.col(c);
            in.hessian = Matrix(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) in.hessian(i, j) = ms.kappa3(c, i, j);
            EXPECT_NEAR(rao_blackwell_expansion(in, ms, psi, 30).R, 0.0, 1e-12) << family_name(f);
        }
    }
}

TEST(Edgeworth, ExpansionExamples) {
    const auto ms = moment_structure(Family::Exponential, {1.0});
    const auto psi = psi11_coefficients(ms);
    const auto in = exponential_indicator_input(1.0, 1.0);
    EXPECT_NEAR(in.gradient(0), 0.36787944117144233, 1e-15);
    const auto r = rao_blackwell_expansion(in, ms, psi, 10);
    EXPECT_NEAR(r.R, -0.5 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(r.A, in.value + r.R / 10, 1e-15);

    ExpansionInput constant{1, 0.3, Vector::Zero(1), Matrix::Zero(1, 1)};
    for (std::size_t n : {2, 10, 1000}) EXPECT_EQ(rao_blackwell_expansion(constant, ms, psi, n).A, 0.3);
    EXPECT_THROW(rao_blackwell_expansion(in, ms, psi, 1), DomainError);
}

TEST(Edgeworth, ExpansionTracksExactConditionalAtOrderNSquared) {
    const auto ms = moment_structure(Family::Exponential, {1.0});
    const auto psi = psi11_coefficients(ms);
    for (double x : {0.5, 1.0, 2.0}) {
        const auto in = exponential_indicator_input(1.0, x);
        const double ref = 100 * std::abs(exponential_indicator_conditional(1.0, x, 10) -
                                          rao_blackwell_expansion(in, ms, psi, 10).A);
        for (std::size_t n : {20, 40, 80}) {
            const double e = double(n * n) * std::abs(exponential_indicator_conditional(1.0, x, n) -
                                                      rao_blackwell_expansion(in, ms, psi, n).A);
            EXPECT_LE(e, 2 * ref);
            EXPECT_GE(e, 0.5 * ref);
        }
    }
}

TEST(Edgeworth, GammaShapeEstimatorIdentity) {
    CounterRng rng(15);
    for (int i = 0; i < 5; ++i) {
        const NaturalParam th{0.2 + 5 * rng.uniform(), 0.1 + 3 * rng.uniform()};
        const std::size_t n = 2 + static_cast<std::size_t>(200 * rng.uniform());
        const double expected = th[0] - psi11_coefficients(moment_structure(Family::Gamma, th))(Vector::Unit(2, 0)) / n;
        EXPECT_NEAR(gamma_shape_rb_estimate(th, n), expected, 1e-12);
    }
    const double a11 = psi11_coefficients(moment_structure(Family::Gamma, {1.0, 1.0})).a(0);
    EXPECT_NEAR(gamma_shape_rb_estimate({1.0, 1.0}, 20), 1.0 + a11 / 20, 1e-15);
    EXPECT_NEAR(gamma_shape_rb_estimate({1.0, 1.0}, 10000000), 1.0, 1e-6);
}

TEST(Edgeworth, FiniteDifferenceFallbackMatchesClosedForm) {
    auto expectation = [](const NaturalParam& th) { return -std::expm1(-th[0] * 1.3); };
    const auto fd = finite_difference_input(expectation, {0.8}, 1);
    const auto exact = exponential_indicator_input(0.8, 1.3);
    EXPECT_NEAR(fd.gradient(0), exact.gradient(0), 1e-8);
    EXPECT_NEAR(fd.hessian(0, 0), exact.hessian(0, 0), 1e-6);
    // Gamma: E X_1^2 = a (a + 1) / b^2
    auto e2 = [](const NaturalParam& th) { return th[0] * (th[0] + 1) / (th[1] * th[1]); };
    const auto g = finite_difference_input(e2, {2.0, 1.5}, 1);
    EXPECT_NEAR(g.gradient(1), -2 * 2.0 * 3.0 / (1.5 * 1.5 * 1.5), 1e-7);
    EXPECT_NEAR(g.hessian(0, 1), -2 * 5.0 / (1.5 * 1.5 * 1.5), 1e-6);
    EXPECT_NEAR(g.hessian(0, 1), g.hessian(1, 0), 1e-15);
}

// grad E = Cov(J, T_m) and hess E = Cov(J, B B') with B = T_m - m mu, by Monte Carlo.
TEST(Edgeworth, DerivativeIdentitiesByMonteCarlo) {
    const NaturalParam th{2.0, 1.0};
    const auto ms = moment_structure(Family::Gamma, th);
    const double a = th[0], b = th[1];
    struct Functional {
        std::function<double(double)> J;
        ExpansionInput in;
    };
    auto fd = [&](std::function<double(const NaturalParam&)> e) { return finite_difference_input(e, th, 1); };
    std::vector<Functional> cases{
        {[](double x) { return x * x; }, fd([](const NaturalParam& t) { return t[0] * (t[0] + 1) / (t[1] * t[1]); })},
        {[](double x) { return x <= 1.5 ? 1.0 : 0.0; }, fd([](const NaturalParam& t) { return cdf(Family::Gamma, t, 1.5); })},
        {[](double x) { return std::sqrt(x); },
         fd([](const NaturalParam& t) { return std::exp(special::log_gamma(t[0] + 0.5) - special::log_gamma(t[0])) / std::sqrt(t[1]); })},
    };
    (void)a;
    (void)b;
    const std::size_t N = 400000;
    CounterRng rng(16);
    const auto x = sample(Family::Gamma, th, N, rng);
    for (const auto& c : cases) {
        std::vector<double> g0(N), g1(N), h00(N), h01(N), h11(N);
        double Jbar = 0;
        for (double v : x) Jbar += c.J(v) / N;
        for (std::size_t i = 0; i < N; ++i) {
            const double B0 = std::log(x[i]) - ms.mean(0), B1 = -x[i] - ms.mean(1);
            const double Jc = c.J(x[i]) - Jbar;
            g0[i] = Jc * B0;
            g1[i] = Jc * B1;
            h00[i] = Jc * B0 * B0;
            h01[i] = Jc * B0 * B1;
            h11[i] = Jc * B1 * B1;
        }
        auto check = [&](const std::vector<double>& v, double target) {
            const double se = std::sqrt(mc::variance(v) / N);
            EXPECT_LT(std::abs(mc::mean(v) - target), 4 * se) << mc::mean(v) << " vs " << target;
        };
        check(g0, c.in.gradient(0));
        check(g1, c.in.gradient(1));
        check(h00, c.in.hessian(0, 0));
        check(h01, c.in.hessian(0, 1));
        check(h11, c.in.hessian(1, 1));
    }
}

TEST(Edgeworth, DensityBasics) {
    const auto ms = moment_structure(Family::Exponential, {1.0});
    EXPECT_NEAR(edgeworth_density_1d(ms, 10, 0.0), 1.0 / std::sqrt(2 * M_PI), 1e-15);
    auto r = quad::adaptive_simpson([&](double u) { return edgeworth_density_1d(ms, 10, u); }, -12, 12, 1e-12, 16);
    EXPECT_NEAR(r.value, 1.0, 1e-6);
    auto e = quad::adaptive_simpson([&](double u) { return exponential_standardized_density(1.0, 10, u); }, -12,
                                    std::sqrt(10.0), 1e-12, 16);
    EXPECT_NEAR(e.value, 1.0, 1e-8);
}

TEST(Edgeworth, DensityErrorScalesLikeOneOverN) {
    double prev = experiments::exponential_edgeworth_error(1.0, 10);
    for (std::size_t n : {20, 40, 80}) {
        const double e = experiments::exponential_edgeworth_error(1.0, n);
        EXPECT_NEAR(e / prev, 0.5, 0.125) << "n=" << n;
        prev = e;
    }
}
