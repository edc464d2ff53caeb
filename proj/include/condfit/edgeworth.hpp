#pragma once

#include <cstddef>
#include <functional>

#include "condfit/expfam.hpp"

namespace condfit {

// Linear part of the first Edgeworth polynomial: psi11(u) = -sum_l a_l u_l.
struct Psi11 {
    Vector a;

    double operator()(const Vector& u) const { return -a.dot(u); }
};

// a_l = sum_{i,j,k} kappa_ijk D_jk D_il / 2, assembled as the sums over equal,
// two-equal and distinct index triples.
Psi11 psi11_coefficients(const MomentStructure& ms);

// Closed forms for the Gamma family, used to cross-check the general path.
Vector gamma_psi11_closed_form(const NaturalParam& theta);

// Derivatives of theta -> E_theta J for a statistic J of m observations.
struct ExpansionInput {
    std::size_t m = 1;
    double value = 0.0;
    Vector gradient;
    Matrix hessian;
};

struct ExpansionResult {
    double A = 0.0;  // E_theta J + R / n
    double R = 0.0;
};

// R = -trace(hess E . V^{-1}) / 2 - psi11(grad E), A = E + R / n: the
// order 1/n approximation to E(J | T_n = n mu).
ExpansionResult rao_blackwell_expansion(const ExpansionInput& input, const MomentStructure& ms,
                                        const Psi11& psi, std::size_t n);

// Central finite differences of an arbitrary expectation functional, with
// step 1e-4 * max(|theta_j|, 1).
ExpansionInput finite_difference_input(const std::function<double(const NaturalParam&)>& expectation,
                                       const NaturalParam& theta, std::size_t m);

// J = 1(X_1 <= x) in the Exponential family, closed form.
ExpansionInput exponential_indicator_input(double theta, double x);

// E(1(X_1 <= x) | sum X = n / theta) for the Exponential family.
double exponential_indicator_conditional(double theta, double x, std::size_t n);

// theta1 - psi11(1, 0) / n with psi11 evaluated at theta_hat.
double gamma_shape_rb_estimate(const NaturalParam& theta_hat, std::size_t n);

// One-term Edgeworth density of U = (T_n - n mu) / sqrt(n), k = 1:
// phi(u; V) {1 + kappa3 (u^3 / V^3 - 3 u / V^2) / (6 sqrt n)}.
double edgeworth_density_1d(const MomentStructure& ms, std::size_t n, double u);

// Exact density of U for the Exponential family, via sum X ~ Gamma(n, theta).
double exponential_standardized_density(double theta, std::size_t n, double u);

}  // namespace condfit
