#pragma once

// Special functions used by the exponential-family machinery. All take
// positive real arguments unless noted; out-of-domain inputs throw
// condfit::DomainError.

namespace condfit::special {

double log_gamma(double x);

// Polygamma family psi^(0..2).
double digamma(double x);
double trigamma(double x);
double tetragamma(double x);

// Modified Bessel functions of the first kind. The *_scaled variants
// return exp(-x) I_nu(x) and are finite for every x >= 0.
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);
double bessel_i0(double x);
double bessel_i1(double x);

// log I0(x), accurate for large x where I0 overflows.
double log_bessel_i0(double x);

// I1(x)/I0(x), the mean resultant length of a von Mises(kappa = x) law.
double bessel_ratio(double x);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

}  // namespace condfit::special
