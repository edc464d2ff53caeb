#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "condfit/edfstat.hpp"
#include "condfit/expfam.hpp"

namespace condfit {

// xi(s, theta) = d F(x; theta) / d theta at x = F^{-1}(s; theta), computed as
// E[(T(X) - mu) 1(X <= x)].
Vector score_shift(Family family, const NaturalParam& theta, double s);

// rho(s, t) = min(s, t) - s t - xi(s)' V^{-1} xi(t); the bridge kernel when
// `estimated` is false.
double limit_covariance(Family family, const NaturalParam& theta, double s, double t,
                        bool estimated = true);

// Covariance kernel of the limit process on the midpoint grid s_i = (i + 1/2) / m.
// For Watson the process is centred, so the kernel is C rho C with C the
// projection orthogonal to constants.
struct KernelGrid {
    Family family = Family::Exponential;
    NaturalParam theta;
    StatKind kind = StatKind::CramerVonMises;
    bool estimated = true;
    std::vector<double> s;
    Matrix values;  // zeta(s_i, s_j)

    std::size_t size() const { return s.size(); }
    double trace_integral() const;  // midpoint rule for the integral of zeta(s, s)
};

KernelGrid make_kernel_grid(Family family, const NaturalParam& theta, StatKind kind, std::size_t m = 512,
                            bool estimated = true, unsigned workers = 1);

// Kernel of an explicit function on the grid (used for the plain bridge).
KernelGrid bridge_kernel_grid(StatKind kind, std::size_t m = 512);

struct Spectrum {
    Vector eigenvalues;  // descending, clipped at 0
    double tail_mass = 0.0;
    double trace = 0.0;

    std::size_t truncation() const { return static_cast<std::size_t>(eigenvalues.size()); }
    // The K eigenvalues followed by the tail mass as one extra weight.
    std::vector<double> weights() const;
};

Spectrum nystrom_spectrum(const KernelGrid& kernel, std::size_t K);

struct ChisqMixtureCdf {
    double value = 0.0;
    double std_error = 0.0;
    std::string method;  // "imhof" or "monte-carlo"
};

// P(sum lambda_j Z_j^2 <= x).
ChisqMixtureCdf weighted_chisq_cdf(std::span<const double> lambda, double x);
ChisqMixtureCdf weighted_chisq_cdf(const Spectrum& spectrum, double x);

double weighted_chisq_quantile(std::span<const double> lambda, double p);

}  // namespace condfit
