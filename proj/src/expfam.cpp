#include "condfit/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "condfit/errors.hpp"
#include "condfit/quadrature.hpp"
#include "condfit/special.hpp"

namespace condfit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxIterations = 100;

// Newton iteration kept inside a sign-change bracket [lo, hi]; falls back
// to bisection whenever the Newton step leaves the bracket. `f` must be
// monotone on the bracket with f(lo) and f(hi) of opposite sign.
template <class F, class DF>
double bracketed_newton(F f, DF df, double lo, double hi, double x, double ftol, const char* what) {
    const double flo = f(lo);
    const bool increasing = flo < 0.0;
    for (int it = 0; it < kMaxIterations; ++it) {
        const double fx = f(x);
        if (std::abs(fx) <= ftol) {
            return x;
        }
        if ((fx < 0.0) == increasing) {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo <= 4e-16 * std::max(std::abs(x), 1e-300)) {
            return x;
        }
        const double d = df(x);
        double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : lo - 1.0;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        x = next;
    }
    throw ConvergenceError(std::string(what) + ": no convergence after 100 iterations");
}

double neumaier_sum(std::span<const double> xs) {
    double sum = 0.0;
    double c = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    return sum + c;
}

double vm_concentration(const NaturalParam& theta) { return std::hypot(theta[0], theta[1]); }

double vm_direction(const NaturalParam& theta) {
    double m = std::atan2(theta[1], theta[0]);
    return m < 0.0 ? m + kTwoPi : m;
}

double vm_integral(const NaturalParam& theta, double a, double b, double tol) {
    const double kappa = vm_concentration(theta);
    if (kappa < 1e-12) {
        return (b - a) / kTwoPi;
    }
    const double m = vm_direction(theta);
    const double norm = 1.0 / (kTwoPi * special::bessel_i0_scaled(kappa));
    auto f = [&](double y) { return norm * std::exp(kappa * (std::cos(y - m) - 1.0)); };
    const double width = std::min(0.5, 1.0 / std::sqrt(kappa));
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
    return quad::adaptive_simpson(f, a, b, tol, panels).value;
}

double gamma_shape(const NaturalParam& theta) { return theta[0]; }
double gamma_rate(const NaturalParam& theta) { return theta[1]; }

}  // namespace

std::string_view family_name(Family family) {
    switch (family) {
        case Family::Exponential: return "exponential";
        case Family::Gamma: return "gamma";
        case Family::VonMises: return "vonmises";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    if (name == "exponential" || name == "exp") return Family::Exponential;
    if (name == "gamma") return Family::Gamma;
    if (name == "vonmises" || name == "von-mises" || name == "vm") return Family::VonMises;
    throw ParseError("unknown family '" + std::string(name) + "'");
}

int dimension(Family family) { return family == Family::Exponential ? 1 : 2; }

bool in_parameter_space(Family family, const NaturalParam& theta) {
    if (theta.size() != dimension(family) || !theta.value.allFinite()) {
        return false;
    }
    switch (family) {
        case Family::Exponential: return theta[0] > 0.0;
        case Family::Gamma: return theta[0] > 0.0 && theta[1] > 0.0;
        case Family::VonMises: return true;
    }
    return false;
}

void require_parameter(Family family, const NaturalParam& theta) {
    if (!in_parameter_space(family, theta)) {
        throw DomainError("parameter outside the natural parameter space of the " +
                          std::string(family_name(family)) + " family");
    }
}

bool in_sample_space(Family family, double x) {
    if (!std::isfinite(x)) return false;
    if (family == Family::VonMises) return x >= 0.0 && x < kTwoPi;
    return x > 0.0;
}

void validate_sample(Family family, std::span<const double> sample) {
    for (double x : sample) {
        if (!in_sample_space(family, x)) {
            throw DomainError("observation " + std::to_string(x) + " outside the sample space of the " +
                              std::string(family_name(family)) + " family");
        }
    }
}

Vector sufficient_transform(Family family, double x) {
    switch (family) {
        case Family::Exponential: return Vector::Constant(1, -x);
        case Family::Gamma: return Vector{{std::log(x), -x}};
        case Family::VonMises: return Vector{{std::cos(x), std::sin(x)}};
    }
    return {};
}

double cumulant(Family family, const NaturalParam& theta) {
    require_parameter(family, theta);
    switch (family) {
        case Family::Exponential: return -std::log(theta[0]);
        case Family::Gamma:
            return special::log_gamma(gamma_shape(theta)) - gamma_shape(theta) * std::log(gamma_rate(theta));
        case Family::VonMises: return std::log(kTwoPi) + special::log_bessel_i0(vm_concentration(theta));
    }
    return 0.0;
}

double cumulant_shift(Family family, const NaturalParam& theta, const Vector& phi) {
    require_parameter(family, theta);
    if (phi.size() != theta.size()) {
        throw DomainError("cumulant_shift: dimension mismatch");
    }
    const NaturalParam shifted(theta.value + phi);
    if (!in_parameter_space(family, shifted)) {
        throw DomainError("cumulant_shift: theta + phi leaves the parameter space");
    }
    switch (family) {
        case Family::Exponential: return std::log(theta[0] / shifted[0]);
        case Family::Gamma: {
            const double a = theta[0], b = theta[1];
            const double a2 = shifted[0], b2 = shifted[1];
            return special::log_gamma(a2) - special::log_gamma(a) + a * std::log(b) - a2 * std::log(b2);
        }
        case Family::VonMises:
            return special::log_bessel_i0(vm_concentration(shifted)) -
                   special::log_bessel_i0(vm_concentration(theta));
    }
    return 0.0;
}

MomentStructure moment_structure(Family family, const NaturalParam& theta) {
    require_parameter(family, theta);
    const int k = dimension(family);
    MomentStructure ms;
    ms.mean = Vector::Zero(k);
    ms.cov = Matrix::Zero(k, k);
    ms.kappa3 = ThirdCumulants(k);

    switch (family) {
        case Family::Exponential: {
            const double t = theta[0];
            ms.mean(0) = -1.0 / t;
            ms.cov(0, 0) = 1.0 / (t * t);
            ms.kappa3(0, 0, 0) = -2.0 / (t * t * t);
            break;
        }
        case Family::Gamma: {
            const double a = gamma_shape(theta), b = gamma_rate(theta);
            ms.mean << special::digamma(a) - std::log(b), -a / b;
            ms.cov << special::trigamma(a), -1.0 / b, -1.0 / b, a / (b * b);
            ms.kappa3(0, 0, 0) = special::tetragamma(a);
            // kappa_112 = 0; kappa_122 = 1/b^2; kappa_222 = -2a/b^3
            const double k122 = 1.0 / (b * b);
            ms.kappa3(0, 1, 1) = ms.kappa3(1, 0, 1) = ms.kappa3(1, 1, 0) = k122;
            ms.kappa3(1, 1, 1) = -2.0 * a / (b * b * b);
            break;
        }
        case Family::VonMises: {
            // kappa = g(r), r = |theta|. With e = theta/r and P = I - ee':
            //   grad = g' e,  Hess = g'' ee' + (g'/r) P,
            //   kappa_ijk = g''' e_i e_j e_k + c (P_ij e_k + P_ik e_j + P_jk e_i),  c = (g'' - g'/r)/r.
            const double r = vm_concentration(theta);
            double g1, g2, g3, g1_over_r, c;
            Eigen::Vector2d e(1.0, 0.0);
            if (r < 1e-3) {
                // log I0(r) = r^2/4 - r^4/64 + r^6/576 - ...
                const double r2 = r * r;
                g1 = r / 2 - r * r2 / 16 + r * r2 * r2 / 96;
                g1_over_r = 0.5 - r2 / 16 + r2 * r2 / 96;
                g2 = 0.5 - 3 * r2 / 16 + 5 * r2 * r2 / 96;
                g3 = -3 * r / 8 + 20 * r * r2 / 96;
                c = -r / 8 + r * r2 / 24;
            } else {
                const double A = special::bessel_ratio(r);
                g1 = A;
                g1_over_r = A / r;
                g2 = 1.0 - A / r - A * A;
                g3 = -g2 / r + A / (r * r) - 2.0 * A * g2;
                c = (g2 - g1_over_r) / r;
            }
            if (r > 0.0) {
                e << theta[0] / r, theta[1] / r;
            }
            const Eigen::Matrix2d P = Eigen::Matrix2d::Identity() - e * e.transpose();
            ms.mean = g1 * e;
            ms.cov = g2 * e * e.transpose() + g1_over_r * P;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    for (int l = 0; l < 2; ++l)
                        ms.kappa3(i, j, l) = g3 * e(i) * e(j) * e(l) +
                                             c * (P(i, j) * e(l) + P(i, l) * e(j) + P(j, l) * e(i));
            break;
        }
    }

    Eigen::LDLT<Matrix> ldlt(ms.cov);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-300) {
        throw DomainError("moment_structure: covariance of T is singular at this parameter");
    }
    ms.precision = ldlt.solve(Matrix::Identity(k, k));
    ms.precision = 0.5 * (ms.precision + ms.precision.transpose()).eval();
    return ms;
}

double density(Family family, const NaturalParam& theta, double x) {
    require_parameter(family, theta);
    switch (family) {
        case Family::Exponential: return x < 0.0 ? 0.0 : theta[0] * std::exp(-theta[0] * x);
        case Family::Gamma: {
            if (x <= 0.0) return 0.0;
            const double a = gamma_shape(theta), b = gamma_rate(theta);
            return std::exp((a - 1.0) * std::log(x) - b * x + a * std::log(b) - special::log_gamma(a));
        }
        case Family::VonMises: {
            if (x < 0.0 || x > kTwoPi) return 0.0;
            const double kappa = vm_concentration(theta);
            const double m = vm_direction(theta);
            return std::exp(kappa * (std::cos(x - m) - 1.0)) / (kTwoPi * special::bessel_i0_scaled(kappa));
        }
    }
    return 0.0;
}

double probability_between(Family family, const NaturalParam& theta, double a, double b) {
    require_parameter(family, theta);
    if (b <= a) return 0.0;
    switch (family) {
        case Family::Exponential: {
            a = std::max(a, 0.0);
            b = std::max(b, 0.0);
            return std::exp(-theta[0] * a) * -std::expm1(-theta[0] * (b - a));
        }
        case Family::Gamma: {
            a = std::max(a, 0.0);
            b = std::max(b, 0.0);
            const double s = gamma_shape(theta), r = gamma_rate(theta);
            // Difference of the smaller tail avoids cancellation near 1.
            if (r * a > s) {
                return special::gamma_q(s, r * a) - special::gamma_q(s, r * b);
            }
            return special::gamma_p(s, r * b) - special::gamma_p(s, r * a);
        }
        case Family::VonMises: {
            a = std::clamp(a, 0.0, kTwoPi);
            b = std::clamp(b, 0.0, kTwoPi);
            return vm_integral(theta, a, b, 1e-12);
        }
    }
    return 0.0;
}

double cdf(Family family, const NaturalParam& theta, double x) {
    require_parameter(family, theta);
    if (std::isnan(x)) {
        throw DomainError("cdf: NaN argument");
    }
    switch (family) {
        case Family::Exponential: return x <= 0.0 ? 0.0 : -std::expm1(-theta[0] * x);
        case Family::Gamma:
            return x <= 0.0 ? 0.0 : special::gamma_p(gamma_shape(theta), gamma_rate(theta) * x);
        case Family::VonMises:
            if (x <= 0.0) return 0.0;
            if (x >= kTwoPi) return 1.0;
            return std::clamp(vm_integral(theta, 0.0, x, 1e-11), 0.0, 1.0);
    }
    return 0.0;
}

double quantile(Family family, const NaturalParam& theta, double p) {
    require_parameter(family, theta);
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("quantile: p must lie in (0, 1)");
    }
    auto f = [&](double x) { return cdf(family, theta, x) - p; };
    auto df = [&](double x) { return density(family, theta, x); };
    switch (family) {
        case Family::Exponential: return -std::log1p(-p) / theta[0];
        case Family::Gamma: {
            const double a = gamma_shape(theta), b = gamma_rate(theta);
            double hi = (a + 10.0 * std::sqrt(a) + 10.0) / b;
            while (f(hi) < 0.0) hi *= 2.0;
            return bracketed_newton(f, df, 0.0, hi, std::min(a / b, 0.5 * hi), 1e-14, "gamma quantile");
        }
        case Family::VonMises:
            return bracketed_newton(f, df, 0.0, kTwoPi, kTwoPi * p, 1e-13, "von Mises quantile");
    }
    return 0.0;
}

std::vector<double> sample(Family family, const NaturalParam& theta, std::size_t n, CounterRng& rng) {
    require_parameter(family, theta);
    std::vector<double> out(n);
    switch (family) {
        case Family::Exponential: {
            for (auto& x : out) x = -std::log(rng.uniform()) / theta[0];
            break;
        }
        case Family::Gamma: {
            std::gamma_distribution<double> dist(gamma_shape(theta), 1.0 / gamma_rate(theta));
            for (auto& x : out) {
                do {
                    x = dist(rng);
                } while (!(x > 0.0));
            }
            break;
        }
        case Family::VonMises: {
            // Best & Fisher (1979) rejection sampler.
            const double kappa = vm_concentration(theta);
            const double m = vm_direction(theta);
            if (kappa < 1e-8) {
                for (auto& x : out) x = kTwoPi * rng.uniform();
                break;
            }
            const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
            const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
            const double r = (1.0 + rho * rho) / (2.0 * rho);
            for (auto& x : out) {
                double f;
                for (;;) {
                    const double z = std::cos(std::numbers::pi * rng.uniform());
                    f = (1.0 + r * z) / (r + z);
                    const double c = kappa * (r - f);
                    const double u2 = rng.uniform();
                    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) break;
                }
                const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                double angle = std::fmod(m + sign * std::acos(std::clamp(f, -1.0, 1.0)), kTwoPi);
                if (angle < 0.0) angle += kTwoPi;
                if (angle >= kTwoPi) angle = 0.0;
                x = angle;
            }
            break;
        }
    }
    return out;
}

SufficientStat sufficient_stat(Family family, std::span<const double> sample) {
    const int k = dimension(family);
    SufficientStat s;
    s.n = sample.size();
    s.t = Vector::Zero(k);
    std::vector<double> column(sample.size());
    for (int c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < sample.size(); ++i) {
            const double x = sample[i];
            switch (family) {
                case Family::Exponential: column[i] = -x; break;
                case Family::Gamma: column[i] = c == 0 ? std::log(x) : -x; break;
                case Family::VonMises: column[i] = c == 0 ? std::cos(x) : std::sin(x); break;
            }
        }
        s.t(c) = neumaier_sum(column);
    }
    return s;
}

NaturalParam mle(Family family, const SufficientStat& stat) {
    if (stat.n < 2) {
        throw DomainError("mle: sample size must be at least 2");
    }
    const double n = static_cast<double>(stat.n);
    switch (family) {
        case Family::Exponential: {
            const double mean = -stat.t(0) / n;
            if (!(mean > 0.0)) throw DomainError("mle: exponential sample mean must be positive");
            return NaturalParam{1.0 / mean};
        }
        case Family::Gamma: {
            const double mean = -stat.t(1) / n;
            const double mean_log = stat.t(0) / n;
            if (!(mean > 0.0)) throw DomainError("mle: gamma sample mean must be positive");
            const double s = std::log(mean) - mean_log;
            if (!(s > 1e-14)) {
                throw DomainError("mle: degenerate gamma sample (all observations equal)");
            }
            // Solve log a - digamma(a) = s; the left side decreases from +inf to 0.
            auto g = [s](double a) { return std::log(a) - special::digamma(a) - s; };
            auto dg = [](double a) { return 1.0 / a - special::trigamma(a); };
            double a0 = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
            double lo = a0, hi = a0;
            while (g(lo) <= 0.0) lo *= 0.5;
            while (g(hi) >= 0.0) hi *= 2.0;
            const double a = bracketed_newton(g, dg, lo, hi, a0, 1e-12 * s, "gamma mle");
            return NaturalParam{a, a / mean};
        }
        case Family::VonMises: {
            const double rbar = std::hypot(stat.t(0), stat.t(1)) / n;
            if (rbar < 1e-14) {
                return NaturalParam{0.0, 0.0};
            }
            if (rbar > 1.0 - 1e-13) {
                throw DomainError("mle: degenerate von Mises sample (all angles equal)");
            }
            auto h = [rbar](double k) { return special::bessel_ratio(k) - rbar; };
            auto dh = [](double k) {
                const double A = special::bessel_ratio(k);
                return k > 0.0 ? 1.0 - A / k - A * A : 0.5;
            };
            const double k0 = rbar * (2.0 - rbar * rbar) / (1.0 - rbar * rbar);
            double hi = std::max(k0, 1.0);
            while (h(hi) <= 0.0) hi *= 2.0;
            const double kappa = bracketed_newton(h, dh, 0.0, hi, std::min(k0, 0.5 * hi), 1e-12 * rbar,
                                                  "von Mises mle");
            const double dir = std::atan2(stat.t(1), stat.t(0));
            return NaturalParam{kappa * std::cos(dir), kappa * std::sin(dir)};
        }
    }
    return {};
}

NaturalParam mle(Family family, std::span<const double> sample) {
    validate_sample(family, sample);
    return mle(family, sufficient_stat(family, sample));
}

}  // namespace condfit
