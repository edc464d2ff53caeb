#include "condfit/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "condfit/errors.hpp"
#include "condfit/parallel.hpp"
#include "condfit/quadrature.hpp"
#include "condfit/rng.hpp"
#include "condfit/special.hpp"

namespace condfit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kShiftTol = 1e-11;

Vector integrate_components(int k, double a, double b, int panels,
                            const std::function<double(int, double)>& integrand, const char* what) {
    Vector out(k);
    for (int j = 0; j < k; ++j) {
        auto r = quad::adaptive_simpson([&](double y) { return integrand(j, y); }, a, b, kShiftTol, panels);
        if (!r.converged) throw ConvergenceError(std::string("score_shift: quadrature failed for ") + what);
        out(j) = r.value;
    }
    return out;
}

}  // namespace

Vector score_shift(Family family, const NaturalParam& theta, double s) {
    require_parameter(family, theta);
    if (!(s > 0.0 && s < 1.0)) throw DomainError("score_shift: s must lie in (0, 1)");
    const auto ms = moment_structure(family, theta);
    const double x = quantile(family, theta, s);
    switch (family) {
        case Family::Exponential:
            return integrate_components(1, 0.0, x, 8, [&](int, double y) {
                return (-y - ms.mean(0)) * density(family, theta, y);
            }, "exponential");
        case Family::Gamma: {
            // y = x exp(-t / a) removes the y^(a-1) singularity at 0.
            const double a = theta[0], b = theta[1];
            const double log_c = a * std::log(b * x) - special::log_gamma(a + 1.0);
            return integrate_components(2, 0.0, 60.0, 16, [&](int j, double t) {
                const double y = x * std::exp(-t / a);
                const double w = std::exp(log_c - b * y - t);
                const double T = j == 0 ? std::log(x) - t / a : -y;
                return (T - ms.mean(j)) * w;
            }, "gamma");
        }
        case Family::VonMises: {
            const double kappa = theta.value.norm();
            const int panels = std::max(8, static_cast<int>(std::ceil(x * std::sqrt(std::max(kappa, 1.0)) / 0.5)));
            return integrate_components(2, 0.0, x, panels, [&](int j, double y) {
                const double T = j == 0 ? std::cos(y) : std::sin(y);
                return (T - ms.mean(j)) * density(family, theta, y);
            }, "von Mises");
        }
    }
    return {};
}

double limit_covariance(Family family, const NaturalParam& theta, double s, double t, bool estimated) {
    if (!(s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0)) {
        throw DomainError("limit_covariance: arguments must lie in (0, 1)");
    }
    double r = std::min(s, t) - s * t;
    if (estimated) {
        const auto ms = moment_structure(family, theta);
        const Vector xs = score_shift(family, theta, s);
        const Vector xt = s == t ? xs : score_shift(family, theta, t);
        r -= xs.dot(ms.precision * xt);
    }
    return r;
}

double KernelGrid::trace_integral() const {
    return values.diagonal().sum() / static_cast<double>(size());
}

namespace {

void centre(Matrix& K) {
    const Vector row = K.rowwise().mean();
    const double grand = row.mean();
    K.colwise() -= row;
    K.rowwise() -= row.transpose();
    K.array() += grand;
}

std::vector<double> midpoint_grid(std::size_t m) {
    std::vector<double> s(m);
    for (std::size_t i = 0; i < m; ++i) s[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    return s;
}

void require_quadratic_kind(StatKind kind) {
    if (kind != StatKind::CramerVonMises && kind != StatKind::Watson) {
        throw DomainError("limit law available for Cramer-von Mises and Watson statistics only");
    }
}

}  // namespace

KernelGrid make_kernel_grid(Family family, const NaturalParam& theta, StatKind kind, std::size_t m,
                            bool estimated, unsigned workers) {
    require_quadratic_kind(kind);
    require_parameter(family, theta);
    if (m < 4) throw DomainError("make_kernel_grid: grid too small");
    KernelGrid g;
    g.family = family;
    g.theta = theta;
    g.kind = kind;
    g.estimated = estimated;
    g.s = midpoint_grid(m);
    const auto ms = moment_structure(family, theta);
    const int k = dimension(family);
    Matrix xi = Matrix::Zero(k, static_cast<Eigen::Index>(m));
    if (estimated) {
        parallel_for(m, workers, [&](std::size_t i) { xi.col(static_cast<Eigen::Index>(i)) = score_shift(family, theta, g.s[i]); });
    }
    const Matrix correction = xi.transpose() * ms.precision * xi;
    g.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            g.values(ii, jj) = std::min(g.s[i], g.s[j]) - g.s[i] * g.s[j] - correction(ii, jj);
        }
    }
    g.values = 0.5 * (g.values + g.values.transpose()).eval();
    if (kind == StatKind::Watson) centre(g.values);
    return g;
}

KernelGrid bridge_kernel_grid(StatKind kind, std::size_t m) {
    return make_kernel_grid(Family::Exponential, NaturalParam{1.0}, kind, m, false);
}

std::vector<double> Spectrum::weights() const {
    std::vector<double> w(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    if (tail_mass > 0.0) w.push_back(tail_mass);
    return w;
}

Spectrum nystrom_spectrum(const KernelGrid& kernel, std::size_t K) {
    const std::size_t m = kernel.size();
    if (K == 0 || m < 4 * K) throw DomainError("nystrom_spectrum: need grid size m >= 4K");
    const Matrix A = kernel.values / static_cast<double>(m);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(A, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ConvergenceError("nystrom_spectrum: eigensolve failed");
    const Vector& ev = solver.eigenvalues();  // ascending
    Spectrum out;
    out.eigenvalues.resize(static_cast<Eigen::Index>(K));
    for (std::size_t j = 0; j < K; ++j) {
        out.eigenvalues(static_cast<Eigen::Index>(j)) = std::max(0.0, ev(ev.size() - 1 - static_cast<Eigen::Index>(j)));
    }
    out.trace = kernel.trace_integral();
    out.tail_mass = std::max(0.0, out.trace - out.eigenvalues.sum());
    return out;
}

namespace {

// Last even-column entry of Wynn's epsilon table for the given sums.
double wynn_epsilon(const std::vector<double>& sums) {
    const std::size_t n = sums.size();
    std::vector<double> prev(n + 1, 0.0), cur(sums.begin(), sums.end());
    double best = sums.back();
    for (std::size_t k = 1; cur.size() > 1; ++k) {
        std::vector<double> next(cur.size() - 1);
        for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
            const double diff = cur[i + 1] - cur[i];
            if (diff == 0.0) return k % 2 == 1 ? cur[i + 1] : best;
            next[i] = prev[i + 1] + 1.0 / diff;
        }
        prev = std::move(cur);
        cur = std::move(next);
        if (k % 2 == 0 && !cur.empty() && std::isfinite(cur.back())) best = cur.back();
    }
    return best;
}

ChisqMixtureCdf monte_carlo_cdf(const std::vector<double>& lambda, double x) {
    constexpr std::size_t draws = 1'000'000;
    CounterRng rng(0x1b0f, {static_cast<std::uint64_t>(std::llround(x * 1e9))});
    std::normal_distribution<double> normal;
    std::size_t hits = 0;
    for (std::size_t d = 0; d < draws; ++d) {
        double q = 0.0;
        for (double l : lambda) {
            const double z = normal(rng);
            q += l * z * z;
        }
        if (q <= x) ++hits;
    }
    ChisqMixtureCdf out;
    out.value = static_cast<double>(hits) / draws;
    out.std_error = std::sqrt(out.value * (1.0 - out.value) / draws);
    out.method = "monte-carlo";
    return out;
}

}  // namespace

ChisqMixtureCdf weighted_chisq_cdf(std::span<const double> lambda_in, double x) {
    std::vector<double> lambda;
    for (double l : lambda_in) {
        if (!std::isfinite(l)) throw DomainError("weighted_chisq_cdf: non-finite weight");
        if (l > 0.0) lambda.push_back(l);
    }
    if (lambda.empty()) throw DomainError("weighted_chisq_cdf: all weights are zero");
    if (std::isnan(x)) throw DomainError("weighted_chisq_cdf: NaN argument");
    if (x <= 0.0) return {0.0, 0.0, "imhof"};

    double lsum = 0.0;
    for (double l : lambda) lsum += l;
    auto integrand = [&](double u) {
        if (u == 0.0) return 0.5 * (lsum - x);
        double phase = -0.5 * x * u, logrho = 0.0;
        for (double l : lambda) {
            phase += 0.5 * std::atan(l * u);
            logrho += 0.25 * std::log1p(l * l * u * u);
        }
        return std::sin(phase) / (u * std::exp(logrho));
    };
    // Bound on the integral of 1 / (u rho(u)) over [U, inf).
    auto tail_bound = [&](double U) {
        double logrho = 0.0, p = 1.0;
        for (double l : lambda) {
            const double lu2 = l * l * U * U;
            logrho += 0.25 * std::log1p(lu2);
            p += 0.5 * lu2 / (1.0 + lu2);
        }
        return std::exp(-logrho) / ((p - 1.0) * kPi);
    };

    const double chunk = 2.0 * kPi / x;
    constexpr std::size_t max_chunks = 20000;
    std::vector<double> sums;
    double total = 0.0, last_wynn = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t c = 0; c < max_chunks; ++c) {
        const double a = chunk * static_cast<double>(c);
        auto r = quad::adaptive_simpson(integrand, a, a + chunk, 1e-12, c == 0 ? 8 : 2);
        if (!r.converged || !std::isfinite(r.value)) break;
        total += r.value;
        sums.push_back(total);
        if (tail_bound(a + chunk) < 1e-9) {
            return {std::clamp(0.5 - total / kPi, 0.0, 1.0), 0.0, "imhof"};
        }
        if (sums.size() >= 40 && sums.size() % 10 == 0) {
            const std::vector<double> recent(sums.end() - 31, sums.end());
            const double w = wynn_epsilon(recent);
            if (std::isfinite(w) && std::abs(w - last_wynn) < 1e-10) {
                return {std::clamp(0.5 - w / kPi, 0.0, 1.0), 0.0, "imhof"};
            }
            last_wynn = w;
        }
    }
    return monte_carlo_cdf(lambda, x);
}

ChisqMixtureCdf weighted_chisq_cdf(const Spectrum& spectrum, double x) {
    const auto w = spectrum.weights();
    return weighted_chisq_cdf(w, x);
}

double weighted_chisq_quantile(std::span<const double> lambda, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("weighted_chisq_quantile: p must lie in (0, 1)");
    double mean = 0.0, var = 0.0;
    for (double l : lambda) {
        mean += std::max(l, 0.0);
        var += 2.0 * l * l;
    }
    double lo = 0.0, hi = mean + 20.0 * std::sqrt(var);
    while (weighted_chisq_cdf(lambda, hi).value < p) hi *= 2.0;
    for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (weighted_chisq_cdf(lambda, mid).value < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace condfit
