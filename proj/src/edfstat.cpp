#include "condfit/edfstat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "condfit/errors.hpp"

namespace condfit {

std::string_view stat_name(StatKind kind) {
    switch (kind) {
        case StatKind::CramerVonMises: return "cvm";
        case StatKind::Watson: return "watson";
        case StatKind::AndersonDarling: return "ad";
        case StatKind::KolmogorovSmirnov: return "ks";
    }
    return "unknown";
}

StatKind parse_stat(std::string_view name) {
    if (name == "cvm" || name == "w2") return StatKind::CramerVonMises;
    if (name == "watson" || name == "u2") return StatKind::Watson;
    if (name == "ad" || name == "a2") return StatKind::AndersonDarling;
    if (name == "ks") return StatKind::KolmogorovSmirnov;
    throw ParseError("unknown statistic '" + std::string(name) + "'");
}

PitVector make_pit(std::vector<double> u, NaturalParam source) {
    for (double& v : u) {
        if (std::isnan(v)) throw DomainError("make_pit: NaN transform value");
        v = std::clamp(v, kPitClamp, 1.0 - kPitClamp);
    }
    std::stable_sort(u.begin(), u.end());
    return PitVector{std::move(u), std::move(source)};
}

PitVector pit(std::span<const double> sample, Family family, const NaturalParam& theta_hat) {
    require_parameter(family, theta_hat);
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    std::vector<double> u(xs.size());
    if (family == Family::VonMises) {
        // Accumulate the integral between consecutive order statistics.
        double acc = 0.0;
        double prev = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            acc += probability_between(family, theta_hat, prev, xs[i]);
            u[i] = acc;
            prev = xs[i];
        }
    } else {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            u[i] = cdf(family, theta_hat, xs[i]);
        }
    }
    return make_pit(std::move(u), theta_hat);
}

namespace {

void require_nonempty(const PitVector& u) {
    if (u.u.empty()) throw DomainError("statistic of an empty PIT vector");
}

double mean(const std::vector<double>& u) {
    double s = 0.0;
    for (double v : u) s += v;
    return s / static_cast<double>(u.size());
}

}  // namespace

StatValue cvm(const PitVector& u, Weight) {
    require_nonempty(u);
    const double n = static_cast<double>(u.size());
    double s = 1.0 / (12.0 * n);
    for (std::size_t i = 0; i < u.u.size(); ++i) {
        const double d = u.u[i] - (2.0 * i + 1.0) / (2.0 * n);
        s += d * d;
    }
    return {StatKind::CramerVonMises, s};
}

StatValue watson(const PitVector& u, Weight w) {
    const double w2 = cvm(u, w).value;
    const double n = static_cast<double>(u.size());
    const double d = mean(u.u) - 0.5;
    return {StatKind::Watson, std::max(0.0, w2 - n * d * d)};
}

StatValue anderson_darling(const PitVector& u) {
    require_nonempty(u);
    const std::size_t n = u.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += (2.0 * i + 1.0) * (std::log(u.u[i]) + std::log1p(-u.u[n - 1 - i]));
    }
    const double nd = static_cast<double>(n);
    return {StatKind::AndersonDarling, -nd - s / nd};
}

StatValue kolmogorov_smirnov(const PitVector& u) {
    require_nonempty(u);
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.u.size(); ++i) {
        d = std::max(d, (i + 1.0) / n - u.u[i]);
        d = std::max(d, u.u[i] - i / n);
    }
    return {StatKind::KolmogorovSmirnov, std::sqrt(n) * d};
}

StatValue compute_statistic(StatKind kind, const PitVector& u) {
    switch (kind) {
        case StatKind::CramerVonMises: return cvm(u);
        case StatKind::Watson: return watson(u);
        case StatKind::AndersonDarling: return anderson_darling(u);
        case StatKind::KolmogorovSmirnov: return kolmogorov_smirnov(u);
    }
    return {kind, 0.0};
}

TestStatistic test_statistic(StatKind kind, Family family, std::span<const double> sample) {
    TestStatistic out{{kind, 0.0}, mle(family, sample), {}};
    out.pit = pit(sample, family, out.theta_hat);
    out.stat = compute_statistic(kind, out.pit);
    return out;
}

double SpectralCoefficients::partial_sum_of_squares() const {
    double s = 0.0;
    for (double v : U) s += v * v;
    return s;
}

SpectralCoefficients spectral_coefficients(const PitVector& u, std::size_t K) {
    if (K < 1) throw DomainError("spectral_coefficients: K must be positive");
    require_nonempty(u);
    const double n = static_cast<double>(u.size());
    const double scale = std::sqrt(2.0 / n);
    SpectralCoefficients out;
    out.U.resize(K);
    for (std::size_t j = 1; j <= K; ++j) {
        const double w = std::numbers::pi * static_cast<double>(j);
        double s = 0.0;
        for (double v : u.u) s += std::cos(w * v);
        out.U[j - 1] = scale * s / w;
    }
    return out;
}

}  // namespace condfit
