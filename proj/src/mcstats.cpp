#include "condfit/mcstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "condfit/errors.hpp"

namespace condfit::mc {

EmpiricalCdf::EmpiricalCdf(std::vector<double> values) : values_(std::move(values)) {
    std::sort(values_.begin(), values_.end());
}

double EmpiricalCdf::operator()(double x) const {
    if (values_.empty()) return 0.0;
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double sup_distance(const EmpiricalCdf& a, const EmpiricalCdf& b) {
    const auto& x = a.sorted();
    const auto& y = b.sorted();
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() || j < y.size()) {
        double v;
        if (j >= y.size() || (i < x.size() && x[i] <= y[j])) {
            v = x[i];
        } else {
            v = y[j];
        }
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

double kolmogorov_tail(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_uniform(std::span<const double> values) {
    std::vector<double> u(values.begin(), values.end());
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d = std::max(d, (i + 1.0) / n - u[i]);
        d = std::max(d, u[i] - i / n);
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    const EmpiricalCdf fa(std::vector<double>(a.begin(), a.end()));
    const EmpiricalCdf fb(std::vector<double>(b.begin(), b.end()));
    const double d = sup_distance(fa, fb);
    const double ne = static_cast<double>(a.size()) * b.size() / (static_cast<double>(a.size()) + b.size());
    const double se = std::sqrt(ne);
    return {d, kolmogorov_tail((se + 0.12 + 0.11 / se) * d)};
}

double dkw_band(std::size_t n, double alpha) {
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw DomainError("pearson: need two equal-length series of size >= 2");
    }
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double effective_sample_size(std::span<const double> trace) {
    const std::size_t n = trace.size();
    if (n < 4) return static_cast<double>(n);
    const double m = mean(trace);
    std::vector<double> c(trace.size());
    for (std::size_t i = 0; i < n; ++i) c[i] = trace[i] - m;
    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
        return s / static_cast<double>(n);
    };
    const double g0 = autocov(0);
    if (g0 <= 0.0) return static_cast<double>(n);
    // Sum of consecutive-pair autocovariances while they stay positive.
    double sum_pairs = 0.0;
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        const double pair = autocov(2 * k) + autocov(2 * k + 1);
        if (pair <= 0.0) break;
        sum_pairs += pair;
    }
    const double tau = std::max(1.0, (2.0 * sum_pairs - g0) / g0);
    return static_cast<double>(n) / tau;
}

double batch_means_se(std::span<const double> trace, std::size_t batches) {
    const std::size_t n = trace.size();
    batches = std::min(batches, n);
    if (batches < 2) return 0.0;
    const std::size_t len = n / batches;
    std::vector<double> bm(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        bm[b] = mean(trace.subspan(b * len, len));
    }
    return std::sqrt(variance(bm) / static_cast<double>(batches));
}

}  // namespace condfit::mc
