#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Monte Carlo bookkeeping shared by the engines and the test suites:
// empirical CDFs, Kolmogorov-Smirnov checks, DKW bands, correlation and
// effective sample size.

namespace condfit::mc {

class EmpiricalCdf {
public:
    EmpiricalCdf() = default;
    explicit EmpiricalCdf(std::vector<double> values);

    // Right-continuous: fraction of values <= x.
    double operator()(double x) const;

    const std::vector<double>& sorted() const { return values_; }
    std::size_t size() const { return values_.size(); }

private:
    std::vector<double> values_;
};

// sup_x |F(x) - G(x)| between two step functions.
double sup_distance(const EmpiricalCdf& a, const EmpiricalCdf& b);

struct KsResult {
    double statistic = 0.0;  // D, not scaled by sqrt(n)
    double p_value = 1.0;
};

// Asymptotic Kolmogorov tail probability P(K > lambda).
double kolmogorov_tail(double lambda);

// One-sample KS against Uniform(0, 1), with Stephens' small-sample correction.
KsResult ks_uniform(std::span<const double> values);

// One-sample KS against an arbitrary continuous CDF.
template <class Cdf>
KsResult ks_one_sample(std::span<const double> values, Cdf F);

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Half-width of the Dvoretzky-Kiefer-Wolfowitz band at level alpha.
double dkw_band(std::size_t n, double alpha);

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased
double pearson(std::span<const double> x, std::span<const double> y);

// Geyer's initial positive sequence estimator.
double effective_sample_size(std::span<const double> trace);

// Standard error of the mean by non-overlapping batch means.
double batch_means_se(std::span<const double> trace, std::size_t batches = 50);

}  // namespace condfit::mc

#include <algorithm>
#include <cmath>

namespace condfit::mc {

template <class Cdf>
KsResult ks_one_sample(std::span<const double> values, Cdf F) {
    std::vector<double> u(values.size());
    std::transform(values.begin(), values.end(), u.begin(), F);
    return ks_uniform(u);
}

}  // namespace condfit::mc
