#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "condfit/edfstat.hpp"
#include "condfit/expfam.hpp"
#include "condfit/mcstats.hpp"

namespace condfit {

// Monte Carlo P-value (1 + #{S* >= S_obs}) / (R + 1); ties count as exceedances.
struct PValue {
    double estimate = 1.0;
    double mc_se = 0.0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::string method;  // "parametric-bootstrap", "exact-conditional", "mcmc-conditional"
};

PValue add_one_pvalue(double observed, std::span<const double> replicates, std::uint64_t seed,
                      std::string method);

struct SimulationOptions {
    std::size_t replicates = 999;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct NullStatistics {
    std::vector<double> values;  // indexed by replicate, not sorted
    std::size_t redraws = 0;
};

// Statistic values of `replicates` datasets of size n drawn at theta, each
// refit by maximum likelihood before the PIT. A replicate whose fit fails is
// re-drawn from a fresh stream; more than 1% re-draws is a ConvergenceError.
NullStatistics simulate_null_statistics(Family family, const NaturalParam& theta, std::size_t n,
                                        StatKind kind, const SimulationOptions& opts);

struct BootstrapResult {
    TestStatistic observed;
    PValue p;
    std::size_t redraws = 0;
};

BootstrapResult bootstrap_pvalue(std::span<const double> sample, Family family, StatKind kind,
                                 const SimulationOptions& opts);

struct NullCdfEstimate {
    StatKind kind;
    mc::EmpiricalCdf cdf;
    std::size_t redraws = 0;

    double operator()(double x) const { return cdf(x); }
};

NullCdfEstimate null_cdf(Family family, const NaturalParam& theta, std::size_t n, StatKind kind,
                         const SimulationOptions& opts);

}  // namespace condfit
