#include "condfit/bootstrap.hpp"

#include <cmath>

#include "condfit/errors.hpp"
#include "condfit/parallel.hpp"

namespace condfit {

namespace {

constexpr std::uint64_t kBootstrapStream = 0xb0075;
constexpr int kMaxAttempts = 50;

}  // namespace

PValue add_one_pvalue(double observed, std::span<const double> replicates, std::uint64_t seed,
                      std::string method) {
    std::size_t exceed = 0;
    for (double s : replicates) {
        if (s >= observed) ++exceed;
    }
    const double B = static_cast<double>(replicates.size());
    PValue p;
    p.estimate = (1.0 + static_cast<double>(exceed)) / (B + 1.0);
    p.mc_se = B > 0 ? std::sqrt(p.estimate * (1.0 - p.estimate) / B) : 0.0;
    p.replicates = replicates.size();
    p.seed = seed;
    p.method = std::move(method);
    return p;
}

NullStatistics simulate_null_statistics(Family family, const NaturalParam& theta, std::size_t n,
                                        StatKind kind, const SimulationOptions& opts) {
    require_parameter(family, theta);
    NullStatistics out;
    out.values.assign(opts.replicates, 0.0);
    std::vector<std::size_t> redraws(opts.replicates, 0);
    parallel_for(opts.replicates, opts.workers, [&](std::size_t i) {
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            CounterRng rng(opts.seed, {kBootstrapStream, i, static_cast<std::uint64_t>(attempt)});
            const auto x = sample(family, theta, n, rng);
            try {
                out.values[i] = test_statistic(kind, family, x).stat.value;
                return;
            } catch (const DomainError&) {
            } catch (const ConvergenceError&) {
            }
            ++redraws[i];
        }
        throw ConvergenceError("bootstrap replicate could not be fitted after repeated re-draws");
    });
    for (auto r : redraws) out.redraws += r;
    if (out.redraws * 100 > opts.replicates) {
        throw ConvergenceError("more than 1% of bootstrap replicates had to be re-drawn (" +
                               std::to_string(out.redraws) + ")");
    }
    return out;
}

BootstrapResult bootstrap_pvalue(std::span<const double> sample, Family family, StatKind kind,
                                 const SimulationOptions& opts) {
    if (opts.replicates < 99) {
        throw DomainError("bootstrap_pvalue: at least 99 replicates required");
    }
    BootstrapResult out{test_statistic(kind, family, sample), {}, 0};
    const auto null = simulate_null_statistics(family, out.observed.theta_hat, sample.size(), kind, opts);
    out.p = add_one_pvalue(out.observed.stat.value, null.values, opts.seed, "parametric-bootstrap");
    out.redraws = null.redraws;
    return out;
}

NullCdfEstimate null_cdf(Family family, const NaturalParam& theta, std::size_t n, StatKind kind,
                         const SimulationOptions& opts) {
    if (opts.replicates < 1000) {
        throw DomainError("null_cdf: at least 1000 replicates required");
    }
    auto null = simulate_null_statistics(family, theta, n, kind, opts);
    return {kind, mc::EmpiricalCdf(std::move(null.values)), null.redraws};
}

}  // namespace condfit
