#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "condfit/bootstrap.hpp"
#include "condfit/edfstat.hpp"
#include "condfit/expfam.hpp"

namespace condfit {

// Sampling from the law of (X_1, ..., X_n) given T_n = t.
//
// Exponential: exact, X = s * (uniform point on the simplex).
// Gamma, von Mises: Metropolis-Hastings on the constraint fiber. Each move
// picks three coordinates, keeps their contribution to T_n fixed and
// resamples the one remaining degree of freedom.

struct ChainConfig {
    std::size_t burn_in = 200;  // sweeps; one sweep = n triple-move attempts
    std::size_t thin = 5;       // sweeps between retained datasets
    std::uint64_t seed = 0;
};

struct MoveStats {
    std::size_t attempted = 0;
    std::size_t accepted = 0;
    std::size_t infeasible = 0;
    std::size_t numerical_failures = 0;

    double acceptance_rate() const {
        return attempted ? static_cast<double>(accepted) / static_cast<double>(attempted) : 0.0;
    }
};

class ConstraintState {
public:
    ConstraintState(Family family, std::vector<double> data);

    Family family() const { return family_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }
    const SufficientStat& target() const { return target_; }

    // max_c |T_c(data) - t_c| / max(|t|_inf, 1), recomputed from the data.
    double residual() const;

private:
    Family family_;
    std::vector<double> data_;
    SufficientStat target_;
};

// Fiber geometry of a Gamma triple with sum s3 and product p3, in units of s3:
// the first coordinate w = x_i / s3 ranges over [lo, hi], the roots in (0, 1)
// of w (1 - w)^2 = 4 p3 / s3^3; `third` is the remaining root (> 1).
struct GammaTripleFiber {
    double lo = 0.0, hi = 0.0, third = 0.0;
    bool feasible = false;
};
GammaTripleFiber gamma_triple_fiber(double s3, double p3);

// Unnormalized fiber density of w = x_i / s3 (from c(x) = 1/x and the
// Jacobian of (x_j, x_k) -> (x_j + x_k, log x_j + log x_k)).
double gamma_fiber_density(const GammaTripleFiber& fiber, double w);

// Arcsine proposal density on [lo, hi].
double arcsine_density(double lo, double hi, double w);

// von Mises triple with resultant r = (rx, ry): the first angle a is feasible
// iff |r - u(a)| <= 2. Full circle when |r| <= 1, otherwise an arc of
// half-width `half_width` centred on arg r.
struct VonMisesTripleFiber {
    double resultant = 0.0;
    double direction = 0.0;
    double half_width = 0.0;
    bool full_circle = true;
};
VonMisesTripleFiber vonmises_triple_fiber(double rx, double ry);

// Unnormalized fiber density of the first angle: 1 / (|w| sqrt(1 - |w|^2 / 4)),
// w = r - u(a); zero outside the feasible set.
double vonmises_fiber_density(const VonMisesTripleFiber& fiber, double a);

// Proposal density on the feasible set: uniform on the full circle,
// arcsine in the offset a - arg r on an arc.
double vonmises_proposal_density(const VonMisesTripleFiber& fiber, double a);

// Metropolis-Hastings acceptance probability for an independence proposal.
double mh_acceptance(double target_from, double proposal_from, double target_to, double proposal_to);

// One triple move on (i, j, k), distinct. Returns true if accepted.
bool triple_move(ConstraintState& state, std::size_t i, std::size_t j, std::size_t k, CounterRng& rng,
                 MoveStats& stats);

class TripleMoveChain {
public:
    TripleMoveChain(ConstraintState state, CounterRng rng);

    void sweep();
    void sweeps(std::size_t count);

    const ConstraintState& state() const { return state_; }
    const MoveStats& stats() const { return stats_; }

private:
    ConstraintState state_;
    CounterRng rng_;
    MoveStats stats_;
};

// Exact draw given sum(X) = s for the Exponential family (t = -s).
std::vector<double> exact_conditional_sample_exponential(const SufficientStat& t, CounterRng& rng);

// A deterministic dataset of size n whose sufficient statistic is exactly
// n * mu(theta), used to start chains on the fiber T_n = n mu.
std::vector<double> fiber_point_at_mean(Family family, const NaturalParam& theta, std::size_t n);

struct ChainDiagnostics {
    bool exact = false;
    double acceptance_rate = 1.0;
    double effective_sample_size = 0.0;
    std::size_t retained = 0;
    std::size_t infeasible_moves = 0;
    std::size_t numerical_failures = 0;
    double max_constraint_residual = 0.0;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

struct ConditionalDraws {
    std::vector<double> statistics;
    ChainDiagnostics diagnostics;
};

// M statistic values from datasets with the same T_n as `start` (for the
// Exponential family only T_n of `start` matters). Each dataset is refit
// before its PIT, exactly as the observed data.
ConditionalDraws conditional_statistics(Family family, const std::vector<double>& start, StatKind kind,
                                        std::size_t M, const ChainConfig& config);

struct ConditionalResult {
    TestStatistic observed;
    PValue p;
    ChainDiagnostics diagnostics;
};

ConditionalResult conditional_pvalue(std::span<const double> sample, Family family, StatKind kind,
                                     std::size_t M, const ChainConfig& config);

// ABC rejection oracle: unconditional draws at theta accepted when every
// component satisfies |T_c - t_c| <= eps * sqrt(n V_cc(theta)). Test-only.
struct RejectionOracle {
    Family family;
    NaturalParam theta;
    SufficientStat target;
    double eps;

    std::vector<double> draw(CounterRng& rng);

    std::size_t attempts = 0;
    std::size_t accepted = 0;
    double acceptance_rate() const {
        return attempts ? static_cast<double>(accepted) / static_cast<double>(attempts) : 0.0;
    }
};

}  // namespace condfit
