#include "condfit/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "condfit/errors.hpp"
#include "condfit/mcstats.hpp"

namespace condfit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kChainStream = 0xc4a1;
constexpr std::uint64_t kExactStream = 0xe4ac7;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;
    return a;
}

// Offset of a from c in (-pi, pi].
double signed_offset(double a, double c) {
    double d = std::remainder(a - c, kTwoPi);
    if (d <= -kPi) d += kTwoPi;
    return d;
}

}  // namespace

ConstraintState::ConstraintState(Family family, std::vector<double> data)
    : family_(family), data_(std::move(data)) {
    validate_sample(family_, data_);
    target_ = sufficient_stat(family_, data_);
}

double ConstraintState::residual() const {
    const auto now = sufficient_stat(family_, data_);
    const double scale = std::max(target_.t.lpNorm<Eigen::Infinity>(), 1.0);
    return (now.t - target_.t).lpNorm<Eigen::Infinity>() / scale;
}

GammaTripleFiber gamma_triple_fiber(double s3, double p3) {
    GammaTripleFiber f;
    const double c = 4.0 * p3 / (s3 * s3 * s3);
    if (!(c > 0.0) || !(c < 4.0 / 27.0)) {
        return f;
    }
    // Roots of w^3 - 2w^2 + w - c by the trigonometric formula, then polished.
    const double phi = std::acos(std::clamp(13.5 * c - 1.0, -1.0, 1.0));
    auto root = [phi](int k) { return 2.0 / 3.0 + 2.0 / 3.0 * std::cos(phi / 3.0 - 2.0 * kPi * k / 3.0); };
    auto polish = [c](double w) {
        for (int it = 0; it < 3; ++it) {
            const double h = w * (1.0 - w) * (1.0 - w) - c;
            const double dh = (1.0 - w) * (1.0 - 3.0 * w);
            if (dh == 0.0) break;
            w -= h / dh;
        }
        return w;
    };
    f.lo = polish(root(2));
    f.hi = polish(root(1));
    f.third = 2.0 - f.lo - f.hi;
    f.feasible = f.lo > 0.0 && f.hi < 1.0 && f.hi - f.lo > 1e-14;
    return f;
}

double gamma_fiber_density(const GammaTripleFiber& fiber, double w) {
    if (!fiber.feasible || w <= fiber.lo || w >= fiber.hi) return 0.0;
    return 1.0 / std::sqrt(w * (w - fiber.lo) * (fiber.hi - w) * (fiber.third - w));
}

double arcsine_density(double lo, double hi, double w) {
    if (w <= lo || w >= hi) return 0.0;
    return 1.0 / (kPi * std::sqrt((w - lo) * (hi - w)));
}

VonMisesTripleFiber vonmises_triple_fiber(double rx, double ry) {
    VonMisesTripleFiber f;
    f.resultant = std::hypot(rx, ry);
    f.direction = std::atan2(ry, rx);
    if (f.resultant <= 1.0) {
        f.full_circle = true;
        f.half_width = kPi;
    } else {
        f.full_circle = false;
        const double R = f.resultant;
        f.half_width = std::acos(std::clamp((R * R - 3.0) / (2.0 * R), -1.0, 1.0));
    }
    return f;
}

namespace {

double vm_w_norm(const VonMisesTripleFiber& f, double d) {
    const double R = f.resultant;
    return std::sqrt(std::max(0.0, R * R + 1.0 - 2.0 * R * std::cos(d)));
}

// Target / proposal up to a constant, in the offset d = a - arg r.
double vm_ratio(const VonMisesTripleFiber& f, double d) {
    const double w = vm_w_norm(f, d);
    if (w <= 0.0) return 0.0;
    if (f.full_circle) {
        return 1.0 / (w * std::sqrt(std::max(0.0, 4.0 - w * w)));
    }
    const double h = f.half_width;
    d = std::clamp(d, -h, h);
    const double sp = std::sin(0.5 * (h + d));
    const double sm = std::sin(0.5 * (h - d));
    if (sp <= 0.0 || sm <= 0.0) {
        // Limit at an arc endpoint: (h -+ d) / sin((h -+ d)/2) -> 2.
        const double other = sp <= 0.0 ? sm : sp;
        const double span = sp <= 0.0 ? (h - d) : (h + d);
        return std::sqrt(2.0 * span / other) / w;
    }
    return std::sqrt((h - d) * (h + d) / (sp * sm)) / w;
}

}  // namespace

double vonmises_fiber_density(const VonMisesTripleFiber& fiber, double a) {
    const double d = signed_offset(a, fiber.direction);
    if (!fiber.full_circle && std::abs(d) >= fiber.half_width) return 0.0;
    const double w = vm_w_norm(fiber, d);
    const double inner = 1.0 - 0.25 * w * w;
    if (w <= 0.0 || inner <= 0.0) return 0.0;
    return 1.0 / (w * std::sqrt(inner));
}

double vonmises_proposal_density(const VonMisesTripleFiber& fiber, double a) {
    if (fiber.full_circle) return 1.0 / kTwoPi;
    const double d = signed_offset(a, fiber.direction);
    return arcsine_density(-fiber.half_width, fiber.half_width, d);
}

double mh_acceptance(double target_from, double proposal_from, double target_to, double proposal_to) {
    if (target_to <= 0.0 || proposal_to <= 0.0) return 0.0;
    if (target_from <= 0.0 || proposal_from <= 0.0) return 1.0;
    return std::min(1.0, (target_to * proposal_from) / (target_from * proposal_to));
}

namespace {

bool gamma_triple_move(std::vector<double>& x, std::size_t i, std::size_t j, std::size_t k, CounterRng& rng,
                       MoveStats& stats) {
    const double s3 = x[i] + x[j] + x[k];
    const double p3 = x[i] * x[j] * x[k];
    const auto fiber = gamma_triple_fiber(s3, p3);
    if (!fiber.feasible) {
        ++stats.infeasible;
        return false;
    }
    const double mid = 0.5 * (fiber.lo + fiber.hi);
    const double half = 0.5 * (fiber.hi - fiber.lo);
    const double w_new = mid + half * std::cos(kPi * rng.uniform());
    const double w_cur = x[i] / s3;
    // target / arcsine proposal = 1 / sqrt(w (third - w)), up to a constant.
    auto ratio = [&](double w) { return 1.0 / std::sqrt(w * (fiber.third - w)); };
    const double alpha = std::min(1.0, ratio(w_new) / ratio(w_cur));
    const bool swap = rng.uniform() < 0.5;
    if (rng.uniform() >= alpha) {
        return false;
    }
    const double disc = (w_new - fiber.lo) * (fiber.hi - w_new) * (fiber.third - w_new) / w_new;
    if (!(disc >= 0.0) || !(w_new > 0.0)) {
        ++stats.numerical_failures;
        return false;
    }
    const double v = s3 * w_new;
    const double y1 = 0.5 * s3 * ((1.0 - w_new) + std::sqrt(disc));
    const double y2 = p3 / (v * y1);
    if (!(y1 > 0.0) || !(y2 > 0.0) || !std::isfinite(y1) || !std::isfinite(y2)) {
        ++stats.numerical_failures;
        return false;
    }
    x[i] = v;
    x[j] = swap ? y2 : y1;
    x[k] = swap ? y1 : y2;
    return true;
}

bool vonmises_triple_move(std::vector<double>& x, std::size_t i, std::size_t j, std::size_t k,
                          CounterRng& rng, MoveStats& stats) {
    const double rx = std::cos(x[i]) + std::cos(x[j]) + std::cos(x[k]);
    const double ry = std::sin(x[i]) + std::sin(x[j]) + std::sin(x[k]);
    const auto fiber = vonmises_triple_fiber(rx, ry);
    if (fiber.resultant >= 3.0 - 1e-12) {
        ++stats.infeasible;
        return false;
    }
    const double d_new = fiber.full_circle ? kTwoPi * rng.uniform() - kPi
                                           : fiber.half_width * std::cos(kPi * rng.uniform());
    const double d_cur = signed_offset(x[i], fiber.direction);
    const double r_new = vm_ratio(fiber, d_new);
    const double r_cur = vm_ratio(fiber, d_cur);
    const double alpha = r_cur > 0.0 ? std::min(1.0, r_new / r_cur) : 1.0;
    const bool swap = rng.uniform() < 0.5;
    if (rng.uniform() >= alpha) {
        return false;
    }
    const double a = fiber.direction + d_new;
    const double wx = rx - std::cos(a);
    const double wy = ry - std::sin(a);
    const double wn = std::hypot(wx, wy);
    if (!(wn > 1e-300) || wn > 2.0 + 1e-12) {
        ++stats.numerical_failures;
        return false;
    }
    const double phi = std::atan2(wy, wx);
    const double beta = std::acos(std::min(1.0, 0.5 * wn));
    x[i] = wrap_angle(a);
    x[j] = wrap_angle(swap ? phi - beta : phi + beta);
    x[k] = wrap_angle(swap ? phi + beta : phi - beta);
    return true;
}

}  // namespace

bool triple_move(ConstraintState& state, std::size_t i, std::size_t j, std::size_t k, CounterRng& rng,
                 MoveStats& stats) {
    auto& x = state.data();
    if (i == j || i == k || j == k || i >= x.size() || j >= x.size() || k >= x.size()) {
        throw DomainError("triple_move: indices must be distinct and in range");
    }
    ++stats.attempted;
    bool accepted = false;
    switch (state.family()) {
        case Family::Gamma: accepted = gamma_triple_move(x, i, j, k, rng, stats); break;
        case Family::VonMises: accepted = vonmises_triple_move(x, i, j, k, rng, stats); break;
        case Family::Exponential:
            throw DomainError("triple_move: the Exponential family is sampled exactly");
    }
    if (accepted) ++stats.accepted;
    return accepted;
}

TripleMoveChain::TripleMoveChain(ConstraintState state, CounterRng rng)
    : state_(std::move(state)), rng_(rng) {
    if (state_.data().size() < 3) {
        throw DomainError("triple-move chain needs at least three observations");
    }
}

void TripleMoveChain::sweep() {
    const std::size_t n = state_.data().size();
    auto pick = [&] { return std::min(n - 1, static_cast<std::size_t>(rng_.uniform() * n)); };
    for (std::size_t m = 0; m < n; ++m) {
        const std::size_t i = pick();
        std::size_t j, k;
        do j = pick(); while (j == i);
        do k = pick(); while (k == i || k == j);
        triple_move(state_, i, j, k, rng_, stats_);
    }
}

void TripleMoveChain::sweeps(std::size_t count) {
    for (std::size_t s = 0; s < count; ++s) sweep();
}

std::vector<double> exact_conditional_sample_exponential(const SufficientStat& t, CounterRng& rng) {
    const double s = -t.t(0);
    if (!(s > 0.0)) throw DomainError("exact conditional sampler: sum must be positive");
    if (t.n < 2) throw DomainError("exact conditional sampler: need n >= 2");
    std::vector<double> e(t.n);
    double total = 0.0;
    for (auto& v : e) {
        v = -std::log(rng.uniform());
        total += v;
    }
    for (auto& v : e) v = s * (v / total);
    return e;
}

std::vector<double> fiber_point_at_mean(Family family, const NaturalParam& theta, std::size_t n) {
    const auto ms = moment_structure(family, theta);
    const double nd = static_cast<double>(n);
    std::vector<double> x(n);
    switch (family) {
        case Family::Exponential: {
            std::fill(x.begin(), x.end(), -ms.mean(0));
            break;
        }
        case Family::Gamma: {
            // x_i = m * n e^{g z_i} / sum e^{g z}; sum log x decreases in g.
            const double m = -ms.mean(1);
            const double target = nd * (ms.mean(0) - std::log(m));  // sum log(x_i / m) < 0
            std::vector<double> z(n);
            for (std::size_t i = 0; i < n; ++i) z[i] = -1.0 + 2.0 * (i + 0.5) / nd;
            auto fill = [&](double g) {
                double zmax = 0.0;
                for (double v : z) zmax = std::max(zmax, g * v);
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += std::exp(g * z[i] - zmax);
                double logsum = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    x[i] = m * nd * std::exp(g * z[i] - zmax) / s;
                    logsum += std::log(x[i] / m);
                }
                return logsum;
            };
            double lo = 0.0, hi = 1.0;
            while (fill(hi) > target) hi *= 2.0;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (fill(mid) > target ? lo : hi) = mid;
            }
            fill(0.5 * (lo + hi));
            break;
        }
        case Family::VonMises: {
            const double rbar = ms.mean.norm();
            const double dir = std::atan2(ms.mean(1), ms.mean(0));
            std::vector<double> c(n);
            for (std::size_t i = 0; i < n; ++i) c[i] = -kPi + kTwoPi * (i + 0.5) / nd;
            auto resultant = [&](double g) {
                double s = 0.0;
                for (double v : c) s += std::cos(g * v);
                return s / nd;
            };
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
                const double mid = 0.5 * (lo + hi);
                (resultant(mid) > rbar ? lo : hi) = mid;
            }
            const double g = 0.5 * (lo + hi);
            for (std::size_t i = 0; i < n; ++i) x[i] = wrap_angle(dir + g * c[i]);
            break;
        }
    }
    return x;
}

ConditionalDraws conditional_statistics(Family family, const std::vector<double>& start, StatKind kind,
                                        std::size_t M, const ChainConfig& config) {
    validate_sample(family, start);
    ConditionalDraws out;
    out.statistics.assign(M, 0.0);
    auto& diag = out.diagnostics;
    diag.retained = M;

    if (family == Family::Exponential) {
        diag.exact = true;
        const auto t = sufficient_stat(family, start);
        std::vector<double> residuals(M, 0.0);
        for (std::size_t m = 0; m < M; ++m) {
            CounterRng rng(config.seed, {kExactStream, m});
            const auto x = exact_conditional_sample_exponential(t, rng);
            const double s = -sufficient_stat(family, x).t(0);
            residuals[m] = std::abs(s + t.t(0)) / std::abs(t.t(0));
            out.statistics[m] = test_statistic(kind, family, x).stat.value;
        }
        diag.max_constraint_residual = *std::max_element(residuals.begin(), residuals.end());
        diag.effective_sample_size = static_cast<double>(M);
    } else {
        TripleMoveChain chain(ConstraintState(family, start), CounterRng(config.seed, {kChainStream}));
        chain.sweeps(config.burn_in);
        for (std::size_t m = 0; m < M; ++m) {
            chain.sweeps(std::max<std::size_t>(config.thin, 1));
            const auto& x = chain.state().data();
            diag.max_constraint_residual = std::max(diag.max_constraint_residual, chain.state().residual());
            out.statistics[m] = test_statistic(kind, family, x).stat.value;
        }
        diag.acceptance_rate = chain.stats().acceptance_rate();
        diag.infeasible_moves = chain.stats().infeasible;
        diag.numerical_failures = chain.stats().numerical_failures;
        diag.effective_sample_size = mc::effective_sample_size(out.statistics);
        if (diag.acceptance_rate < 0.05 || diag.acceptance_rate > 0.95) {
            diag.violations.push_back("acceptance rate " + std::to_string(diag.acceptance_rate) +
                                      " outside [0.05, 0.95]");
        }
        if (diag.effective_sample_size < static_cast<double>(M) / 10.0) {
            diag.violations.push_back("effective sample size " + std::to_string(diag.effective_sample_size) +
                                      " below M/10");
        }
    }
    if (diag.max_constraint_residual > 1e-9) {
        diag.violations.push_back("conditioning statistic drifted by " +
                                  std::to_string(diag.max_constraint_residual));
    }
    return out;
}

ConditionalResult conditional_pvalue(std::span<const double> sample, Family family, StatKind kind,
                                     std::size_t M, const ChainConfig& config) {
    if (M < 99) throw DomainError("conditional_pvalue: at least 99 conditional datasets required");
    ConditionalResult out{test_statistic(kind, family, sample), {}, {}};
    const std::vector<double> start(sample.begin(), sample.end());
    auto draws = conditional_statistics(family, start, kind, M, config);
    out.p = add_one_pvalue(out.observed.stat.value, draws.statistics, config.seed,
                           draws.diagnostics.exact ? "exact-conditional" : "mcmc-conditional");
    out.diagnostics = std::move(draws.diagnostics);
    return out;
}

std::vector<double> RejectionOracle::draw(CounterRng& rng) {
    if (!(eps > 0.0)) throw DomainError("rejection oracle: eps must be positive");
    const auto ms = moment_structure(family, theta);
    const double nd = static_cast<double>(target.n);
    const Vector scale = (nd * ms.cov.diagonal()).cwiseSqrt() * eps;
    const std::size_t budget = attempts + 100'000'000;
    while (attempts < budget) {
        ++attempts;
        auto x = sample(family, theta, target.n, rng);
        const auto t = sufficient_stat(family, x);
        if (((t.t - target.t).cwiseAbs().array() <= scale.array()).all()) {
            ++accepted;
            return x;
        }
        if (attempts >= 1'000'000 && acceptance_rate() < 1e-6) {
            throw DiagnosticsError("rejection oracle: acceptance rate below 1e-6");
        }
    }
    throw DiagnosticsError("rejection oracle: draw budget exhausted");
}

}  // namespace condfit
