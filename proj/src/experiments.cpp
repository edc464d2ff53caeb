#include "condfit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "condfit/bootstrap.hpp"
#include "condfit/edgeworth.hpp"
#include "condfit/errors.hpp"
#include "condfit/mcstats.hpp"
#include "condfit/parallel.hpp"

namespace condfit::experiments {

using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    CounterRng rng(seed, {tag, index});
    return rng();
}

GofReport run_gof(std::span<const double> sample, const GofConfig& cfg) {
    if (cfg.B < 99 || cfg.M < 99) throw DomainError("B and M must be at least 99");
    validate_sample(cfg.family, sample);
    GofReport r;
    r.family = std::string(family_name(cfg.family));
    r.statistic = std::string(stat_name(cfg.kind));
    r.n = sample.size();
    r.seed = cfg.seed;

    const auto boot = bootstrap_pvalue(sample, cfg.family, cfg.kind, {cfg.B, cfg.seed, cfg.workers});
    r.theta_hat.assign(boot.observed.theta_hat.value.data(),
                       boot.observed.theta_hat.value.data() + boot.observed.theta_hat.value.size());
    r.statistic_value = boot.observed.stat.value;
    r.p_bootstrap = boot.p;
    r.bootstrap_redraws = boot.redraws;

    r.chain = cfg.chain;
    r.chain.seed = cfg.seed;
    const auto cond = conditional_pvalue(sample, cfg.family, cfg.kind, cfg.M, r.chain);
    r.p_conditional = cond.p;
    r.diagnostics = cond.diagnostics;
    return r;
}

namespace {

constexpr std::uint64_t kDataTag = 0xda7a;
constexpr std::uint64_t kBootTag = 0xb007;
constexpr std::uint64_t kChainTag = 0xc4a1;
constexpr std::uint64_t kCiTag = 0xc1;

}  // namespace

CorrelationSummary reproduce_correlation(const CorrelationConfig& cfg) {
    if (cfg.B < 99 || cfg.M < 99) throw DomainError("B and M must be at least 99");
    if (cfg.datasets < 3) throw DomainError("reproduce_correlation: need at least 3 datasets");
    const Family fam = Family::VonMises;
    require_parameter(fam, cfg.theta);
    CorrelationSummary s;
    s.n = cfg.n;
    s.datasets = cfg.datasets;
    s.pairs.resize(cfg.datasets);
    std::vector<char> violated(cfg.datasets, 0);
    parallel_for(cfg.datasets, cfg.workers, [&](std::size_t d) {
        CounterRng rng(cfg.seed, {kDataTag, d});
        const auto x = sample(fam, cfg.theta, cfg.n, rng);
        const auto boot = bootstrap_pvalue(x, fam, StatKind::Watson, {cfg.B, derive_seed(cfg.seed, kBootTag, d), 1});
        ChainConfig chain = cfg.chain;
        chain.seed = derive_seed(cfg.seed, kChainTag, d);
        const auto cond = conditional_pvalue(x, fam, StatKind::Watson, cfg.M, chain);
        s.pairs[d] = {boot.p.estimate, cond.p.estimate};
        violated[d] = cond.diagnostics.ok() ? 0 : 1;
    });
    std::vector<double> pb(cfg.datasets), pc(cfg.datasets);
    for (std::size_t d = 0; d < cfg.datasets; ++d) {
        pb[d] = s.pairs[d].first;
        pc[d] = s.pairs[d].second;
        const double diff = std::abs(pb[d] - pc[d]);
        s.max_abs_diff = std::max(s.max_abs_diff, diff);
        s.mean_abs_diff += diff / static_cast<double>(cfg.datasets);
        s.diagnostic_violations += violated[d];
    }
    s.correlation = mc::pearson(pb, pc);

    constexpr std::size_t resamples = 2000;
    std::vector<double> boot_corr;
    boot_corr.reserve(resamples);
    CounterRng rng(cfg.seed, {kCiTag});
    std::vector<double> a(cfg.datasets), b(cfg.datasets);
    for (std::size_t r = 0; r < resamples; ++r) {
        for (std::size_t d = 0; d < cfg.datasets; ++d) {
            const auto k = std::min(cfg.datasets - 1, static_cast<std::size_t>(rng.uniform() * cfg.datasets));
            a[d] = pb[k];
            b[d] = pc[k];
        }
        const double c = mc::pearson(a, b);
        if (std::isfinite(c)) boot_corr.push_back(c);
    }
    std::sort(boot_corr.begin(), boot_corr.end());
    if (!boot_corr.empty()) {
        auto at = [&](double q) {
            const auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(boot_corr.size() - 1)));
            return boot_corr[i];
        };
        s.ci_low = at(0.025);
        s.ci_high = at(0.975);
    }
    return s;
}

Theorem1Result theorem1_check(const Theorem1Config& cfg) {
    require_parameter(cfg.family, cfg.theta);
    if (cfg.n_list.empty()) throw DomainError("theorem1_check: empty n list");
    Theorem1Result out;
    for (std::size_t idx = 0; idx < cfg.n_list.size(); ++idx) {
        const std::size_t n = cfg.n_list[idx];
        const auto H = null_cdf(cfg.family, cfg.theta, n, cfg.kind,
                                {cfg.B, derive_seed(cfg.seed, kBootTag, n), cfg.workers});
        const auto start = fiber_point_at_mean(cfg.family, cfg.theta, n);
        ChainConfig chain = cfg.chain;
        chain.seed = derive_seed(cfg.seed, kChainTag, n);
        auto G = conditional_statistics(cfg.family, start, cfg.kind, cfg.M, chain);
        Theorem1Row row;
        row.n = n;
        row.sup_distance = mc::sup_distance(mc::EmpiricalCdf(G.statistics), H.cdf);
        row.band = mc::dkw_band(cfg.B, cfg.alpha) + mc::dkw_band(cfg.M, cfg.alpha);
        row.diagnostics = std::move(G.diagnostics);
        out.rows.push_back(std::move(row));
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        const auto& p = out.rows[i - 1];
        const auto& c = out.rows[i];
        if (c.sup_distance > p.sup_distance + p.band + c.band) out.nonincreasing = false;
    }
    const auto& last = out.rows.back();
    out.final_within = last.sup_distance <= 0.05 + 2.0 * last.band;
    return out;
}

RbRecord rb_estimate(std::span<const double> gamma_sample) {
    RbRecord r;
    r.n = gamma_sample.size();
    r.theta_hat = mle(Family::Gamma, gamma_sample);
    r.theta_tilde = gamma_shape_rb_estimate(r.theta_hat, r.n);
    return r;
}

LimitDistResult limit_dist(const LimitDistConfig& cfg) {
    const auto grid = make_kernel_grid(cfg.family, cfg.theta, cfg.kind, cfg.grid, cfg.estimated, cfg.workers);
    LimitDistResult out;
    out.spectrum = nystrom_spectrum(grid, cfg.K);
    const auto w = out.spectrum.weights();
    for (double level : {0.90, 0.95, 0.99}) {
        out.quantiles.emplace_back(level, weighted_chisq_quantile(w, level));
    }
    return out;
}

double exponential_edgeworth_error(double theta, std::size_t n) {
    const auto ms = moment_structure(Family::Exponential, NaturalParam{theta});
    const double sd = std::sqrt(ms.cov(0, 0));
    constexpr int points = 8001;
    double sup = 0.0;
    for (int i = 0; i < points; ++i) {
        const double u = sd * (-8.0 + 16.0 * i / (points - 1));
        sup = std::max(sup, std::abs(edgeworth_density_1d(ms, n, u) -
                                     exponential_standardized_density(theta, n, u)));
    }
    return sup;
}

EdgeworthCheck edgeworth_check() {
    EdgeworthCheck out;
    json& d = out.details;

    // Density: the one-term error should scale like 1/n.
    json dens = json::array();
    double prev = 0.0;
    bool scaling_ok = true;
    for (std::size_t n : {10, 20, 40, 80}) {
        const double e = exponential_edgeworth_error(1.0, n);
        json row = {{"n", n}, {"sup_error", e}};
        if (prev > 0.0) {
            row["ratio_to_previous"] = e / prev;
            if (e / prev > 0.6) scaling_ok = false;
        }
        dens.push_back(row);
        prev = e;
    }
    d["edgeworth_density"] = {{"family", "exponential"}, {"theta", 1.0}, {"rows", dens}, {"ok", scaling_ok}};
    out.ok = out.ok && scaling_ok;

    // Expansion against the exact conditional law, theta = 1.
    const auto ms = moment_structure(Family::Exponential, NaturalParam{1.0});
    const auto psi = psi11_coefficients(ms);
    json exp_rows = json::array();
    bool expansion_ok = true;
    for (double x : {0.5, 1.0, 2.0}) {
        const auto in = exponential_indicator_input(1.0, x);
        double ref = 0.0;
        for (std::size_t n : {10, 20, 40, 80}) {
            const auto res = rao_blackwell_expansion(in, ms, psi, n);
            const double exact = exponential_indicator_conditional(1.0, x, n);
            const double scaled = static_cast<double>(n * n) * std::abs(exact - res.A);
            if (n == 10) ref = scaled;
            const bool within = scaled <= 2.0 * ref && scaled >= 0.5 * ref;
            expansion_ok = expansion_ok && within;
            exp_rows.push_back({{"x", x}, {"n", n}, {"exact", exact}, {"A", res.A}, {"R", res.R},
                                {"n2_error", scaled}, {"within_factor_2", within}});
        }
    }
    d["rao_blackwell_expansion"] = {{"rows", exp_rows}, {"ok", expansion_ok}};
    out.ok = out.ok && expansion_ok;

    // Coefficients: general path versus hand reductions.
    const double a1 = ms.kappa3(0, 0, 0) * ms.precision(0, 0) * ms.precision(0, 0) / 2.0;
    const bool k1_ok = psi.a(0) == a1;
    const NaturalParam g{1.0, 1.0};
    const auto gpsi = psi11_coefficients(moment_structure(Family::Gamma, g));
    const auto closed = gamma_psi11_closed_form(g);
    const bool gamma_ok = (gpsi.a - closed).cwiseAbs().maxCoeff() < 1e-10;
    d["psi11"] = {{"exponential_a1", psi.a(0)}, {"exponential_hand", a1}, {"k1_exact", k1_ok},
                  {"gamma_general", {gpsi.a(0), gpsi.a(1)}}, {"gamma_closed_form", {closed(0), closed(1)}},
                  {"gamma_agree", gamma_ok}};
    out.ok = out.ok && k1_ok && gamma_ok;
    return out;
}

json to_json(const CorrelationSummary& s) {
    return {{"n", s.n},
            {"datasets", s.datasets},
            {"correlation", s.correlation},
            {"correlation_ci95", {s.ci_low, s.ci_high}},
            {"max_abs_diff", s.max_abs_diff},
            {"mean_abs_diff", s.mean_abs_diff},
            {"diagnostic_violations", s.diagnostic_violations}};
}

json to_json(const Theorem1Result& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"n", row.n},
                        {"sup_distance", row.sup_distance},
                        {"dkw_band", row.band},
                        {"diagnostics", condfit::to_json(row.diagnostics)}});
    }
    return {{"rows", rows}, {"nonincreasing", r.nonincreasing}, {"final_within", r.final_within}};
}

json to_json(const RbRecord& r) {
    return {{"n", r.n},
            {"theta_hat", std::vector<double>(r.theta_hat.value.data(),
                                              r.theta_hat.value.data() + r.theta_hat.value.size())},
            {"theta_tilde_shape", r.theta_tilde}};
}

json to_json(const LimitDistResult& r) {
    json q = json::array();
    for (const auto& [level, value] : r.quantiles) q.push_back({{"level", level}, {"quantile", value}});
    const auto& ev = r.spectrum.eigenvalues;
    return {{"eigenvalues", std::vector<double>(ev.data(), ev.data() + ev.size())},
            {"tail_mass", r.spectrum.tail_mass},
            {"trace", r.spectrum.trace},
            {"quantiles", q}};
}

std::string pairs_csv(const CorrelationSummary& s) {
    std::ostringstream out;
    out.precision(17);
    out << "dataset,p_bootstrap,p_conditional\n";
    for (std::size_t d = 0; d < s.pairs.size(); ++d) {
        out << d << ',' << s.pairs[d].first << ',' << s.pairs[d].second << '\n';
    }
    return out.str();
}

}  // namespace condfit::experiments
