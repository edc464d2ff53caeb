#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "condfit/asymptotic.hpp"
#include "condfit/conditional.hpp"
#include "condfit/report.hpp"

namespace condfit::experiments {

// Per-task seed derived from a run seed and a task index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

struct GofConfig {
    Family family = Family::Exponential;
    StatKind kind = StatKind::CramerVonMises;
    std::size_t B = 999;
    std::size_t M = 999;
    ChainConfig chain;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

GofReport run_gof(std::span<const double> sample, const GofConfig& cfg);

struct CorrelationConfig {
    std::size_t n = 34;
    std::size_t datasets = 200;
    std::size_t B = 500;
    std::size_t M = 500;
    NaturalParam theta{1.0, 0.0};
    ChainConfig chain;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct CorrelationSummary {
    std::size_t n = 0;
    std::size_t datasets = 0;
    double correlation = 0.0;
    double ci_low = 0.0, ci_high = 0.0;  // 95% percentile bootstrap over datasets
    double max_abs_diff = 0.0;           // max_d |P_c - P_b|
    double mean_abs_diff = 0.0;
    std::size_t diagnostic_violations = 0;  // datasets whose chain reported a violation
    std::vector<std::pair<double, double>> pairs;  // (P_b, P_c) per dataset
};

// von Mises null, Watson U^2.
CorrelationSummary reproduce_correlation(const CorrelationConfig& cfg);

struct Theorem1Config {
    Family family = Family::Exponential;
    NaturalParam theta{1.0};
    std::vector<std::size_t> n_list{20, 50, 100};
    StatKind kind = StatKind::CramerVonMises;
    std::size_t B = 4000;
    std::size_t M = 4000;
    double alpha = 0.05;  // DKW band level
    ChainConfig chain;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

struct Theorem1Row {
    std::size_t n = 0;
    double sup_distance = 0.0;  // sup |G_n(.|n mu) - H_n(.; theta)|, both estimated
    double band = 0.0;          // DKW half-width for B plus that for M
    ChainDiagnostics diagnostics;
};

struct Theorem1Result {
    std::vector<Theorem1Row> rows;
    bool nonincreasing = true;  // d_{i+1} <= d_i + band_i + band_{i+1}
    bool final_within = true;   // last d <= 0.05 + 2 band
};

Theorem1Result theorem1_check(const Theorem1Config& cfg);

struct RbRecord {
    std::size_t n = 0;
    NaturalParam theta_hat;
    double theta_tilde = 0.0;
};

RbRecord rb_estimate(std::span<const double> gamma_sample);

struct LimitDistConfig {
    Family family = Family::Exponential;
    NaturalParam theta{1.0};
    StatKind kind = StatKind::CramerVonMises;
    bool estimated = true;  // false: simple null, plain bridge kernel
    std::size_t grid = 512;
    std::size_t K = 100;
    unsigned workers = 1;
};

struct LimitDistResult {
    Spectrum spectrum;
    std::vector<std::pair<double, double>> quantiles;  // (level, quantile)
};

LimitDistResult limit_dist(const LimitDistConfig& cfg);

// Edgeworth density and Rao-Blackwell expansion checks against exact
// Exponential-family results. `ok` summarises every check.
struct EdgeworthCheck {
    nlohmann::json details;
    bool ok = true;
};

EdgeworthCheck edgeworth_check();

// sup_u |edgeworth - exact| for the standardized Exponential sum on a fine grid.
double exponential_edgeworth_error(double theta, std::size_t n);

nlohmann::json to_json(const CorrelationSummary& s);
nlohmann::json to_json(const Theorem1Result& r);
nlohmann::json to_json(const RbRecord& r);
nlohmann::json to_json(const LimitDistResult& r);

std::string pairs_csv(const CorrelationSummary& s);

}  // namespace condfit::experiments
