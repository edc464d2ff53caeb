#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "condfit/errors.hpp"
#include "condfit/experiments.hpp"
#include "condfit/report.hpp"

namespace {

using namespace condfit;
using nlohmann::json;

enum ExitCode { kOk = 0, kIo = 1, kParse = 2, kDomain = 3, kConvergence = 4, kDiagnostics = 5 };

struct ChainFlags {
    std::size_t burn_in = 200;
    std::size_t thin = 5;

    ChainConfig config(std::uint64_t seed) const { return {burn_in, thin, seed}; }
};

void add_chain_flags(CLI::App* cmd, ChainFlags& f) {
    cmd->add_option("--burn-in", f.burn_in, "Burn-in sweeps for the conditional chain")->capture_default_str();
    cmd->add_option("--thin", f.thin, "Sweeps between retained conditional datasets")->capture_default_str();
}

NaturalParam parse_theta(const std::vector<double>& v, Family family) {
    if (static_cast<int>(v.size()) != dimension(family)) {
        throw ParseError("--theta needs " + std::to_string(dimension(family)) + " values for " +
                         std::string(family_name(family)));
    }
    Vector t(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) t(static_cast<Eigen::Index>(i)) = v[i];
    return NaturalParam(t);
}

NaturalParam default_theta(Family family) {
    switch (family) {
        case Family::Exponential: return NaturalParam{1.0};
        case Family::Gamma: return NaturalParam{2.0, 1.0};
        case Family::VonMises: return NaturalParam{1.0, 0.0};
    }
    return {};
}

void emit(const std::string& out_path, const json& doc) {
    const std::string text = dump(doc);
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        write_file_atomic(out_path, text);
    }
}

std::string pairs_path_for(const std::string& out_path) {
    if (out_path.empty() || out_path == "-") return "pairs.csv";
    const auto dot = out_path.rfind('.');
    const auto slash = out_path.rfind('/');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    return (has_ext ? out_path.substr(0, dot) : out_path) + "_pairs.csv";
}

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("condfit");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("CONDFIT_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off") {
            spdlog::warn("unknown CONDFIT_LOG level '{}', keeping 'warn'", env);
        } else {
            spdlog::set_level(level);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Goodness-of-fit tests for natural exponential families with bootstrap and conditional P-values"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    std::string family_str = "exponential", stat_str = "cvm", input, out;
    std::uint64_t seed = 0;
    std::size_t B = 999, M = 999;
    unsigned workers = 1;
    ChainFlags chain;
    bool strict = false;
    std::vector<double> theta_v;

    auto* gof = app.add_subcommand("gof", "Fit, compute the statistic, and report P_b and P_c");
    gof->add_option("input", input, "CSV file, one observation per line")->required();
    gof->add_option("--family", family_str, "exponential | gamma | vonmises")->required();
    gof->add_option("--stat", stat_str, "cvm | watson | ad | ks")->capture_default_str();
    gof->add_option("--bootstrap", B, "Bootstrap replicates B")->capture_default_str();
    gof->add_option("--conditional", M, "Conditional replicates M")->capture_default_str();
    gof->add_option("--seed", seed, "Random seed")->required();
    gof->add_option("--workers", workers, "Worker threads")->capture_default_str();
    gof->add_option("--out", out, "Output JSON path (stdout if omitted)");
    gof->add_flag("--strict-diagnostics", strict, "Exit with code 5 when chain diagnostics are violated");
    add_chain_flags(gof, chain);

    std::size_t corr_n = 34, corr_datasets = 200;
    std::string pairs_out;
    auto* corr = app.add_subcommand("reproduce-correlation",
                                    "Correlation of P_b and P_c over von Mises null datasets (Watson U^2)");
    corr->add_option("--n", corr_n, "Sample size")->capture_default_str();
    corr->add_option("--datasets", corr_datasets, "Number of null datasets")->capture_default_str();
    corr->add_option("--theta", theta_v, "Natural parameter (default 1,0)")->delimiter(',');
    corr->add_option("--bootstrap", B, "Bootstrap replicates B")->default_val(500);
    corr->add_option("--conditional", M, "Conditional replicates M")->default_val(500);
    corr->add_option("--seed", seed, "Random seed")->required();
    corr->add_option("--workers", workers, "Worker threads")->capture_default_str();
    corr->add_option("--out", out, "Output JSON path (stdout if omitted)");
    corr->add_option("--pairs", pairs_out, "CSV of per-dataset (P_b, P_c); default derived from --out");
    add_chain_flags(corr, chain);

    std::vector<std::size_t> n_list{20, 50, 100};
    auto* t1 = app.add_subcommand("theorem1-check", "sup |G_n(.|n mu) - H_n(.; theta)| over a list of n");
    t1->add_option("--family", family_str, "exponential | gamma | vonmises")->capture_default_str();
    t1->add_option("--theta", theta_v, "Natural parameter")->delimiter(',');
    t1->add_option("--n-list", n_list, "Sample sizes")->delimiter(',')->capture_default_str();
    t1->add_option("--stat", stat_str, "cvm | watson | ad | ks")->capture_default_str();
    t1->add_option("--bootstrap", B, "Replicates for H_n")->default_val(4000);
    t1->add_option("--conditional", M, "Replicates for G_n")->default_val(4000);
    t1->add_option("--seed", seed, "Random seed")->required();
    t1->add_option("--workers", workers, "Worker threads")->capture_default_str();
    t1->add_option("--out", out, "Output JSON path (stdout if omitted)");
    add_chain_flags(t1, chain);

    auto* rb = app.add_subcommand("rb-estimate", "MLE and approximate Rao-Blackwell shape estimate for Gamma data");
    rb->add_option("input", input, "CSV file, one observation per line")->required();
    rb->add_option("--family", family_str, "must be gamma")->default_val("gamma");
    rb->add_option("--out", out, "Output JSON path (stdout if omitted)");

    bool simple_null = false;
    std::size_t grid = 512, K = 100;
    auto* ld = app.add_subcommand("limit-dist", "Eigenvalues and quantiles of the limiting null law");
    ld->add_option("--family", family_str, "exponential | gamma | vonmises")->capture_default_str();
    ld->add_option("--theta", theta_v, "Natural parameter")->delimiter(',');
    ld->add_option("--stat", stat_str, "cvm | watson")->capture_default_str();
    ld->add_flag("--simple-null", simple_null, "Parameters known: plain Brownian-bridge kernel");
    ld->add_option("--grid", grid, "Nystrom grid size m")->capture_default_str();
    ld->add_option("--K", K, "Number of eigenvalues kept")->capture_default_str();
    ld->add_option("--workers", workers, "Worker threads")->capture_default_str();
    ld->add_option("--out", out, "Output JSON path (stdout if omitted)");

    auto* ec = app.add_subcommand("edgeworth-check", "Edgeworth density and Rao-Blackwell expansion checks");
    ec->add_option("--out", out, "Output JSON path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kParse;
    }

    try {
        if (*gof) {
            experiments::GofConfig cfg;
            cfg.family = parse_family(family_str);
            cfg.kind = parse_stat(stat_str);
            cfg.B = B;
            cfg.M = M;
            cfg.chain = chain.config(seed);
            cfg.seed = seed;
            cfg.workers = workers;
            std::vector<std::string> warnings;
            const auto x = read_sample_file(input, cfg.family, &warnings);
            for (const auto& w : warnings) spdlog::warn("{}", w);
            spdlog::info("gof: n = {}, family = {}, statistic = {}", x.size(), family_str, stat_str);
            const auto report = experiments::run_gof(x, cfg);
            for (const auto& v : report.diagnostics.violations) spdlog::warn("chain diagnostics: {}", v);
            emit(out, to_json(report));
            if (strict && !report.diagnostics.ok()) return kDiagnostics;
        } else if (*corr) {
            experiments::CorrelationConfig cfg;
            cfg.n = corr_n;
            cfg.datasets = corr_datasets;
            cfg.B = B;
            cfg.M = M;
            if (!theta_v.empty()) cfg.theta = parse_theta(theta_v, Family::VonMises);
            cfg.chain = chain.config(seed);
            cfg.seed = seed;
            cfg.workers = workers;
            const auto s = experiments::reproduce_correlation(cfg);
            json doc = experiments::to_json(s);
            doc["seed"] = seed;
            doc["version"] = kVersion;
            const std::string pp = pairs_out.empty() ? pairs_path_for(out) : pairs_out;
            write_file_atomic(pp, experiments::pairs_csv(s));
            doc["pairs_csv"] = pp;
            emit(out, doc);
        } else if (*t1) {
            experiments::Theorem1Config cfg;
            cfg.family = parse_family(family_str);
            cfg.theta = theta_v.empty() ? default_theta(cfg.family) : parse_theta(theta_v, cfg.family);
            cfg.n_list = n_list;
            cfg.kind = parse_stat(stat_str);
            cfg.B = B;
            cfg.M = M;
            cfg.chain = chain.config(seed);
            cfg.seed = seed;
            cfg.workers = workers;
            json doc = experiments::to_json(experiments::theorem1_check(cfg));
            doc["family"] = family_name(cfg.family);
            doc["seed"] = seed;
            doc["version"] = kVersion;
            emit(out, doc);
        } else if (*rb) {
            if (parse_family(family_str) != Family::Gamma) throw DomainError("rb-estimate supports the Gamma family only");
            const auto x = read_sample_file(input, Family::Gamma);
            json doc = experiments::to_json(experiments::rb_estimate(x));
            doc["version"] = kVersion;
            emit(out, doc);
        } else if (*ld) {
            experiments::LimitDistConfig cfg;
            cfg.family = parse_family(family_str);
            cfg.theta = theta_v.empty() ? default_theta(cfg.family) : parse_theta(theta_v, cfg.family);
            cfg.kind = parse_stat(stat_str);
            cfg.estimated = !simple_null;
            cfg.grid = grid;
            cfg.K = K;
            cfg.workers = workers;
            json doc = experiments::to_json(experiments::limit_dist(cfg));
            doc["version"] = kVersion;
            emit(out, doc);
        } else if (*ec) {
            const auto check = experiments::edgeworth_check();
            json doc = check.details;
            doc["ok"] = check.ok;
            doc["version"] = kVersion;
            emit(out, doc);
            if (!check.ok) return kDiagnostics;
        }
    } catch (const ParseError& e) {
        spdlog::error("{}", e.what());
        return kParse;
    } catch (const DomainError& e) {
        spdlog::error("{}", e.what());
        return kDomain;
    } catch (const ConvergenceError& e) {
        spdlog::error("{}", e.what());
        return kConvergence;
    } catch (const DiagnosticsError& e) {
        spdlog::error("{}", e.what());
        return kDiagnostics;
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kIo;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kIo;
    }
    return kOk;
}
