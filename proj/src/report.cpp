#include "condfit/report.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>

#include "condfit/errors.hpp"

namespace condfit {

using nlohmann::json;

json to_json(const PValue& p) {
    return {{"estimate", p.estimate},
            {"mc_se", p.mc_se},
            {"replicates", p.replicates},
            {"seed", p.seed},
            {"method", p.method}};
}

json to_json(const ChainDiagnostics& d) {
    return {{"exact", d.exact},
            {"acceptance_rate", d.acceptance_rate},
            {"effective_sample_size", d.effective_sample_size},
            {"retained", d.retained},
            {"infeasible_moves", d.infeasible_moves},
            {"numerical_failures", d.numerical_failures},
            {"max_constraint_residual", d.max_constraint_residual},
            {"violations", d.violations}};
}

json to_json(const GofReport& r) {
    return {{"schema_version", r.schema_version},
            {"version", r.version},
            {"family", r.family},
            {"statistic", r.statistic},
            {"n", r.n},
            {"theta_hat", r.theta_hat},
            {"statistic_value", r.statistic_value},
            {"p_bootstrap", to_json(r.p_bootstrap)},
            {"bootstrap_redraws", r.bootstrap_redraws},
            {"p_conditional", to_json(r.p_conditional)},
            {"chain", {{"burn_in", r.chain.burn_in}, {"thin", r.chain.thin}, {"seed", r.chain.seed}}},
            {"diagnostics", to_json(r.diagnostics)},
            {"seed", r.seed}};
}

PValue pvalue_from_json(const json& j) {
    PValue p;
    p.estimate = j.at("estimate").get<double>();
    p.mc_se = j.at("mc_se").get<double>();
    p.replicates = j.at("replicates").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.method = j.at("method").get<std::string>();
    return p;
}

ChainDiagnostics diagnostics_from_json(const json& j) {
    ChainDiagnostics d;
    d.exact = j.at("exact").get<bool>();
    d.acceptance_rate = j.at("acceptance_rate").get<double>();
    d.effective_sample_size = j.at("effective_sample_size").get<double>();
    d.retained = j.at("retained").get<std::size_t>();
    d.infeasible_moves = j.at("infeasible_moves").get<std::size_t>();
    d.numerical_failures = j.at("numerical_failures").get<std::size_t>();
    d.max_constraint_residual = j.at("max_constraint_residual").get<double>();
    d.violations = j.at("violations").get<std::vector<std::string>>();
    return d;
}

GofReport report_from_json(const json& j) {
    try {
        GofReport r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kReportSchemaVersion) {
            throw ParseError("unsupported report schema_version " + std::to_string(r.schema_version));
        }
        r.version = j.at("version").get<std::string>();
        r.family = j.at("family").get<std::string>();
        r.statistic = j.at("statistic").get<std::string>();
        r.n = j.at("n").get<std::size_t>();
        r.theta_hat = j.at("theta_hat").get<std::vector<double>>();
        r.statistic_value = j.at("statistic_value").get<double>();
        r.p_bootstrap = pvalue_from_json(j.at("p_bootstrap"));
        r.bootstrap_redraws = j.at("bootstrap_redraws").get<std::size_t>();
        r.p_conditional = pvalue_from_json(j.at("p_conditional"));
        const auto& c = j.at("chain");
        r.chain.burn_in = c.at("burn_in").get<std::size_t>();
        r.chain.thin = c.at("thin").get<std::size_t>();
        r.chain.seed = c.at("seed").get<std::uint64_t>();
        r.diagnostics = diagnostics_from_json(j.at("diagnostics"));
        r.seed = j.at("seed").get<std::uint64_t>();
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out << contents;
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw IoError("write failed for " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot move output into place at " + path);
    }
}

}  // namespace condfit

namespace condfit {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno == 0 && std::isfinite(out);
}

}  // namespace

std::vector<double> read_sample_csv(std::istream& in, Family family, std::vector<std::string>* warnings) {
    std::vector<double> x;
    std::string line;
    std::size_t lineno = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string field = trim(line);
        if (field.empty()) continue;
        double v = 0.0;
        if (!parse_double(field, v)) {
            if (!seen_content && field.find_first_of("0123456789") == std::string::npos) {
                seen_content = true;  // header
                continue;
            }
            throw ParseError("line " + std::to_string(lineno) + ": not a number: '" + field + "'");
        }
        seen_content = true;
        if (family == Family::VonMises && (v < 0.0 || v >= 2.0 * std::numbers::pi)) {
            const double r = std::fmod(std::fmod(v, 2.0 * std::numbers::pi) + 2.0 * std::numbers::pi,
                                       2.0 * std::numbers::pi);
            if (warnings) {
                warnings->push_back("line " + std::to_string(lineno) + ": angle " + field +
                                    " reduced modulo 2 pi");
            }
            v = r >= 2.0 * std::numbers::pi ? 0.0 : r;
        }
        x.push_back(v);
    }
    if (x.empty()) throw ParseError("no observations found");
    return x;
}

std::vector<double> read_sample_file(const std::string& path, Family family, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input file " + path);
    return read_sample_csv(in, family, warnings);
}

}  // namespace condfit
