#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "condfit/bootstrap.hpp"
#include "condfit/conditional.hpp"

namespace condfit {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kVersion = "condfit 0.1.0";

struct GofReport {
    int schema_version = kReportSchemaVersion;
    std::string version = kVersion;
    std::string family;
    std::string statistic;
    std::size_t n = 0;
    std::vector<double> theta_hat;
    double statistic_value = 0.0;
    PValue p_bootstrap;
    std::size_t bootstrap_redraws = 0;
    PValue p_conditional;
    ChainConfig chain;
    ChainDiagnostics diagnostics;
    std::uint64_t seed = 0;
};

nlohmann::json to_json(const PValue& p);
nlohmann::json to_json(const ChainDiagnostics& d);
nlohmann::json to_json(const GofReport& r);

PValue pvalue_from_json(const nlohmann::json& j);
ChainDiagnostics diagnostics_from_json(const nlohmann::json& j);
GofReport report_from_json(const nlohmann::json& j);

// Pretty-printed document with a trailing newline.
std::string dump(const nlohmann::json& j);

// Writes to a temporary sibling and renames, so a failed run leaves no file.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace condfit

namespace condfit {

// One observation per line, optional non-numeric header on the first line,
// blank lines ignored. von Mises angles are reduced modulo 2 pi; each
// reduction is reported through `warnings`.
std::vector<double> read_sample_csv(std::istream& in, Family family, std::vector<std::string>* warnings = nullptr);
std::vector<double> read_sample_file(const std::string& path, Family family,
                                     std::vector<std::string>* warnings = nullptr);

}  // namespace condfit
