#pragma once

#include <stdexcept>
#include <string>

namespace condfit {

// Error classes map onto the CLI exit codes (1 I/O, 2 parse, 3 domain,
// 4 non-convergence, 5 diagnostics).

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DiagnosticsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace condfit
