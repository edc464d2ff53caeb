#pragma once

#include <functional>

namespace condfit::quad {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

// Adaptive Simpson with Richardson correction. The interval is first cut
// into `panels` equal pieces so that narrow features are not stepped over;
// the absolute tolerance is shared among the panels.
QuadResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                            double abs_tol, int panels = 1, int max_depth = 48);

}  // namespace condfit::quad
