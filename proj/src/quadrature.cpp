#include "condfit/quadrature.hpp"

#include <cmath>

namespace condfit::quad {

namespace {

struct Recursion {
    const std::function<double(double)>& f;
    bool converged = true;
    double error = 0.0;

    double step(double a, double b, double fa, double fm, double fb, double whole, double tol,
                int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double diff = left + right - whole;
        if (depth <= 0) {
            converged = false;
            error += std::abs(diff) / 15.0;
            return left + right + diff / 15.0;
        }
        if (std::abs(diff) <= 15.0 * tol) {
            error += std::abs(diff) / 15.0;
            return left + right + diff / 15.0;
        }
        return step(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               step(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
};

}  // namespace

QuadResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                            double abs_tol, int panels, int max_depth) {
    QuadResult out;
    if (a == b) {
        return out;
    }
    if (panels < 1) panels = 1;
    Recursion rec{f};
    const double h = (b - a) / panels;
    const double panel_tol = abs_tol / panels;
    double lo = a;
    double flo = f(lo);
    for (int p = 0; p < panels; ++p) {
        const double hi = (p + 1 == panels) ? b : a + (p + 1) * h;
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        const double fhi = f(hi);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        out.value += rec.step(lo, hi, flo, fmid, fhi, whole, panel_tol, max_depth);
        lo = hi;
        flo = fhi;
    }
    out.error_estimate = rec.error;
    out.converged = rec.converged;
    return out;
}

}  // namespace condfit::quad
