#include "condfit/edgeworth.hpp"

#include <cmath>
#include <numbers>

#include "condfit/errors.hpp"
#include "condfit/special.hpp"

namespace condfit {

Psi11 psi11_coefficients(const MomentStructure& ms) {
    const int k = static_cast<int>(ms.mean.size());
    const Matrix& D = ms.precision;
    const auto& kap = ms.kappa3;
    Psi11 out{Vector::Zero(k)};
    for (int l = 0; l < k; ++l) {
        double a = 0.0;
        for (int i = 0; i < k; ++i) {
            a += kap(i, i, i) * D(i, i) * D(i, l) / 2.0;
        }
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                if (i == j) continue;
                a += kap(i, i, j) * (2.0 * D(i, j) * D(i, l) + D(i, i) * D(j, l)) / 2.0;
            }
        }
        for (int i = 0; i < k; ++i) {
            for (int j = i + 1; j < k; ++j) {
                for (int m = j + 1; m < k; ++m) {
                    a += kap(i, j, m) * (D(i, j) * D(m, l) + D(i, m) * D(j, l) + D(j, m) * D(i, l));
                }
            }
        }
        out.a(l) = a;
    }
    return out;
}

Vector gamma_psi11_closed_form(const NaturalParam& theta) {
    require_parameter(Family::Gamma, theta);
    const double a = theta[0], b = theta[1];
    const double t1 = special::trigamma(a), t2 = special::tetragamma(a);
    const double delta = a * t1 - 1.0;
    Vector out(2);
    out(0) = (a * a * t2 - a * t1 + 2.0) / (2.0 * delta * delta);
    out(1) = b * (a * t2 - 2.0 * a * t1 * t1 + 3.0 * t1) / (2.0 * delta * delta);
    return out;
}

ExpansionResult rao_blackwell_expansion(const ExpansionInput& input, const MomentStructure& ms,
                                        const Psi11& psi, std::size_t n) {
    if (n <= input.m) throw DomainError("rao_blackwell_expansion: need n > m");
    const auto k = ms.cov.rows();
    if (input.gradient.size() != k || input.hessian.rows() != k || input.hessian.cols() != k) {
        throw DomainError("rao_blackwell_expansion: derivative dimensions do not match the family");
    }
    if (!ms.precision.allFinite()) throw DomainError("rao_blackwell_expansion: singular covariance");
    ExpansionResult out;
    out.R = -0.5 * (input.hessian * ms.precision).trace() - psi(input.gradient);
    out.A = input.value + out.R / static_cast<double>(n);
    return out;
}

ExpansionInput finite_difference_input(const std::function<double(const NaturalParam&)>& expectation,
                                       const NaturalParam& theta, std::size_t m) {
    const int k = theta.size();
    ExpansionInput in;
    in.m = m;
    in.value = expectation(theta);
    in.gradient = Vector::Zero(k);
    in.hessian = Matrix::Zero(k, k);
    Vector h(k);
    for (int j = 0; j < k; ++j) h(j) = 1e-4 * std::max(std::abs(theta[j]), 1.0);
    auto at = [&](int i, double si, int j, double sj) {
        Vector v = theta.value;
        v(i) += si * h(i);
        v(j) += sj * h(j);
        return expectation(NaturalParam(v));
    };
    for (int i = 0; i < k; ++i) {
        const double fp = at(i, 1.0, i, 0.0), fm = at(i, -1.0, i, 0.0);
        in.gradient(i) = (fp - fm) / (2.0 * h(i));
        in.hessian(i, i) = (fp - 2.0 * in.value + fm) / (h(i) * h(i));
        for (int j = i + 1; j < k; ++j) {
            const double v = (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) /
                             (4.0 * h(i) * h(j));
            in.hessian(i, j) = in.hessian(j, i) = v;
        }
    }
    return in;
}

ExpansionInput exponential_indicator_input(double theta, double x) {
    require_parameter(Family::Exponential, NaturalParam{theta});
    ExpansionInput in;
    in.m = 1;
    const double e = std::exp(-theta * x);
    in.value = -std::expm1(-theta * x);
    in.gradient = Vector::Constant(1, x * e);
    in.hessian = Matrix::Constant(1, 1, -x * x * e);
    return in;
}

double exponential_indicator_conditional(double theta, double x, std::size_t n) {
    if (n < 2) throw DomainError("exponential_indicator_conditional: need n >= 2");
    const double r = x * theta / static_cast<double>(n);
    if (r >= 1.0) return 1.0;
    if (r <= 0.0) return 0.0;
    return -std::expm1(static_cast<double>(n - 1) * std::log1p(-r));
}

double gamma_shape_rb_estimate(const NaturalParam& theta_hat, std::size_t n) {
    require_parameter(Family::Gamma, theta_hat);
    if (n < 2) throw DomainError("gamma_shape_rb_estimate: need n >= 2");
    const auto ms = moment_structure(Family::Gamma, theta_hat);
    ExpansionInput in;
    in.m = 1;
    in.value = theta_hat[0];
    in.gradient = Vector::Unit(2, 0);
    in.hessian = Matrix::Zero(2, 2);
    return rao_blackwell_expansion(in, ms, psi11_coefficients(ms), n).A;
}

double edgeworth_density_1d(const MomentStructure& ms, std::size_t n, double u) {
    if (ms.mean.size() != 1) throw DomainError("edgeworth_density_1d: one-parameter families only");
    if (n < 2) throw DomainError("edgeworth_density_1d: need n >= 2");
    const double V = ms.cov(0, 0);
    const double k3 = ms.kappa3(0, 0, 0);
    const double phi = std::exp(-0.5 * u * u / V) / std::sqrt(2.0 * std::numbers::pi * V);
    const double psi1 = k3 * (u * u * u / (V * V * V) - 3.0 * u / (V * V)) / 6.0;
    return phi * (1.0 + psi1 / std::sqrt(static_cast<double>(n)));
}

double exponential_standardized_density(double theta, std::size_t n, double u) {
    const double nd = static_cast<double>(n);
    const double s = nd / theta - std::sqrt(nd) * u;
    if (s <= 0.0) return 0.0;
    const double log_f = nd * std::log(theta) + (nd - 1.0) * std::log(s) - theta * s - special::log_gamma(nd);
    return std::sqrt(nd) * std::exp(log_f);
}

}  // namespace condfit
