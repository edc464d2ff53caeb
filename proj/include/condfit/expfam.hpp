#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "condfit/rng.hpp"

namespace condfit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// The three natural exponential families f(x; theta) = c(x) exp{theta'T(x) - kappa(theta)}:
//   Exponential  T(x) = -x                 theta > 0
//   Gamma        T(x) = (log x, -x)        theta = (shape, rate), both > 0
//   VonMises     T(x) = (cos x, sin x)     theta in R^2, x in [0, 2 pi)
enum class Family { Exponential, Gamma, VonMises };

std::string_view family_name(Family family);
Family parse_family(std::string_view name);
int dimension(Family family);

struct NaturalParam {
    Vector value;

    NaturalParam() = default;
    explicit NaturalParam(Vector v) : value(std::move(v)) {}
    NaturalParam(std::initializer_list<double> v) : value(static_cast<Eigen::Index>(v.size())) {
        Eigen::Index i = 0;
        for (double x : v) value(i++) = x;
    }

    int size() const { return static_cast<int>(value.size()); }
    double operator[](int i) const { return value(i); }
};

struct SufficientStat {
    Vector t;
    std::size_t n = 0;
};

// Symmetric k x k x k tensor of third cumulants kappa_ijk.
class ThirdCumulants {
public:
    ThirdCumulants() = default;
    explicit ThirdCumulants(int k) : k_(k), data_(static_cast<std::size_t>(k * k * k), 0.0) {}

    int dim() const { return k_; }
    double operator()(int i, int j, int l) const { return data_[index(i, j, l)]; }
    double& operator()(int i, int j, int l) { return data_[index(i, j, l)]; }

private:
    std::size_t index(int i, int j, int l) const {
        return static_cast<std::size_t>((i * k_ + j) * k_ + l);
    }
    int k_ = 0;
    std::vector<double> data_;
};

struct MomentStructure {
    Vector mean;       // mu = grad kappa
    Matrix cov;        // V = Hessian of kappa (Fisher information)
    Matrix precision;  // D = V^{-1}
    ThirdCumulants kappa3;
};

bool in_parameter_space(Family family, const NaturalParam& theta);
void require_parameter(Family family, const NaturalParam& theta);

// Sample space membership; von Mises angles must lie in [0, 2 pi).
bool in_sample_space(Family family, double x);
void validate_sample(Family family, std::span<const double> sample);

// T(x).
Vector sufficient_transform(Family family, double x);

double cumulant(Family family, const NaturalParam& theta);

// kappa(theta + phi) - kappa(theta): the log moment generating function of T(X_1) at phi.
double cumulant_shift(Family family, const NaturalParam& theta, const Vector& phi);

MomentStructure moment_structure(Family family, const NaturalParam& theta);

double density(Family family, const NaturalParam& theta, double x);
double cdf(Family family, const NaturalParam& theta, double x);
double quantile(Family family, const NaturalParam& theta, double p);

// Integral of the density over [a, b] (a <= b), used to accumulate the PIT of
// sorted data without re-integrating from the origin.
double probability_between(Family family, const NaturalParam& theta, double a, double b);

std::vector<double> sample(Family family, const NaturalParam& theta, std::size_t n, CounterRng& rng);

// Componentwise compensated sum of T(x_i).
SufficientStat sufficient_stat(Family family, std::span<const double> sample);

// Solves grad kappa(theta) = t / n.
NaturalParam mle(Family family, const SufficientStat& stat);
NaturalParam mle(Family family, std::span<const double> sample);

}  // namespace condfit
