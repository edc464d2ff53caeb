#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "condfit/expfam.hpp"

namespace condfit {

enum class StatKind { CramerVonMises, Watson, AndersonDarling, KolmogorovSmirnov };

std::string_view stat_name(StatKind kind);
StatKind parse_stat(std::string_view name);

// Weight function psi on (0, 1). Only the constant weight is wired through;
// the tag keeps the statistic signatures stable if others are added.
enum class Weight { Constant };

// Sorted probability integral transforms u_(1) <= ... <= u_(n), clamped to
// [1e-15, 1 - 1e-15] so Anderson-Darling's logarithms stay finite.
struct PitVector {
    std::vector<double> u;
    NaturalParam source;

    std::size_t size() const { return u.size(); }
};

inline constexpr double kPitClamp = 1e-15;

PitVector make_pit(std::vector<double> u, NaturalParam source = {});

// u_i = F(x_i; theta_hat), sorted. The von Mises transform measures angles
// from the origin x = 0.
PitVector pit(std::span<const double> sample, Family family, const NaturalParam& theta_hat);

struct StatValue {
    StatKind kind;
    double value;
};

StatValue cvm(const PitVector& u, Weight w = Weight::Constant);
StatValue watson(const PitVector& u, Weight w = Weight::Constant);
StatValue anderson_darling(const PitVector& u);
StatValue kolmogorov_smirnov(const PitVector& u);

StatValue compute_statistic(StatKind kind, const PitVector& u);

// Fits theta by maximum likelihood, transforms and evaluates the statistic.
struct TestStatistic {
    StatValue stat;
    NaturalParam theta_hat;
    PitVector pit;
};

TestStatistic test_statistic(StatKind kind, Family family, std::span<const double> sample);

struct SpectralCoefficients {
    std::vector<double> U;  // U_{n,1..K}
    Weight weight = Weight::Constant;

    std::size_t order() const { return U.size(); }
    double partial_sum_of_squares() const;
};

// U_{n,j} = int_0^1 W_n(s) sqrt(2) sin(pi j s) ds = (2/n)^{1/2} sum_i cos(pi j u_i) / (pi j).
SpectralCoefficients spectral_coefficients(const PitVector& u, std::size_t K);

}  // namespace condfit
