#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mgw/offspring.hpp"
#include "mgw/series.hpp"
#include "mgw/spectral.hpp"

namespace mgw {

// First max_coeff probabilities of the offspring law of the monotype forest
// obtained by keeping only type-i vertices. Supports finite-table and
// geometric laws.
std::vector<double> reduced_offspring_exact(const OffspringSpec& spec, int i, std::size_t max_coeff,
                                            double tol = 1e-15, int max_iter = 100000);

// Exact rational coefficients. Needs the removed types to form an acyclic
// graph so the fixed point is reached after finitely many substitutions.
std::vector<Rational> reduced_offspring_rational(const OffspringSpec& spec, int i, std::size_t max_coeff);

// Laplace exponent of the reduced law at s >= 0, by fixed point on the
// exponents of the removed types.
double reduced_laplace_exponent(const OffspringSpec& spec, int i, double s, double tol = 1e-15, int max_iter = 100000);

struct LimitConstants {
    double alpha_min = 2.0;
    double cbar = 0.0;
    std::vector<double> cbar_by_type;
    double cbar_spread = 0.0;  // max relative deviation of cbar_by_type from cbar
    std::vector<double> sigma2_bar;  // reduced variances when alpha_min = 2
    std::vector<double> fit_slope;   // fitted log-log slopes when alpha_min < 2
    std::string method;              // "variance" or "fit"
    std::optional<double> lbar;      // alternating specs only
    std::optional<double> bn_scale;  // B_n = bn_scale * n^(1/alpha)
    PerronData perron;
    Criticality criticality = Criticality::critical;
};

LimitConstants limit_constants(const OffspringSpec& spec);

// lim n P(ht(T) >= n) for a type-i root.
double height_tail_constant(const LimitConstants& c, int i);

// Monotype spec for the reduced law of type i (finite tables / geometric laws only).
OffspringSpec reduced_monotype_spec(const OffspringSpec& spec, int i, std::size_t max_coeff = 400);

}  // namespace mgw
