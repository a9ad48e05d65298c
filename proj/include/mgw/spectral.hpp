#pragma once

#include <string>
#include <vector>

#include "mgw/offspring.hpp"

namespace mgw {

using Matrix = std::vector<std::vector<double>>;

enum class Criticality { subcritical, critical, supercritical };

std::string criticality_name(Criticality c);

struct PerronData {
    double rho = 0.0;
    std::vector<double> a;  // left eigenvector, <a, 1> = 1
    std::vector<double> b;  // right eigenvector, <a, b> = 1
    int iterations = 0;
};

Matrix mean_matrix(const OffspringSpec& spec);

bool is_irreducible(const Matrix& m);

// Perron root and eigenvectors by shifted power iteration on M + I.
PerronData perron(const Matrix& m, double tol = 1e-12, int max_iter = 100000);

Criticality classify(double rho, double tol = 1e-8);

// Spectral radius of any non-negative matrix, by normalized repeated squaring.
double spectral_radius(const Matrix& m);

// Removes type k (1-based) and folds its descendants into the remaining types.
Matrix reduced_mean_matrix(const Matrix& m, int k);

// Max-norm residuals of a^T M = rho a^T and M b = rho b, plus the two
// normalization defects.
struct PerronResiduals {
    double left = 0.0;
    double right = 0.0;
    double sum_a = 0.0;
    double dot_ab = 0.0;
};
PerronResiduals perron_residuals(const Matrix& m, const PerronData& p);

}  // namespace mgw
