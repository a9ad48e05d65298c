#include "mgw/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "mgw/errors.hpp"

namespace mgw {

std::string criticality_name(Criticality c) {
    switch (c) {
        case Criticality::subcritical: return "subcritical";
        case Criticality::critical: return "critical";
        case Criticality::supercritical: return "supercritical";
    }
    return "?";
}

Matrix mean_matrix(const OffspringSpec& spec) {
    const int d = spec.d();
    Matrix m(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(d), 0.0));
    for (int i = 1; i <= d; ++i) {
        auto& row = m[static_cast<std::size_t>(i - 1)];
        const TypeLaw& law = spec.law(i);
        switch (law.family) {
            case Family::finite_table: {
                std::vector<Rational> exact(static_cast<std::size_t>(d), Rational(0));
                for (const auto& e : law.table.entries)
                    for (int t = 0; t < d; ++t) exact[static_cast<std::size_t>(t)] += e.prob * e.children[static_cast<std::size_t>(t)];
                for (int t = 0; t < d; ++t) row[static_cast<std::size_t>(t)] = to_double(exact[static_cast<std::size_t>(t)]);
                break;
            }
            case Family::geometric: {
                Rational p = law.geometric.p;
                row[static_cast<std::size_t>(law.geometric.child_type - 1)] = to_double(p / (1 - p));
                break;
            }
            case Family::heavy_count:
                for (int t = 0; t < d; ++t) row[static_cast<std::size_t>(t)] = law.heavy.mean() * law.heavy.q()[static_cast<std::size_t>(t)];
                break;
        }
    }
    return m;
}

bool is_irreducible(const Matrix& m) {
    const std::size_t d = m.size();
    if (d == 1) return true;
    for (std::size_t s = 0; s < d; ++s) {
        std::vector<char> seen(d, 0);
        std::vector<std::size_t> stack{s};
        std::size_t reached = 0;
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < d; ++v)
                if (m[u][v] > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    ++reached;
                    stack.push_back(v);
                }
        }
        if (reached != d) return false;
    }
    return true;
}

namespace {

void check_square(const Matrix& m) {
    if (m.empty()) throw ValidationError("empty matrix");
    for (const auto& row : m) {
        if (row.size() != m.size()) throw ValidationError("matrix is not square");
        for (double x : row)
            if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("matrix entries must be finite and non-negative");
    }
}

// Dominant eigenvector of (M + I) or its transpose, max-normalized.
std::vector<double> power_vector(const Matrix& m, bool transpose, double tol, int max_iter, int& iterations) {
    const std::size_t d = m.size();
    std::vector<double> x(d, 1.0), y(d);
    for (int it = 1; it <= max_iter; ++it) {
        for (std::size_t r = 0; r < d; ++r) {
            double acc = x[r];
            for (std::size_t c = 0; c < d; ++c) acc += (transpose ? m[c][r] : m[r][c]) * x[c];
            y[r] = acc;
        }
        double norm = *std::max_element(y.begin(), y.end());
        double change = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            y[r] /= norm;
            change = std::max(change, std::abs(y[r] - x[r]));
        }
        x.swap(y);
        if (change <= tol) {
            iterations = std::max(iterations, it);
            return x;
        }
    }
    throw NumericalError("power iteration did not converge");
}

}  // namespace

PerronData perron(const Matrix& m, double tol, int max_iter) {
    check_square(m);
    if (!is_irreducible(m)) throw IrreducibilityError("mean matrix is reducible");
    const std::size_t d = m.size();
    PerronData p;
    p.b = power_vector(m, false, tol, max_iter, p.iterations);
    p.a = power_vector(m, true, tol, max_iter, p.iterations);
    double sa = 0.0;
    for (double x : p.a) sa += x;
    for (double& x : p.a) x /= sa;
    double ab = 0.0;
    for (std::size_t k = 0; k < d; ++k) ab += p.a[k] * p.b[k];
    for (double& x : p.b) x /= ab;
    double num = 0.0;
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) num += p.a[r] * m[r][c] * p.b[c];
    p.rho = num;
    return p;
}

Criticality classify(double rho, double tol) {
    if (rho < 1.0 - tol) return Criticality::subcritical;
    if (rho > 1.0 + tol) return Criticality::supercritical;
    return Criticality::critical;
}

double spectral_radius(const Matrix& m) {
    check_square(m);
    const std::size_t d = m.size();
    Matrix a = m;
    double log_scale = 0.0;  // log of the factor divided out so far, per unit power
    double power = 1.0;
    for (int step = 0; step < 60; ++step) {
        double norm = 0.0;
        for (const auto& row : a) {
            double s = 0.0;
            for (double x : row) s += x;
            norm = std::max(norm, s);
        }
        if (norm == 0.0) return 0.0;
        for (auto& row : a)
            for (double& x : row) x /= norm;
        log_scale += std::log(norm) / power;
        Matrix sq(d, std::vector<double>(d, 0.0));
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t k = 0; k < d; ++k)
                if (a[r][k] != 0.0)
                    for (std::size_t c = 0; c < d; ++c) sq[r][c] += a[r][k] * a[k][c];
        a.swap(sq);
        power *= 2.0;
    }
    double norm = 0.0;
    for (const auto& row : a) {
        double s = 0.0;
        for (double x : row) s += x;
        norm = std::max(norm, s);
    }
    if (norm == 0.0) return 0.0;
    return std::exp(log_scale + std::log(norm) / power);
}

Matrix reduced_mean_matrix(const Matrix& m, int k) {
    check_square(m);
    const std::size_t d = m.size();
    if (k < 1 || static_cast<std::size_t>(k) > d) throw RangeError("removed type outside [1, d]");
    if (d < 2) throw DomainError("cannot remove the only type");
    const std::size_t kk = static_cast<std::size_t>(k - 1);
    double denom = 1.0 - m[kk][kk];
    if (!(denom > 0.0)) throw DomainError("removed type has self-mean >= 1");
    Matrix out;
    for (std::size_t j = 0; j < d; ++j) {
        if (j == kk) continue;
        std::vector<double> row;
        for (std::size_t l = 0; l < d; ++l) {
            if (l == kk) continue;
            row.push_back(m[j][l] + m[j][kk] * m[kk][l] / denom);
        }
        out.push_back(std::move(row));
    }
    return out;
}

PerronResiduals perron_residuals(const Matrix& m, const PerronData& p) {
    const std::size_t d = m.size();
    PerronResiduals r;
    double sa = 0.0, ab = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        double left = 0.0, right = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            left += p.a[k] * m[k][c];
            right += m[c][k] * p.b[k];
        }
        r.left = std::max(r.left, std::abs(left - p.rho * p.a[c]));
        r.right = std::max(r.right, std::abs(right - p.rho * p.b[c]));
        sa += p.a[c];
        ab += p.a[c] * p.b[c];
    }
    r.sum_a = std::abs(sa - 1.0);
    r.dot_ab = std::abs(ab - 1.0);
    return r;
}

}  // namespace mgw
