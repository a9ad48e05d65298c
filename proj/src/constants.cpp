#include "mgw/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mgw/errors.hpp"

namespace mgw {

namespace {

template <class S>
S law_param(const Rational& q);

template <>
double law_param<double>(const Rational& q) {
    return to_double(q);
}

template <>
Rational law_param<Rational>(const Rational& q) {
    return q;
}

// Generating function of one law with series substituted for its arguments.
template <class S>
Series<S> law_series(const TypeLaw& law, const std::vector<Series<S>>& args, std::size_t n) {
    const std::size_t d = args.size();
    switch (law.family) {
        case Family::finite_table: {
            Series<S> out(n, S(0));
            for (const auto& e : law.table.entries) {
                Series<S> term(n, S(0));
                term[0] = law_param<S>(e.prob);
                for (std::size_t t = 0; t < d; ++t)
                    if (e.children[t] > 0) term = series_mul(term, series_pow(args[t], static_cast<unsigned>(e.children[t]), n), n);
                out = series_add(out, term, n);
            }
            return out;
        }
        case Family::geometric: {
            S p = law_param<S>(law.geometric.p);
            const auto& y = args[static_cast<std::size_t>(law.geometric.child_type - 1)];
            Series<S> den(n, S(0));
            for (std::size_t k = 0; k < n && k < y.size(); ++k) den[k] = -p * y[k];
            if (n) den[0] += S(1);
            Series<S> out = series_reciprocal(den, n);
            for (auto& c : out) c *= (S(1) - p);
            return out;
        }
        case Family::heavy_count:
            throw DomainError("reduced offspring series support finite tables and geometric laws only");
    }
    return {};
}

void check_kept_type(const OffspringSpec& spec, int i) {
    if (i < 1 || i > spec.d()) throw RangeError("type outside [1, d]");
}

}  // namespace

std::vector<double> reduced_offspring_exact(const OffspringSpec& spec, int i, std::size_t max_coeff, double tol,
                                            int max_iter) {
    check_kept_type(spec, i);
    const std::size_t d = static_cast<std::size_t>(spec.d());
    const std::size_t n = max_coeff;
    std::vector<Series<double>> args(d, Series<double>(n, 0.0));
    Series<double> x(n, 0.0);
    if (n > 1) x[1] = 1.0;
    args[static_cast<std::size_t>(i - 1)] = x;
    if (d > 1) {
        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            std::vector<Series<double>> next(args);
            double change = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                if (j == static_cast<std::size_t>(i - 1)) continue;
                next[j] = law_series(spec.law(static_cast<int>(j + 1)), args, n);
                for (std::size_t k = 0; k < n; ++k) change = std::max(change, std::abs(next[j][k] - args[j][k]));
            }
            args.swap(next);
            if (change <= tol) {
                converged = true;
                break;
            }
        }
        if (!converged) throw NumericalError("reduced offspring fixed point did not converge");
    }
    auto out = law_series(spec.law(i), args, n);
    for (auto& c : out)
        if (c < 0.0) c = 0.0;
    return out;
}

std::vector<Rational> reduced_offspring_rational(const OffspringSpec& spec, int i, std::size_t max_coeff) {
    check_kept_type(spec, i);
    if (!spec.is_exact()) throw DomainError("exact reduced offspring needs rational laws");
    const std::size_t d = static_cast<std::size_t>(spec.d());
    Matrix m = mean_matrix(spec);
    // The removed types must not reach themselves (transitive closure of the restricted pattern).
    std::vector<std::vector<char>> reach(d, std::vector<char>(d, 0));
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            if (a != static_cast<std::size_t>(i - 1) && b != static_cast<std::size_t>(i - 1) && m[a][b] > 0.0) reach[a][b] = 1;
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                if (reach[a][k] && reach[k][b]) reach[a][b] = 1;
    for (std::size_t a = 0; a < d; ++a)
        if (reach[a][a]) throw DomainError("exact reduced offspring needs the removed types to form an acyclic graph");

    const std::size_t n = max_coeff;
    std::vector<Series<Rational>> args(d, Series<Rational>(n, Rational(0)));
    Series<Rational> x(n, Rational(0));
    if (n > 1) x[1] = 1;
    args[static_cast<std::size_t>(i - 1)] = x;
    for (std::size_t it = 0; it + 1 < d; ++it) {
        std::vector<Series<Rational>> next(args);
        for (std::size_t j = 0; j < d; ++j)
            if (j != static_cast<std::size_t>(i - 1)) next[j] = law_series(spec.law(static_cast<int>(j + 1)), args, n);
        args.swap(next);
    }
    return law_series(spec.law(i), args, n);
}

double reduced_laplace_exponent(const OffspringSpec& spec, int i, double s, double tol, int max_iter) {
    check_kept_type(spec, i);
    const std::size_t d = static_cast<std::size_t>(spec.d());
    const std::size_t ii = static_cast<std::size_t>(i - 1);
    std::vector<double> arg(d, 0.0);
    arg[ii] = s;
    if (d > 1) {
        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            std::vector<double> next(arg);
            double change = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                if (j == ii) continue;
                next[j] = laplace_exponent(spec, static_cast<int>(j + 1), arg);
                change = std::max(change, std::abs(next[j] - arg[j]) / std::max(next[j], 1e-300));
            }
            arg.swap(next);
            if (change <= tol) {
                converged = true;
                break;
            }
        }
        if (!converged) throw NumericalError("reduced Laplace exponent fixed point did not converge");
    }
    return laplace_exponent(spec, i, arg);
}

namespace {

double total_count_variance(const TypeLaw& law) {
    switch (law.family) {
        case Family::finite_table: {
            Rational m1 = 0, m2 = 0;
            for (const auto& e : law.table.entries) {
                long long n = 0;
                for (int c : e.children) n += c;
                m1 += e.prob * n;
                m2 += e.prob * n * n;
            }
            return to_double(m2 - m1 * m1);
        }
        case Family::geometric: {
            Rational p = law.geometric.p;
            return to_double(p / ((1 - p) * (1 - p)));
        }
        case Family::heavy_count: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

}  // namespace

LimitConstants limit_constants(const OffspringSpec& spec) {
    LimitConstants out;
    Matrix m = mean_matrix(spec);
    out.perron = perron(m);
    out.criticality = classify(out.perron.rho);
    if (out.criticality != Criticality::critical)
        throw DomainError("limit constants need a critical spec (rho = " + std::to_string(out.perron.rho) + ")");
    const int d = spec.d();
    out.alpha_min = 2.0;
    for (int i = 1; i <= d; ++i) out.alpha_min = std::min(out.alpha_min, spec.law(i).alpha);
    const double alpha = out.alpha_min;
    const auto& a = out.perron.a;
    const auto& b = out.perron.b;

    if (alpha == 2.0) {
        out.method = "variance";
        for (int i = 1; i <= d; ++i) {
            std::size_t n = 256;
            std::vector<double> mu;
            while (true) {
                mu = reduced_offspring_exact(spec, i, n);
                double deficit = 1.0 - series_sum(mu);
                if (deficit < 1e-13 || n >= 65536) break;
                n *= 2;
            }
            double var = series_variance(mu);
            out.sigma2_bar.push_back(var);
            std::size_t k = static_cast<std::size_t>(i - 1);
            out.cbar_by_type.push_back(b[k] * std::sqrt(a[k] * var / 2.0));
        }
    } else {
        out.method = "fit";
        const int points = 21;
        for (int i = 1; i <= d; ++i) {
            std::size_t k = static_cast<std::size_t>(i - 1);
            double sx = 0, sy = 0, sxx = 0, sxy = 0, offset = 0;
            for (int g = 0; g < points; ++g) {
                double s = std::pow(10.0, -4.0 + 2.0 * g / (points - 1));
                double y = std::log(std::abs(reduced_laplace_exponent(spec, i, s) - s));
                double x = std::log(s);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                offset += y - alpha * x;
            }
            double slope = (points * sxy - sx * sy) / (points * sxx - sx * sx);
            out.fit_slope.push_back(slope);
            double kappa = std::exp(offset / points);
            out.cbar_by_type.push_back(b[k] * std::pow(a[k] * kappa, 1.0 / alpha));
        }
    }
    double sum = 0.0;
    for (double c : out.cbar_by_type) sum += c;
    out.cbar = sum / static_cast<double>(out.cbar_by_type.size());
    for (double c : out.cbar_by_type) out.cbar_spread = std::max(out.cbar_spread, std::abs(c - out.cbar) / out.cbar);
    if (out.cbar_spread > 0.05)
        throw ConsistencyError("cbar disagrees across types by " + std::to_string(100.0 * out.cbar_spread) + "%");

    if (spec.is_alternating()) {
        const TypeLaw& second = spec.law(2);
        double p = spec.law(1).geometric.value;
        double a2 = second.alpha;
        double l2 = second.family == Family::heavy_count ? second.heavy.scale() * std::tgamma(-a2)
                                                         : total_count_variance(second) / 2.0;
        double lbar = a[1] * std::pow(b[0], a2) * l2;
        if (a2 == 2.0) lbar += 0.5 * (p / ((1.0 - p) * (1.0 - p))) * a[0] * b[1] * b[1];
        out.lbar = lbar;
        out.bn_scale = std::pow(lbar, 1.0 / a2);
    }
    return out;
}

double height_tail_constant(const LimitConstants& c, int i) {
    double alpha = c.alpha_min;
    double bi = c.perron.b.at(static_cast<std::size_t>(i - 1));
    return bi * (alpha - 1.0) * std::pow((alpha - 1.0) * c.cbar, alpha / (1.0 - alpha));
}

OffspringSpec reduced_monotype_spec(const OffspringSpec& spec, int i, std::size_t max_coeff) {
    auto mu = reduced_offspring_exact(spec, i, max_coeff);
    while (mu.size() > 1 && mu.back() < 1e-300) mu.pop_back();
    return monotype_table_spec(mu, "reduced_type_" + std::to_string(i));
}

}  // namespace mgw
