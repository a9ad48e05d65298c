#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mgw {

// Truncated power series: coefficient k of x^k, k < size().
template <class S>
using Series = std::vector<S>;

template <class S>
Series<S> series_truncate(Series<S> a, std::size_t n) {
    a.resize(n, S(0));
    return a;
}

template <class S>
Series<S> series_add(const Series<S>& a, const Series<S>& b, std::size_t n) {
    Series<S> c(n, S(0));
    for (std::size_t k = 0; k < n; ++k) {
        if (k < a.size()) c[k] += a[k];
        if (k < b.size()) c[k] += b[k];
    }
    return c;
}

template <class S>
Series<S> series_mul(const Series<S>& a, const Series<S>& b, std::size_t n) {
    Series<S> c(n, S(0));
    std::size_t na = std::min(a.size(), n);
    for (std::size_t i = 0; i < na; ++i) {
        if (a[i] == S(0)) continue;
        std::size_t nb = std::min(b.size(), n - i);
        for (std::size_t j = 0; j < nb; ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

template <class S>
Series<S> series_reciprocal(const Series<S>& a, std::size_t n) {
    if (a.empty() || a[0] == S(0)) throw std::domain_error("series reciprocal needs a nonzero constant term");
    Series<S> r(n, S(0));
    if (n == 0) return r;
    r[0] = S(1) / a[0];
    for (std::size_t k = 1; k < n; ++k) {
        S acc(0);
        for (std::size_t j = 1; j <= k && j < a.size(); ++j) acc += a[j] * r[k - j];
        r[k] = -acc / a[0];
    }
    return r;
}

template <class S>
Series<S> series_pow(const Series<S>& a, unsigned e, std::size_t n) {
    Series<S> result(n, S(0));
    if (n == 0) return result;
    result[0] = S(1);
    Series<S> base = series_truncate(a, n);
    while (e) {
        if (e & 1u) result = series_mul(result, base, n);
        e >>= 1u;
        if (e) base = series_mul(base, base, n);
    }
    return result;
}

// p(g(x)) for a polynomial p, by Horner's rule.
template <class S>
Series<S> series_compose_poly(const Series<S>& p, const Series<S>& g, std::size_t n) {
    Series<S> acc(n, S(0));
    for (std::size_t k = p.size(); k-- > 0;) {
        acc = series_mul(acc, g, n);
        if (n) acc[0] += p[k];
    }
    return acc;
}

// A generating function written as num(x) / den(x) with polynomial parts.
template <class S>
struct RationalFunction {
    Series<S> num;
    Series<S> den{S(1)};
};

template <class S>
Series<S> series_compose(const RationalFunction<S>& f, const Series<S>& g, std::size_t n) {
    return series_mul(series_compose_poly(f.num, g, n), series_reciprocal(series_compose_poly(f.den, g, n), n), n);
}

template <class S>
Series<S> series_expand(const RationalFunction<S>& f, std::size_t n) {
    return series_mul(series_truncate(f.num, n), series_reciprocal(f.den, n), n);
}

template <class S>
S series_sum(const Series<S>& a) {
    S s(0);
    for (const auto& c : a) s += c;
    return s;
}

template <class S>
S series_mean(const Series<S>& a) {
    S s(0);
    for (std::size_t k = 1; k < a.size(); ++k) s += S(static_cast<long long>(k)) * a[k];
    return s;
}

template <class S>
S series_variance(const Series<S>& a) {
    S m1(0), m2(0);
    for (std::size_t k = 1; k < a.size(); ++k) {
        S kk(static_cast<long long>(k));
        m1 += kk * a[k];
        m2 += kk * kk * a[k];
    }
    return m2 - m1 * m1;
}

}  // namespace mgw
