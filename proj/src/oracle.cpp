#include "mgw/oracle.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "mgw/errors.hpp"

namespace mgw {

namespace {

Rational factorial(int n) {
    Rational f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

// Child-type counts per vertex, row v at offset v * d.
std::vector<int> child_counts(const Forest& t) {
    const std::size_t d = static_cast<std::size_t>(t.d());
    std::vector<int> c(t.size() * d, 0);
    for (std::size_t v = 0; v < t.size(); ++v)
        if (t.parent(v) != Forest::no_parent) ++c[static_cast<std::size_t>(t.parent(v)) * d + static_cast<std::size_t>(t.type(v) - 1)];
    return c;
}

void check_root(const OffspringSpec& spec, const Forest& t, int root_type) {
    if (t.d() != spec.d()) throw ValidationError("tree and spec disagree on the number of types");
    if (t.empty() || t.components() != 1) throw ModeError("tree probability needs a single tree");
    if (t.type(0) != root_type) throw ValidationError("root type does not match");
}

struct Weight {
    Rational exact;
    long double value;
};

using WeightFn = std::function<std::optional<Weight>(int type, const std::vector<int>& counts)>;

class Enumerator {
public:
    Enumerator(int d, std::size_t max_size, std::size_t max_children, std::uint64_t budget, WeightFn weight, bool exact)
        : d_(d), max_size_(max_size), max_children_(max_children), budget_(budget), weight_(std::move(weight)), exact_(exact) {}

    void run(int root_type, const std::function<void(const Forest&, const Rational&, long double)>& emit) {
        emit_ = &emit;
        verts_.clear();
        pending_.clear();
        pending_.push_back({-1, static_cast<std::uint16_t>(root_type)});
        recurse(Rational(1), 1.0L);
    }

private:
    struct Slot {
        std::int32_t parent;
        std::uint16_t type;
    };
    struct Choice {
        std::vector<std::uint16_t> seq;
        Rational exact;
        long double value;
    };

    const std::vector<Choice>& choices(int type, std::size_t k) {
        auto key = std::make_pair(type, k);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        std::vector<Choice> out;
        std::vector<std::uint16_t> seq(k, 1);
        while (true) {
            std::vector<int> counts(static_cast<std::size_t>(d_), 0);
            for (auto s : seq) ++counts[s - 1u];
            if (auto w = weight_(type, counts)) {
                Rational arrange = 1;
                long double arrange_ld = 1.0L;
                if (d_ > 1) {
                    Rational num = 1;
                    for (int c : counts) num *= factorial(c);
                    arrange = num / factorial(static_cast<int>(k));
                    arrange_ld = to_long_double(arrange);
                }
                if (exact_)
                    out.push_back({seq, w->exact * arrange, 0.0L});
                else
                    out.push_back({seq, Rational(0), w->value * arrange_ld});
            }
            // Next sequence in lexicographic order.
            std::size_t pos = k;
            while (pos > 0 && seq[pos - 1] == d_) seq[--pos] = 1;
            if (pos == 0) break;
            ++seq[pos - 1];
        }
        return cache_.emplace(key, std::move(out)).first->second;
    }

    void recurse(const Rational& p, long double pv) {
        if (++nodes_ > budget_) throw BudgetError("tree enumeration exceeded its node budget");
        if (pending_.empty()) {
            Forest t(d_, true);
            for (const auto& s : verts_) s.parent < 0 ? t.add_root(s.type) : t.add_child(static_cast<std::size_t>(s.parent), s.type);
            (*emit_)(t, p, pv);
            return;
        }
        Slot slot = pending_.back();
        pending_.pop_back();
        const std::int32_t v = static_cast<std::int32_t>(verts_.size());
        verts_.push_back(slot);
        const std::size_t used = verts_.size() + pending_.size();
        const std::size_t room = std::min(max_size_ - used, max_children_);
        for (std::size_t k = 0; k <= room; ++k) {
            for (const auto& c : choices(slot.type, k)) {
                for (auto it = c.seq.rbegin(); it != c.seq.rend(); ++it) pending_.push_back({v, *it});
                if (exact_)
                    recurse(p * c.exact, 0.0L);
                else
                    recurse(Rational(0), pv * c.value);
                pending_.resize(pending_.size() - k);
            }
        }
        verts_.pop_back();
        pending_.push_back(slot);
    }

    int d_;
    std::size_t max_size_;
    std::size_t max_children_;
    std::uint64_t budget_;
    WeightFn weight_;
    bool exact_;
    std::uint64_t nodes_ = 0;
    std::vector<Slot> verts_;
    std::vector<Slot> pending_;
    std::map<std::pair<int, std::size_t>, std::vector<Choice>> cache_;
    const std::function<void(const Forest&, const Rational&, long double)>* emit_ = nullptr;
};

}  // namespace

Rational tree_probability_exact(const OffspringSpec& spec, const Forest& t, int root_type) {
    check_root(spec, t, root_type);
    if (!spec.is_exact()) throw DomainError("exact tree probability needs rational laws");
    const std::size_t d = static_cast<std::size_t>(spec.d());
    auto counts = child_counts(t);
    Rational p = 1;
    std::vector<int> c(d);
    for (std::size_t v = 0; v < t.size(); ++v) {
        int total = 0;
        Rational arrange = 1;
        for (std::size_t j = 0; j < d; ++j) {
            c[j] = counts[v * d + j];
            total += c[j];
            arrange *= factorial(c[j]);
        }
        Rational q = spec.prob_exact(t.type(v), c);
        if (q == 0) return 0;
        p *= q * arrange / factorial(total);
    }
    return p;
}

long double tree_probability(const OffspringSpec& spec, const Forest& t, int root_type) {
    check_root(spec, t, root_type);
    const std::size_t d = static_cast<std::size_t>(spec.d());
    auto counts = child_counts(t);
    long double p = 1.0L;
    std::vector<int> c(d);
    for (std::size_t v = 0; v < t.size(); ++v) {
        int total = 0;
        long double log_arrange = 0.0L;
        for (std::size_t j = 0; j < d; ++j) {
            c[j] = counts[v * d + j];
            total += c[j];
            log_arrange += std::lgamma(static_cast<long double>(c[j]) + 1.0L);
        }
        log_arrange -= std::lgamma(static_cast<long double>(total) + 1.0L);
        long double q = spec.prob(t.type(v), c);
        if (q == 0.0L) return 0.0L;
        p *= q * std::exp(log_arrange);
    }
    return p;
}

EnumeratedLaw enumerate_trees(const OffspringSpec& spec, int root_type, std::size_t max_size,
                              std::optional<std::size_t> max_children, std::uint64_t node_budget) {
    if (root_type < 1 || root_type > spec.d()) throw RangeError("root type outside [1, d]");
    EnumeratedLaw law;
    law.exact = spec.is_exact();
    law.total_exact = 0;
    if (max_size == 0) return law;
    WeightFn weight = [&](int type, const std::vector<int>& counts) -> std::optional<Weight> {
        if (law.exact) {
            Rational q = spec.prob_exact(type, counts);
            if (q == 0) return std::nullopt;
            return Weight{q, 0.0L};
        }
        double q = spec.prob(type, counts);
        if (q == 0.0) return std::nullopt;
        return Weight{Rational(0), static_cast<long double>(q)};
    };
    Enumerator e(spec.d(), max_size, max_children.value_or(max_size), node_budget, weight, law.exact);
    e.run(root_type, [&](const Forest& t, const Rational& p, long double pv) {
        EnumeratedTree entry{t, p, law.exact ? to_long_double(p) : pv};
        if (law.exact) law.total_exact += p;
        law.total += entry.value;
        law.entries.push_back(std::move(entry));
    });
    if (law.exact) law.total = to_long_double(law.total_exact);
    return law;
}

std::vector<Forest> enumerate_plane_trees(std::size_t max_size) {
    std::vector<Forest> out;
    if (max_size == 0) return out;
    WeightFn weight = [](int, const std::vector<int>&) -> std::optional<Weight> { return Weight{Rational(1), 1.0L}; };
    Enumerator e(1, max_size, max_size, 50'000'000, weight, true);
    e.run(1, [&](const Forest& t, const Rational&, long double) { out.push_back(t); });
    return out;
}

Rational monotype_tree_probability(const std::vector<Rational>& pmf, const Forest& t) {
    std::vector<std::size_t> deg(t.size(), 0);
    for (std::size_t v = 0; v < t.size(); ++v)
        if (t.parent(v) != Forest::no_parent) ++deg[static_cast<std::size_t>(t.parent(v))];
    Rational p = 1;
    for (std::size_t k : deg) {
        if (k >= pmf.size()) return 0;
        p *= pmf[k];
    }
    return p;
}

OtterDwass otter_dwass(const std::vector<Rational>& mu, std::size_t n) {
    if (n == 0) throw RangeError("otter_dwass needs n >= 1");
    Series<Rational> f = series_truncate(mu, n);
    // Total progeny generating function T(x) = x f(T(x)); each pass fixes one more coefficient.
    Series<Rational> t(n + 1, Rational(0));
    for (std::size_t it = 0; it < n; ++it) {
        Series<Rational> ft = series_compose_poly(f, t, n);
        Series<Rational> next(n + 1, Rational(0));
        for (std::size_t k = 0; k < n; ++k) next[k + 1] = ft[k];
        t.swap(next);
    }
    OtterDwass out;
    out.lhs = t[n];
    // W_n = -1 iff the n offspring counts sum to n - 1.
    Series<Rational> fn = series_pow(f, static_cast<unsigned>(n), n);
    out.rhs = fn[n - 1] / static_cast<long long>(n);
    return out;
}

PgfCoefficients pgf_coefficients(const RationalFunction<Rational>& f, const Series<Rational>& g, std::size_t n) {
    PgfCoefficients out;
    out.coeffs = series_compose(f, g, n);
    Rational g1 = series_sum(g);
    auto eval = [&](const Series<Rational>& poly) {
        Rational acc = 0;
        for (std::size_t k = poly.size(); k-- > 0;) acc = acc * g1 + poly[k];
        return acc;
    };
    Rational den = eval(f.den);
    if (den == 0) throw DomainError("generating function has a pole at g(1)");
    out.tail = eval(f.num) / den - series_sum(out.coeffs);
    return out;
}

LocalReducedLaw local_reduced_law(const OffspringSpec& alt, std::size_t max_c, std::size_t max_k) {
    if (!alt.is_alternating() || !alt.is_exact()) throw DomainError("local reduced law needs an exact alternating spec");
    const std::size_t n = max_c + 1;
    std::vector<Rational> mu2(n);
    for (std::size_t j = 0; j < n; ++j) mu2[j] = alt.prob_exact(2, {static_cast<int>(j), 0});
    LocalReducedLaw out;
    out.pmf.assign(n, Rational(0));
    Rational kept = 0;
    Series<Rational> conv(n, Rational(0));
    conv[0] = 1;
    for (std::size_t k = 0; k <= max_k; ++k) {
        Rational m1 = alt.prob_exact(1, {0, static_cast<int>(k)});
        kept += m1;
        for (std::size_t c = 0; c < n; ++c) out.pmf[c] += m1 * conv[c];
        conv = series_mul(conv, mu2, n);
    }
    out.dropped = 1 - kept;
    return out;
}

}  // namespace mgw
