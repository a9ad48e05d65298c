#include "mgw/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/dynamic_bitset.hpp>

#include "mgw/errors.hpp"
#include "mgw/spectral.hpp"

namespace mgw {

AliasTable::AliasTable(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw ValidationError("alias table needs at least one weight");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("alias weights must be finite and non-negative");
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("alias weights sum to zero");
    prob_.assign(n, 1.0);
    alias_.resize(n);
    std::iota(alias_.begin(), alias_.end(), 0u);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t k = 0; k < n; ++k) {
        scaled[k] = weights[k] * static_cast<double>(n) / total;
        (scaled[k] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(k));
    }
    while (!small.empty() && !large.empty()) {
        std::uint32_t s = small.back(), l = large.back();
        small.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    // Leftovers are 1 up to rounding.
    for (auto k : small) prob_[k] = 1.0;
    for (auto k : large) prob_[k] = 1.0;
}

std::size_t AliasTable::draw(Rng& rng) const {
    std::size_t k = static_cast<std::size_t>(rng.below(prob_.size()));
    if (prob_[k] >= 1.0) return k;
    return rng.uniform() < prob_[k] ? k : alias_[k];
}

namespace {

constexpr std::uint64_t heavy_head = 65535;

}  // namespace

ChildSampler::ChildSampler(const OffspringSpec& spec) : spec_(&spec), d_(spec.d()) {
    types_.resize(static_cast<std::size_t>(d_));
    for (int i = 1; i <= d_; ++i) {
        const TypeLaw& law = spec.law(i);
        PerType& t = types_[static_cast<std::size_t>(i - 1)];
        t.family = law.family;
        switch (law.family) {
            case Family::finite_table: {
                std::vector<double> w;
                for (const auto& e : law.table.entries) {
                    w.push_back(e.value);
                    std::vector<std::uint16_t> list;
                    int kinds = 0;
                    for (int c = 0; c < d_; ++c) {
                        int count = e.children[static_cast<std::size_t>(c)];
                        if (count > 0) ++kinds;
                        list.insert(list.end(), static_cast<std::size_t>(count), static_cast<std::uint16_t>(c + 1));
                    }
                    t.lists.push_back(std::move(list));
                    t.mixed.push_back(kinds > 1);
                }
                t.pick = AliasTable(w);
                break;
            }
            case Family::geometric:
                t.log_p = std::log(law.geometric.value);
                t.child_type = static_cast<std::uint16_t>(law.geometric.child_type);
                break;
            case Family::heavy_count: {
                t.heavy = &law.heavy;
                t.head = heavy_head;
                std::vector<double> w(heavy_head + 2);
                for (std::uint64_t k = 0; k <= heavy_head; ++k) w[k] = law.heavy.pmf(k);
                w[heavy_head + 1] = law.heavy.tail(heavy_head + 1);
                t.pick = AliasTable(w);
                t.type_pick = AliasTable(law.heavy.q());
                break;
            }
        }
    }
}

std::uint64_t ChildSampler::heavy_count(const PerType& t, Rng& rng) const {
    std::uint64_t k = t.pick.draw(rng);
    if (k <= t.head) return k;
    // Inverse CDF on the tail: the largest k with tail(k) >= target.
    const HeavyCountLaw& h = *t.heavy;
    const double target = rng.uniform() * h.tail(t.head + 1);
    std::uint64_t lo = t.head + 1, hi = 2 * lo;
    while (h.tail(hi) >= target) {
        lo = hi;
        if (hi > (std::uint64_t{1} << 62)) return hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        (h.tail(mid) >= target ? lo : hi) = mid;
    }
    return lo;
}

void ChildSampler::draw(int type, Rng& rng, std::vector<std::uint16_t>& out) const {
    out.clear();
    const PerType& t = types_[static_cast<std::size_t>(type - 1)];
    switch (t.family) {
        case Family::finite_table: {
            std::size_t e = t.pick.draw(rng);
            out = t.lists[e];
            if (t.mixed[e])
                for (std::size_t k = out.size(); k > 1; --k) std::swap(out[k - 1], out[rng.below(k)]);
            break;
        }
        case Family::geometric:
            out.assign(rng.geometric(t.log_p), t.child_type);
            break;
        case Family::heavy_count: {
            std::uint64_t n = heavy_count(t, rng);
            out.resize(n);
            if (d_ == 1) {
                std::fill(out.begin(), out.end(), std::uint16_t{1});
            } else {
                for (auto& c : out) c = static_cast<std::uint16_t>(t.type_pick.draw(rng) + 1);
            }
            break;
        }
    }
}

void ChildSampler::add_counts(int type, Rng& rng, std::vector<std::uint64_t>& counts) const {
    const PerType& t = types_[static_cast<std::size_t>(type - 1)];
    switch (t.family) {
        case Family::finite_table: {
            const auto& entry = spec_->law(type).table.entries[t.pick.draw(rng)];
            for (int c = 0; c < d_; ++c) counts[static_cast<std::size_t>(c)] += static_cast<std::uint64_t>(entry.children[static_cast<std::size_t>(c)]);
            break;
        }
        case Family::geometric:
            counts[t.child_type - 1u] += rng.geometric(t.log_p);
            break;
        case Family::heavy_count: {
            std::uint64_t n = heavy_count(t, rng);
            if (d_ == 1) {
                counts[0] += n;
            } else if (n <= 64) {
                for (std::uint64_t k = 0; k < n; ++k) ++counts[t.type_pick.draw(rng)];
            } else {
                // Sequential binomial splitting of the multinomial.
                const auto& q = t.heavy->q();
                double rest = 1.0;
                for (int c = 0; c + 1 < d_ && n > 0; ++c) {
                    double pc = rest > 0.0 ? std::min(1.0, q[static_cast<std::size_t>(c)] / rest) : 1.0;
                    std::binomial_distribution<std::uint64_t> split(n, pc);
                    std::uint64_t x = split(rng);
                    counts[static_cast<std::size_t>(c)] += x;
                    n -= x;
                    rest -= q[static_cast<std::size_t>(c)];
                }
                counts[static_cast<std::size_t>(d_ - 1)] += n;
            }
            break;
        }
    }
}

ForestGrower::ForestGrower(const ChildSampler& sampler, std::vector<int> root_types, bool tree_mode)
    : sampler_(&sampler), roots_(std::move(root_types)), tree_mode_(tree_mode), forest_(sampler.d(), tree_mode) {
    if (roots_.empty()) throw ValidationError("at least one root type is required");
    for (int r : roots_)
        if (r < 1 || r > sampler.d()) throw RangeError("root type outside [1, d]");
}

void ForestGrower::reset() {
    forest_.clear();
    stack_.clear();
    started_ = 0;
}

std::size_t ForestGrower::step(Rng& rng) {
    std::size_t v;
    int type;
    if (stack_.empty()) {
        if (tree_mode_ && started_ > 0) throw StructuralError("tree already complete");
        type = roots_[started_ % roots_.size()];
        ++started_;
        v = forest_.add_root(type);
    } else {
        Pending p = stack_.back();
        stack_.pop_back();
        type = p.type;
        v = forest_.add_child(p.parent, type);
    }
    sampler_->draw(type, rng, kids_);
    for (auto it = kids_.rbegin(); it != kids_.rend(); ++it) stack_.push_back({static_cast<std::uint32_t>(v), *it});
    return v;
}

void check_not_supercritical(const OffspringSpec& spec) {
    double r = spectral_radius(mean_matrix(spec));
    if (classify(r) == Criticality::supercritical)
        throw ClassificationError("spec is supercritical (spectral radius " + std::to_string(r) + ")");
}

TreeSample sample_tree(const ChildSampler& sampler, int root_type, std::uint64_t max_vertices, Rng& rng) {
    TreeSample out;
    out.attempts = 1;
    ForestGrower g(sampler, {root_type}, true);
    if (max_vertices == 0) {
        out.status = SampleStatus::truncated;
        out.tree = Forest(sampler.d(), true);
        return out;
    }
    do {
        if (g.forest().size() >= max_vertices) {
            out.status = SampleStatus::truncated;
            out.tree = Forest(sampler.d(), true);
            return out;
        }
        g.step(rng);
    } while (!g.between_components());
    out.tree = g.take();
    return out;
}

TreeSample sample_tree(const OffspringSpec& spec, int root_type, const SampleBudget& budget) {
    check_not_supercritical(spec);
    ChildSampler sampler(spec);
    Rng rng(budget.seed);
    return sample_tree(sampler, root_type, budget.max_vertices, rng);
}

ForestSample sample_forest(const ChildSampler& sampler, const std::vector<int>& root_types, std::uint64_t n_min,
                           std::uint64_t max_vertices, Rng& rng) {
    ForestSample out;
    ForestGrower g(sampler, root_types);
    std::size_t start = 0;
    do {
        if (g.between_components()) start = g.forest().size();
        if (g.forest().size() - start >= max_vertices) {
            out.status = SampleStatus::truncated;
            out.forest = Forest(sampler.d());
            return out;
        }
        g.step(rng);
    } while (!(g.between_components() && g.forest().size() >= n_min));
    out.forest = g.take();
    return out;
}

ForestSample sample_forest(const OffspringSpec& spec, const std::vector<int>& root_types, const SampleBudget& budget,
                           std::uint64_t n_min) {
    check_not_supercritical(spec);
    ChildSampler sampler(spec);
    Rng rng(budget.seed);
    return sample_forest(sampler, root_types, n_min, budget.max_vertices, rng);
}

HeightReach sample_height_reach(const ChildSampler& sampler, int root_type, std::uint64_t h,
                                std::uint64_t max_population, Rng& rng) {
    const std::size_t d = static_cast<std::size_t>(sampler.d());
    if (root_type < 1 || static_cast<std::size_t>(root_type) > d) throw RangeError("root type outside [1, d]");
    HeightReach out;
    std::vector<std::uint64_t> gen(d, 0), next(d);
    gen[static_cast<std::size_t>(root_type - 1)] = 1;
    for (std::uint64_t level = 0; level < h; ++level) {
        std::fill(next.begin(), next.end(), 0);
        for (std::size_t t = 0; t < d; ++t)
            for (std::uint64_t k = 0; k < gen[t]; ++k) sampler.add_counts(static_cast<int>(t + 1), rng, next);
        std::uint64_t total = 0;
        for (auto c : next) total += c;
        if (total == 0) return out;
        if (total > max_population) {
            out.status = SampleStatus::truncated;
            return out;
        }
        gen.swap(next);
    }
    out.reached = true;
    return out;
}

HeightReach sample_height_reach(const OffspringSpec& spec, int root_type, std::uint64_t h, const SampleBudget& budget) {
    check_not_supercritical(spec);
    ChildSampler sampler(spec);
    Rng rng(budget.seed);
    return sample_height_reach(sampler, root_type, h, budget.max_vertices, rng);
}

std::uint64_t type_count_capped(const ChildSampler& sampler, int root_type, int j, std::uint64_t cap, Rng& rng) {
    const std::size_t d = static_cast<std::size_t>(sampler.d());
    std::vector<std::uint64_t> pending(d, 0);
    pending[static_cast<std::size_t>(root_type - 1)] = 1;
    std::uint64_t count = 0;
    std::size_t t = 0;
    while (true) {
        std::size_t scanned = 0;
        while (pending[t] == 0 && scanned < d) {
            t = (t + 1) % d;
            ++scanned;
        }
        if (pending[t] == 0) return count;
        --pending[t];
        if (static_cast<int>(t + 1) == j && ++count >= cap) return cap;
        sampler.add_counts(static_cast<int>(t + 1), rng, pending);
    }
}

bool ReachableCounts::contains(std::uint64_t n) const {
    if (n < reachable.size()) return reachable[n] != 0;
    if (period == 0) return false;
    return n % period == residue;
}

ReachableCounts reachable_counts(const OffspringSpec& spec, int root_type, int j, std::size_t horizon) {
    using Bits = boost::dynamic_bitset<>;
    const int d = spec.d();
    if (root_type < 1 || root_type > d || j < 1 || j > d) throw RangeError("type outside [1, d]");
    const std::size_t width = horizon + 1;
    auto sumset = [&](const Bits& a, const Bits& b) {
        Bits out(width);
        for (auto k = a.find_first(); k != Bits::npos; k = a.find_next(k)) out |= b << k;
        return out;
    };
    auto closure = [&](const Bits& s) {
        Bits c(width);
        c.set(0);
        while (true) {
            Bits n = c | sumset(c, s);
            if (n == c) return c;
            c = n;
        }
    };
    std::vector<Bits> r(static_cast<std::size_t>(d), Bits(width));
    while (true) {
        std::vector<Bits> next(static_cast<std::size_t>(d), Bits(width));
        for (int t = 1; t <= d; ++t) {
            const TypeLaw& law = spec.law(t);
            Bits& out = next[static_cast<std::size_t>(t - 1)];
            switch (law.family) {
                case Family::finite_table:
                    for (const auto& e : law.table.entries) {
                        Bits acc(width);
                        acc.set(0);
                        for (int c = 0; c < d; ++c)
                            for (int k = 0; k < e.children[static_cast<std::size_t>(c)]; ++k) acc = sumset(acc, r[static_cast<std::size_t>(c)]);
                        out |= acc;
                    }
                    break;
                case Family::geometric:
                    out = closure(r[static_cast<std::size_t>(law.geometric.child_type - 1)]);
                    break;
                case Family::heavy_count: {
                    Bits any(width);
                    for (int c = 0; c < d; ++c)
                        if (law.heavy.q()[static_cast<std::size_t>(c)] > 0.0) any |= r[static_cast<std::size_t>(c)];
                    out = closure(any);
                    break;
                }
            }
            if (t == j) out <<= 1;
        }
        if (next == r) break;
        r.swap(next);
    }
    ReachableCounts rc;
    const Bits& mine = r[static_cast<std::size_t>(root_type - 1)];
    rc.reachable.assign(width, 0);
    std::uint64_t first = 0, g = 0;
    bool seen = false;
    for (auto k = mine.find_first(); k != Bits::npos; k = mine.find_next(k)) {
        rc.reachable[k] = 1;
        if (!seen) {
            first = k;
            seen = true;
        } else {
            g = std::gcd(g, static_cast<std::uint64_t>(k) - first);
        }
    }
    rc.period = g;
    rc.residue = g ? first % g : first;
    return rc;
}

TreeSample sample_conditioned(const ChildSampler& sampler, int root_type, int j, std::uint64_t n, std::uint64_t delta,
                              std::uint64_t max_vertices, std::uint64_t max_tries, Rng& rng) {
    TreeSample out;
    const std::uint64_t upper = n + delta;
    ForestGrower g(sampler, {root_type}, true);
    for (std::uint64_t attempt = 1; attempt <= max_tries; ++attempt) {
        g.reset();
        std::uint64_t count = 0;
        bool rejected = false;
        do {
            if (g.forest().size() >= max_vertices) {
                out.status = SampleStatus::truncated;
                out.attempts = attempt;
                out.tree = Forest(sampler.d(), true);
                return out;
            }
            std::size_t v = g.step(rng);
            if (g.forest().type(v) == j && ++count > upper) {
                rejected = true;
                break;
            }
        } while (!g.between_components());
        if (!rejected && count + delta >= n) {
            out.attempts = attempt;
            out.tree = g.take();
            return out;
        }
    }
    out.status = SampleStatus::exhausted;
    out.attempts = max_tries;
    out.tree = Forest(sampler.d(), true);
    return out;
}

TreeSample sample_conditioned(const OffspringSpec& spec, int j, std::uint64_t n, std::uint64_t delta,
                              const SampleBudget& budget, int root_type) {
    if (root_type == 0) root_type = spec.root_types().empty() ? 1 : spec.root_types().front();
    if (j < 1 || j > spec.d()) throw RangeError("type outside [1, d]");
    check_not_supercritical(spec);
    auto rc = reachable_counts(spec, root_type, j, std::max<std::size_t>(512, n + delta + 1));
    bool possible = false;
    for (std::uint64_t m = n > delta ? n - delta : 0; m <= n + delta && !possible; ++m) possible = rc.contains(m);
    if (!possible) throw SupportError("#T^(" + std::to_string(j) + ") cannot take a value within " + std::to_string(delta) + " of " + std::to_string(n));
    ChildSampler sampler(spec);
    Rng rng(budget.seed);
    return sample_conditioned(sampler, root_type, j, n, delta, budget.max_vertices, budget.max_tries, rng);
}

}  // namespace mgw
