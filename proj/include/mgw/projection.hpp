#pragma once

#include <cstdint>
#include <vector>

#include "mgw/forest.hpp"
#include "mgw/rational.hpp"

namespace mgw {

// Result of erasing every type but i. The reduced forest is monotype: its
// single type is numbered 1 and stands for the kept type i.
struct ProjectionOutput {
    int kept = 1;
    std::vector<int> others;  // the deleted types j != i, increasing
    Forest reduced;
    // N_ij(u) for reduced vertex u, stored as n_counters[u * others.size() + k] with j = others[k].
    std::vector<std::uint64_t> n_counters;
    // Nhat_ij(n) for original component n (0-based), same layout.
    std::vector<std::uint64_t> nhat_counters;

    std::uint64_t n(std::size_t u, int j) const;
    std::uint64_t nhat(std::size_t component, int j) const;
};

ProjectionOutput project(const Forest& f, int i);

// Deletes the type-k vertices and renumbers types above k. A tree stays a tree
// when its root survives.
Forest collapse_type(const Forest& f, int k);

enum class JsOrientation { extra_first, extra_last };

// Alternating two-type tree with a type-1 root to a monotype tree of the same size.
Forest js_bijection(const Forest& t, JsOrientation orientation = JsOrientation::extra_first);
Forest js_inverse(const Forest& g, JsOrientation orientation = JsOrientation::extra_first);

[[noreturn]] void throw_invalid_p();

// nu(0) = 1 - p and nu(z) = p mu2(z - 1) for z >= 1.
template <class S>
std::vector<S> nu_offspring(const S& p, const std::vector<S>& mu2) {
    if (!(p > S(0) && p < S(1))) throw_invalid_p();
    std::vector<S> nu(mu2.size() + 1, S(0));
    nu[0] = S(1) - p;
    for (std::size_t z = 0; z < mu2.size(); ++z) nu[z + 1] = p * mu2[z];
    return nu;
}

}  // namespace mgw
