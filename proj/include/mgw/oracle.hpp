#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mgw/forest.hpp"
#include "mgw/offspring.hpp"
#include "mgw/rational.hpp"
#include "mgw/series.hpp"

namespace mgw {

// Product over vertices of the arrangement factor prod_j c_j! / c! times the
// offspring probability of the child-type counts. Child vectors outside the
// support give zero.
Rational tree_probability_exact(const OffspringSpec& spec, const Forest& t, int root_type);
long double tree_probability(const OffspringSpec& spec, const Forest& t, int root_type);

struct EnumeratedTree {
    Forest tree;
    Rational exact;  // meaningful when the law is exact
    long double value = 0.0L;
};

struct EnumeratedLaw {
    bool exact = true;
    std::vector<EnumeratedTree> entries;
    Rational total_exact;
    long double total = 0.0L;
};

// Every tree with at most max_size vertices and positive probability, in
// depth-first generation order (child sequences by length, then
// lexicographically). max_children drops trees with a larger out-degree.
EnumeratedLaw enumerate_trees(const OffspringSpec& spec, int root_type, std::size_t max_size,
                              std::optional<std::size_t> max_children = std::nullopt,
                              std::uint64_t node_budget = 50'000'000);

// All monotype plane trees with at most max_size vertices.
std::vector<Forest> enumerate_plane_trees(std::size_t max_size);

// prod_u pmf(c(u)) for a monotype tree; out-degrees beyond the pmf give zero.
Rational monotype_tree_probability(const std::vector<Rational>& pmf, const Forest& t);

struct OtterDwass {
    Rational lhs;  // P(#T = n)
    Rational rhs;  // P(W_n = -1) / n
};

// Only mu(0..n-1) matter for trees with n vertices, so a prefix of the pmf suffices.
OtterDwass otter_dwass(const std::vector<Rational>& mu, std::size_t n);

struct PgfCoefficients {
    Series<Rational> coeffs;
    // f(g(1)) minus the returned coefficients: the mass left beyond the
    // truncation when all coefficients are non-negative.
    Rational tail;
};

// Coefficients 0..n-1 of f(g(x)) for a rational generating function f and a polynomial g.
PgfCoefficients pgf_coefficients(const RationalFunction<Rational>& f, const Series<Rational>& g, std::size_t n);

// Offspring law of the type-1 vertices of an alternating tree, summed over
// local configurations: a type-1 vertex with k <= max_k type-2 children,
// which together have c type-1 children.
struct LocalReducedLaw {
    std::vector<Rational> pmf;  // index c <= max_c
    Rational dropped;           // P(k > max_k), an upper bound on the missing mass per vertex
};
LocalReducedLaw local_reduced_law(const OffspringSpec& alt, std::size_t max_c, std::size_t max_k);

}  // namespace mgw
