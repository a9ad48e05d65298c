#pragma once

#include <cstdint>
#include <vector>

#include "mgw/forest.hpp"
#include "mgw/offspring.hpp"
#include "mgw/rng.hpp"

namespace mgw {

constexpr std::uint64_t default_seed = 20240917ULL;

struct SampleBudget {
    std::uint64_t max_vertices = 10'000'000;
    std::uint64_t max_tries = 100'000'000;
    std::uint64_t seed = default_seed;
};

enum class SampleStatus { ok, truncated, exhausted };

struct TreeSample {
    SampleStatus status = SampleStatus::ok;
    Forest tree;
    std::uint64_t attempts = 0;
};

struct ForestSample {
    SampleStatus status = SampleStatus::ok;
    Forest forest;
};

// Walker/Vose alias table over indices 0..n-1.
class AliasTable {
public:
    AliasTable() = default;
    explicit AliasTable(const std::vector<double>& weights);
    std::size_t draw(Rng& rng) const;
    std::size_t size() const { return prob_.size(); }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

// Draws child lists for every type of a spec.
class ChildSampler {
public:
    explicit ChildSampler(const OffspringSpec& spec);

    int d() const { return d_; }
    const OffspringSpec& spec() const { return *spec_; }

    // Child types in planar order; a uniformly random arrangement of the drawn type multiset.
    void draw(int type, Rng& rng, std::vector<std::uint16_t>& out) const;
    // Adds the drawn child counts per type (index t - 1) to counts.
    void add_counts(int type, Rng& rng, std::vector<std::uint64_t>& counts) const;

private:
    struct PerType {
        Family family = Family::finite_table;
        AliasTable pick;
        std::vector<std::vector<std::uint16_t>> lists;  // finite table: expanded child types per entry
        std::vector<char> mixed;                        // finite table: list holds more than one type
        double log_p = 0.0;                             // geometric
        std::uint16_t child_type = 1;                   // geometric
        AliasTable type_pick;                           // heavy count
        std::uint64_t head = 0;                         // heavy count: alias covers 0..head, index head + 1 is the tail
        const HeavyCountLaw* heavy = nullptr;
    };

    std::uint64_t heavy_count(const PerType& t, Rng& rng) const;

    const OffspringSpec* spec_;
    int d_;
    std::vector<PerType> types_;
};

// Grows a forest of independent components in depth-first order, one vertex
// at a time. Component k has root type root_types[k mod size].
class ForestGrower {
public:
    struct Pending {
        std::uint32_t parent;
        std::uint16_t type;
    };

    ForestGrower(const ChildSampler& sampler, std::vector<int> root_types, bool tree_mode = false);

    std::size_t step(Rng& rng);
    // True before the first vertex and whenever the last component is complete.
    bool between_components() const { return stack_.empty(); }
    void reset();

    const Forest& forest() const { return forest_; }
    Forest& forest() { return forest_; }
    Forest take() { return std::move(forest_); }
    const std::vector<Pending>& pending() const { return stack_; }

private:
    const ChildSampler* sampler_;
    std::vector<int> roots_;
    bool tree_mode_;
    Forest forest_;
    std::vector<Pending> stack_;
    std::vector<std::uint16_t> kids_;
    std::size_t started_ = 0;
};

void check_not_supercritical(const OffspringSpec& spec);

TreeSample sample_tree(const ChildSampler& sampler, int root_type, std::uint64_t max_vertices, Rng& rng);
TreeSample sample_tree(const OffspringSpec& spec, int root_type, const SampleBudget& budget);

// Independent complete components until at least n_min vertices (and at least one component).
ForestSample sample_forest(const ChildSampler& sampler, const std::vector<int>& root_types, std::uint64_t n_min,
                           std::uint64_t max_vertices, Rng& rng);
ForestSample sample_forest(const OffspringSpec& spec, const std::vector<int>& root_types, const SampleBudget& budget,
                           std::uint64_t n_min);

struct HeightReach {
    SampleStatus status = SampleStatus::ok;
    bool reached = false;
};

// Whether generation h is non-empty, simulating only per-generation type counts.
HeightReach sample_height_reach(const ChildSampler& sampler, int root_type, std::uint64_t h,
                                std::uint64_t max_population, Rng& rng);
HeightReach sample_height_reach(const OffspringSpec& spec, int root_type, std::uint64_t h, const SampleBudget& budget);

// min(#T^(j), cap) without storing the tree.
std::uint64_t type_count_capped(const ChildSampler& sampler, int root_type, int j, std::uint64_t cap, Rng& rng);

// Values of #T^(j) with positive probability for a type-root tree.
struct ReachableCounts {
    std::vector<char> reachable;  // index n <= horizon
    std::uint64_t period = 0;     // 0 when at most one value is reachable
    std::uint64_t residue = 0;
    bool contains(std::uint64_t n) const;
};
ReachableCounts reachable_counts(const OffspringSpec& spec, int root_type, int j, std::size_t horizon = 512);

// Rejection sampling of a type-root tree until |#T^(j) - n| <= delta.
TreeSample sample_conditioned(const ChildSampler& sampler, int root_type, int j, std::uint64_t n, std::uint64_t delta,
                              std::uint64_t max_vertices, std::uint64_t max_tries, Rng& rng);
TreeSample sample_conditioned(const OffspringSpec& spec, int j, std::uint64_t n, std::uint64_t delta,
                              const SampleBudget& budget, int root_type = 0);

}  // namespace mgw
