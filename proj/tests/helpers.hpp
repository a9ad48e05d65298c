#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mgw/forest.hpp"
#include "mgw/rng.hpp"

namespace testing {

// Builds a forest from "label:type" entries, e.g. {"", 1}, {"1", 2}.
inline mgw::Forest make(std::vector<std::pair<std::string, int>> entries, int d = 1) {
    std::vector<std::pair<mgw::Label, int>> v;
    for (auto& [label, type] : entries) v.emplace_back(mgw::parse_label(label), type);
    return mgw::Forest::from_labels(std::move(v), d);
}

// Copy of f with types drawn uniformly from [1, d].
inline mgw::Forest retype(const mgw::Forest& f, int d, mgw::Rng& rng) {
    mgw::Forest out(d, f.is_tree());
    for (std::size_t v = 0; v < f.size(); ++v) {
        int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
        if (f.parent(v) == mgw::Forest::no_parent)
            out.add_root(t);
        else
            out.add_child(static_cast<std::size_t>(f.parent(v)), t);
    }
    return out;
}

// The forest of root subtrees of a tree: drop the root, the children become roots 1..k.
inline mgw::Forest root_subtrees(const mgw::Forest& t) {
    mgw::Forest out(t.d());
    for (std::size_t v = 1; v < t.size(); ++v) {
        if (t.parent(v) == 0)
            out.add_root(t.type(v));
        else
            out.add_child(static_cast<std::size_t>(t.parent(v)) - 1, t.type(v));
    }
    return out;
}

}  // namespace testing
