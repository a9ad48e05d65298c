#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mgw {

// Ulam-Harris word. The empty word is the root of a tree.
using Label = std::vector<std::uint32_t>;

bool label_less(const Label& u, const Label& v);
// True when u is a prefix of v (u itself included).
bool is_prefix(const Label& u, const Label& v);
Label concat(const Label& u, const Label& v);
std::string format_label(const Label& u);
Label parse_label(std::string_view text);

enum class HeightMode { tree, forest };

// Ordered rooted forest with a type in [1, d] at every vertex.
//
// Vertices are stored in depth-first order as (parent, child rank, type, depth)
// records; labels are only built on request. A forest whose single root is the
// empty word is a tree; otherwise roots carry the labels 1..k.
class Forest {
public:
    static constexpr std::int32_t no_parent = -1;

    Forest() = default;
    explicit Forest(int d, bool tree = false);

    static Forest from_labels(std::vector<std::pair<Label, int>> vertices, int d);

    // Appending keeps depth-first order: a child may only be attached to a
    // vertex on the path from the last root to the last vertex.
    std::size_t add_root(int type);
    std::size_t add_child(std::size_t parent, int type);
    void clear();
    void reserve(std::size_t n);

    int d() const { return d_; }
    bool is_tree() const { return tree_; }
    std::size_t size() const { return type_.size(); }
    bool empty() const { return type_.empty(); }
    std::size_t components() const { return roots_; }

    int type(std::size_t v) const { return type_[v]; }
    std::int32_t parent(std::size_t v) const { return parent_[v]; }
    std::uint32_t rank(std::size_t v) const { return rank_[v]; }
    std::uint32_t depth(std::size_t v) const { return depth_[v]; }

    Label label(std::size_t v) const;
    std::optional<std::size_t> find(const Label& u) const;
    std::size_t count_type(int i) const;

    // Same vertices and types, relabelled with roots 1..k.
    Forest as_forest() const;

    bool operator==(const Forest& other) const;

private:
    void check_type(int type) const;

    int d_ = 1;
    bool tree_ = false;
    std::size_t roots_ = 0;
    std::vector<std::int32_t> parent_;
    std::vector<std::uint32_t> rank_;
    std::vector<std::uint32_t> depth_;
    std::vector<std::uint16_t> type_;
    std::vector<std::uint32_t> nchild_;
    std::vector<std::size_t> path_;
};

std::vector<Label> depth_first_order(const Forest& f);
std::vector<std::size_t> subtree_sizes(const Forest& f);

std::vector<std::int64_t> height_process(const Forest& f, HeightMode mode);

// Upsilon_n for n < #f.
std::vector<std::int64_t> component_index_series(const Forest& f);
// Upsilon_n for any n >= 0; equals the number of components once n >= #f.
std::int64_t component_index_at(const Forest& f, std::size_t n);

std::vector<std::int64_t> lambda_series(const Forest& f, int i);
// G_i(n) for n = 0..#f^(i); the last entry is #f.
std::vector<std::int64_t> g_series(const Forest& f, int i);
std::int64_t g_at(const Forest& f, int i, std::size_t n);

// Number of strict ancestors of u with type i.
std::int64_t ancestor_type_count(const Forest& f, const Label& u, int i);

Forest subtree(const Forest& f, const Label& u);
Forest prune(const Forest& f, const Label& u);

// One "label:type" line per vertex in depth-first order; the root of a tree
// has an empty label.
std::string dump_text(const Forest& f);
// d = 0 infers the number of types from the largest type present.
Forest load_text(std::string_view text, int d = 0);

}  // namespace mgw
