#include "mgw/forest.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "mgw/errors.hpp"

namespace mgw {

bool label_less(const Label& u, const Label& v) {
    return std::lexicographical_compare(u.begin(), u.end(), v.begin(), v.end());
}

bool is_prefix(const Label& u, const Label& v) {
    return u.size() <= v.size() && std::equal(u.begin(), u.end(), v.begin());
}

Label concat(const Label& u, const Label& v) {
    Label w(u);
    w.insert(w.end(), v.begin(), v.end());
    return w;
}

std::string format_label(const Label& u) {
    std::string out;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (k) out += '.';
        out += std::to_string(u[k]);
    }
    return out;
}

Label parse_label(std::string_view text) {
    Label u;
    if (text.empty()) return u;
    std::size_t pos = 0;
    while (true) {
        std::size_t dot = text.find('.', pos);
        std::string_view part = text.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
        std::uint32_t value = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc() || ptr != part.data() + part.size() || value == 0)
            throw StructuralError("bad label '" + std::string(text) + "'");
        u.push_back(value);
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return u;
}

Forest::Forest(int d, bool tree) : d_(d), tree_(tree) {
    if (d < 1) throw ValidationError("number of types must be at least 1");
}

void Forest::check_type(int type) const {
    if (type < 1 || type > d_)
        throw StructuralError("vertex type " + std::to_string(type) + " outside [1, " + std::to_string(d_) + "]");
}

std::size_t Forest::add_root(int type) {
    check_type(type);
    if (tree_ && !type_.empty()) throw StructuralError("a tree has a single root");
    std::size_t v = type_.size();
    ++roots_;
    parent_.push_back(no_parent);
    rank_.push_back(tree_ ? 0u : static_cast<std::uint32_t>(roots_));
    depth_.push_back(0);
    type_.push_back(static_cast<std::uint16_t>(type));
    nchild_.push_back(0);
    path_.clear();
    path_.push_back(v);
    return v;
}

std::size_t Forest::add_child(std::size_t parent, int type) {
    check_type(type);
    while (!path_.empty() && path_.back() != parent) path_.pop_back();
    if (path_.empty()) throw StructuralError("child appended out of depth-first order");
    std::size_t v = type_.size();
    parent_.push_back(static_cast<std::int32_t>(parent));
    rank_.push_back(++nchild_[parent]);
    depth_.push_back(depth_[parent] + 1);
    type_.push_back(static_cast<std::uint16_t>(type));
    nchild_.push_back(0);
    path_.push_back(v);
    return v;
}

void Forest::clear() {
    roots_ = 0;
    parent_.clear();
    rank_.clear();
    depth_.clear();
    type_.clear();
    nchild_.clear();
    path_.clear();
}

void Forest::reserve(std::size_t n) {
    parent_.reserve(n);
    rank_.reserve(n);
    depth_.reserve(n);
    type_.reserve(n);
    nchild_.reserve(n);
}

Label Forest::label(std::size_t v) const {
    Label u;
    for (std::int64_t w = static_cast<std::int64_t>(v); w != no_parent; w = parent_[w]) {
        if (tree_ && parent_[w] == no_parent) break;
        u.push_back(rank_[w]);
    }
    std::reverse(u.begin(), u.end());
    return u;
}

std::optional<std::size_t> Forest::find(const Label& u) const {
    if (type_.empty()) return std::nullopt;
    auto sizes = subtree_sizes(*this);
    std::size_t cur = 0;
    std::size_t k = 0;
    if (tree_) {
        cur = 0;
    } else {
        if (u.empty()) return std::nullopt;
        std::size_t root = 0;
        for (std::uint32_t r = 1; r < u[0]; ++r) {
            root += sizes[root];
            if (root >= type_.size()) return std::nullopt;
        }
        cur = root;
        k = 1;
    }
    for (; k < u.size(); ++k) {
        if (nchild_[cur] < u[k]) return std::nullopt;
        std::size_t child = cur + 1;
        for (std::uint32_t r = 1; r < u[k]; ++r) child += sizes[child];
        cur = child;
    }
    return cur;
}

std::size_t Forest::count_type(int i) const {
    return static_cast<std::size_t>(std::count(type_.begin(), type_.end(), static_cast<std::uint16_t>(i)));
}

Forest Forest::as_forest() const {
    Forest f(*this);
    if (f.tree_) {
        f.tree_ = false;
        if (!f.rank_.empty()) f.rank_[0] = 1;
    }
    return f;
}

bool Forest::operator==(const Forest& other) const {
    return d_ == other.d_ && tree_ == other.tree_ && parent_ == other.parent_ && type_ == other.type_;
}

Forest Forest::from_labels(std::vector<std::pair<Label, int>> vertices, int d) {
    std::sort(vertices.begin(), vertices.end(),
              [](const auto& x, const auto& y) { return label_less(x.first, y.first); });
    for (std::size_t k = 1; k < vertices.size(); ++k)
        if (vertices[k].first == vertices[k - 1].first)
            throw StructuralError("duplicate label '" + format_label(vertices[k].first) + "'");
    bool tree = !vertices.empty() && vertices.front().first.empty();
    Forest f(d, tree);
    f.reserve(vertices.size());
    std::map<Label, std::size_t> index;
    for (const auto& [u, type] : vertices) {
        std::size_t v;
        if (u.empty()) {
            v = f.add_root(type);
        } else if (!tree && u.size() == 1) {
            if (u[0] != f.roots_ + 1) throw StructuralError("roots must be numbered 1..k consecutively");
            v = f.add_root(type);
        } else {
            Label up(u.begin(), u.end() - 1);
            auto it = index.find(up);
            if (it == index.end()) throw StructuralError("label '" + format_label(u) + "' has no parent");
            if (f.nchild_[it->second] + 1 != u.back())
                throw StructuralError("label '" + format_label(u) + "' has a missing elder sibling");
            v = f.add_child(it->second, type);
        }
        index.emplace(u, v);
    }
    return f;
}

std::vector<Label> depth_first_order(const Forest& f) {
    std::vector<Label> out;
    out.reserve(f.size());
    for (std::size_t v = 0; v < f.size(); ++v) out.push_back(f.label(v));
    return out;
}

std::vector<std::size_t> subtree_sizes(const Forest& f) {
    std::vector<std::size_t> size(f.size(), 1);
    for (std::size_t v = f.size(); v-- > 0;)
        if (f.parent(v) != Forest::no_parent) size[f.parent(v)] += size[v];
    return size;
}

std::vector<std::int64_t> height_process(const Forest& f, HeightMode mode) {
    if (mode == HeightMode::tree && f.components() > 1)
        throw ModeError("tree-mode height requested on a forest with several components");
    std::vector<std::int64_t> h(f.size());
    for (std::size_t v = 0; v < f.size(); ++v) h[v] = f.depth(v);
    return h;
}

std::vector<std::int64_t> component_index_series(const Forest& f) {
    std::vector<std::int64_t> out(f.size());
    std::int64_t k = 0;
    for (std::size_t v = 0; v < f.size(); ++v) {
        if (f.parent(v) == Forest::no_parent) ++k;
        out[v] = k;
    }
    return out;
}

std::int64_t component_index_at(const Forest& f, std::size_t n) {
    if (n >= f.size()) return static_cast<std::int64_t>(f.components());
    std::int64_t k = 0;
    for (std::size_t v = 0; v <= n; ++v)
        if (f.parent(v) == Forest::no_parent) ++k;
    return k;
}

static void check_type_arg(const Forest& f, int i) {
    if (i < 1 || i > f.d()) throw RangeError("type " + std::to_string(i) + " outside [1, " + std::to_string(f.d()) + "]");
}

std::vector<std::int64_t> lambda_series(const Forest& f, int i) {
    check_type_arg(f, i);
    std::vector<std::int64_t> out(f.size());
    std::int64_t c = 0;
    for (std::size_t v = 0; v < f.size(); ++v) {
        if (f.type(v) == i) ++c;
        out[v] = c;
    }
    return out;
}

std::vector<std::int64_t> g_series(const Forest& f, int i) {
    check_type_arg(f, i);
    std::vector<std::int64_t> out;
    for (std::size_t v = 0; v < f.size(); ++v)
        if (f.type(v) == i) out.push_back(static_cast<std::int64_t>(v));
    out.push_back(static_cast<std::int64_t>(f.size()));
    return out;
}

std::int64_t g_at(const Forest& f, int i, std::size_t n) {
    auto g = g_series(f, i);
    if (n >= g.size())
        throw RangeError("G_i(n) requested with n = " + std::to_string(n) + " beyond the type count " +
                         std::to_string(g.size() - 1));
    return g[n];
}

std::int64_t ancestor_type_count(const Forest& f, const Label& u, int i) {
    check_type_arg(f, i);
    auto v = f.find(u);
    if (!v) throw LookupError("label '" + format_label(u) + "' is not in the forest");
    std::int64_t c = 0;
    for (std::int32_t w = f.parent(*v); w != Forest::no_parent; w = f.parent(w))
        if (f.type(w) == i) ++c;
    return c;
}

Forest subtree(const Forest& f, const Label& u) {
    auto v = f.find(u);
    if (!v) throw LookupError("label '" + format_label(u) + "' is not in the forest");
    auto sizes = subtree_sizes(f);
    Forest t(f.d(), true);
    t.reserve(sizes[*v]);
    t.add_root(f.type(*v));
    for (std::size_t w = *v + 1; w < *v + sizes[*v]; ++w)
        t.add_child(static_cast<std::size_t>(f.parent(w)) - *v, f.type(w));
    return t;
}

Forest prune(const Forest& f, const Label& u) {
    auto v = f.find(u);
    if (!v) throw LookupError("label '" + format_label(u) + "' is not in the forest");
    auto sizes = subtree_sizes(f);
    std::size_t lo = *v + 1, hi = *v + sizes[*v];
    Forest out(f.d(), f.is_tree());
    out.reserve(f.size() - (hi - lo));
    std::vector<std::size_t> remap(f.size());
    for (std::size_t w = 0; w < f.size(); ++w) {
        if (w >= lo && w < hi) continue;
        if (f.parent(w) == Forest::no_parent)
            remap[w] = out.add_root(f.type(w));
        else
            remap[w] = out.add_child(remap[f.parent(w)], f.type(w));
    }
    return out;
}

std::string dump_text(const Forest& f) {
    std::string out;
    for (std::size_t v = 0; v < f.size(); ++v) {
        out += format_label(f.label(v));
        out += ':';
        out += std::to_string(f.type(v));
        out += '\n';
    }
    return out;
}

Forest load_text(std::string_view text, int d) {
    std::vector<std::pair<Label, int>> vertices;
    int max_type = 0;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        std::size_t colon = line.rfind(':');
        if (colon == std::string_view::npos)
            throw StructuralError("line " + std::to_string(line_no) + ": expected 'label:type'");
        std::string_view tpart = line.substr(colon + 1);
        int type = 0;
        auto [ptr, ec] = std::from_chars(tpart.data(), tpart.data() + tpart.size(), type);
        if (ec != std::errc() || ptr != tpart.data() + tpart.size() || type < 1)
            throw StructuralError("line " + std::to_string(line_no) + ": bad type");
        max_type = std::max(max_type, type);
        vertices.emplace_back(parse_label(line.substr(0, colon)), type);
    }
    return Forest::from_labels(std::move(vertices), d > 0 ? d : std::max(max_type, 1));
}

}  // namespace mgw
