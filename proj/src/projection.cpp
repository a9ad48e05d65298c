#include "mgw/projection.hpp"

#include <functional>

#include "mgw/errors.hpp"

namespace mgw {

void throw_invalid_p() { throw DomainError("geometric parameter must lie in (0, 1)"); }

std::uint64_t ProjectionOutput::n(std::size_t u, int j) const {
    for (std::size_t k = 0; k < others.size(); ++k)
        if (others[k] == j) return n_counters.at(u * others.size() + k);
    throw RangeError("type " + std::to_string(j) + " is not a deleted type");
}

std::uint64_t ProjectionOutput::nhat(std::size_t component, int j) const {
    for (std::size_t k = 0; k < others.size(); ++k)
        if (others[k] == j) return nhat_counters.at(component * others.size() + k);
    throw RangeError("type " + std::to_string(j) + " is not a deleted type");
}

ProjectionOutput project(const Forest& f, int i) {
    if (i < 1 || i > f.d()) throw RangeError("type outside [1, d]");
    ProjectionOutput out;
    out.kept = i;
    std::vector<std::size_t> slot(static_cast<std::size_t>(f.d()) + 1, 0);
    for (int j = 1; j <= f.d(); ++j)
        if (j != i) {
            slot[static_cast<std::size_t>(j)] = out.others.size();
            out.others.push_back(j);
        }
    const std::size_t w = out.others.size();
    out.reduced = Forest(1);
    out.nhat_counters.assign(f.components() * w, 0);

    // owner[v]: reduced index of the nearest type-i vertex on the path from the root to v, or -1.
    std::vector<std::int64_t> owner(f.size());
    std::int64_t component = -1;
    for (std::size_t v = 0; v < f.size(); ++v) {
        std::int32_t p = f.parent(v);
        if (p == Forest::no_parent) ++component;
        std::int64_t above = p == Forest::no_parent ? -1 : owner[static_cast<std::size_t>(p)];
        int t = f.type(v);
        if (t == i) {
            std::size_t r = above < 0 ? out.reduced.add_root(1) : out.reduced.add_child(static_cast<std::size_t>(above), 1);
            out.n_counters.resize(out.n_counters.size() + w, 0);
            owner[v] = static_cast<std::int64_t>(r);
        } else {
            owner[v] = above;
            std::size_t k = slot[static_cast<std::size_t>(t)];
            if (above < 0)
                ++out.nhat_counters[static_cast<std::size_t>(component) * w + k];
            else
                ++out.n_counters[static_cast<std::size_t>(above) * w + k];
        }
    }
    return out;
}

Forest collapse_type(const Forest& f, int k) {
    if (f.d() < 2) throw DomainError("collapse needs at least two types");
    if (k < 1 || k > f.d()) throw RangeError("type outside [1, d]");
    const bool tree = f.is_tree() && !f.empty() && f.type(0) != k;
    Forest out(f.d() - 1, tree);
    out.reserve(f.size());
    std::vector<std::int64_t> image(f.size());
    for (std::size_t v = 0; v < f.size(); ++v) {
        std::int32_t p = f.parent(v);
        std::int64_t above = p == Forest::no_parent ? -1 : image[static_cast<std::size_t>(p)];
        int t = f.type(v);
        if (t == k) {
            image[v] = above;
            continue;
        }
        int nt = t > k ? t - 1 : t;
        image[v] = static_cast<std::int64_t>(above < 0 ? out.add_root(nt) : out.add_child(static_cast<std::size_t>(above), nt));
    }
    return out;
}

namespace {

std::vector<std::vector<std::size_t>> child_lists(const Forest& f) {
    std::vector<std::vector<std::size_t>> kids(f.size());
    for (std::size_t v = 0; v < f.size(); ++v)
        if (f.parent(v) != Forest::no_parent) kids[static_cast<std::size_t>(f.parent(v))].push_back(v);
    return kids;
}

// Builds a tree from per-vertex child lists, renumbering in depth-first order.
Forest from_child_lists(const std::vector<std::vector<std::size_t>>& kids, std::size_t root,
                        const std::function<int(std::size_t)>& type_of, int d) {
    Forest out(d, true);
    out.reserve(kids.size());
    std::vector<std::pair<std::size_t, std::size_t>> stack;  // (old vertex, new parent)
    out.add_root(type_of(root));
    auto push_kids = [&](std::size_t v, std::size_t nv) {
        for (auto it = kids[v].rbegin(); it != kids[v].rend(); ++it) stack.emplace_back(*it, nv);
    };
    push_kids(root, 0);
    while (!stack.empty()) {
        auto [v, np] = stack.back();
        stack.pop_back();
        std::size_t nv = out.add_child(np, type_of(v));
        push_kids(v, nv);
    }
    return out;
}

}  // namespace

Forest js_bijection(const Forest& t, JsOrientation orientation) {
    if (!t.is_tree() || t.empty()) throw StructuralError("js_bijection needs a tree");
    for (std::size_t v = 0; v < t.size(); ++v)
        if (t.type(v) != (t.depth(v) % 2 == 0 ? 1 : 2) || t.d() != 2)
            throw StructuralError("js_bijection needs an alternating tree with a type-1 root");
    const auto kids = child_lists(t);
    if (kids[0].empty()) {
        Forest single(1, true);
        single.add_root(1);
        return single;
    }
    // Image children of each odd vertex: the image of each T-child, plus the next sibling or the parent.
    std::vector<std::vector<std::size_t>> image(t.size());
    for (std::size_t w = 0; w < t.size(); ++w) {
        if (t.depth(w) % 2 == 0) continue;
        std::size_t u = static_cast<std::size_t>(t.parent(w));
        const auto& sibs = kids[u];
        std::size_t r = t.rank(w);  // 1-based
        std::size_t extra = r < sibs.size() ? sibs[r] : u;
        std::vector<std::size_t> list;
        if (orientation == JsOrientation::extra_first) list.push_back(extra);
        for (std::size_t v : kids[w]) list.push_back(kids[v].empty() ? v : kids[v].front());
        if (orientation == JsOrientation::extra_last) list.push_back(extra);
        image[w] = std::move(list);
    }
    return from_child_lists(image, kids[0].front(), [](std::size_t) { return 1; }, 1);
}

Forest js_inverse(const Forest& g, JsOrientation orientation) {
    if (!g.is_tree() || g.empty()) throw StructuralError("js_inverse needs a tree");
    const auto kids = child_lists(g);
    std::vector<std::vector<std::size_t>> back(g.size());
    std::vector<std::size_t> type(g.size(), 1);

    auto extra_of = [&](std::size_t w) { return orientation == JsOrientation::extra_first ? kids[w].front() : kids[w].back(); };
    // Follows extra links from an odd vertex to the even vertex whose children the chain lists.
    auto chain = [&](std::size_t start, std::vector<std::size_t>& odd) {
        std::size_t x = start;
        while (!kids[x].empty()) {
            odd.push_back(x);
            x = extra_of(x);
        }
        return x;
    };
    std::vector<std::size_t> odd;
    const std::size_t root = chain(0, odd);
    std::vector<std::size_t> todo;
    back[root] = odd;
    todo.insert(todo.end(), odd.begin(), odd.end());
    while (!todo.empty()) {
        std::size_t w = todo.back();
        todo.pop_back();
        type[w] = 2;
        const auto& list = kids[w];
        std::size_t begin = orientation == JsOrientation::extra_first ? 1 : 0;
        std::size_t end = orientation == JsOrientation::extra_first ? list.size() : list.size() - 1;
        for (std::size_t k = begin; k < end; ++k) {
            std::size_t c = list[k];
            std::vector<std::size_t> grand;
            std::size_t v = kids[c].empty() ? c : chain(c, grand);
            back[w].push_back(v);
            back[v] = grand;
            todo.insert(todo.end(), grand.begin(), grand.end());
        }
    }
    return from_child_lists(back, root, [&](std::size_t v) { return static_cast<int>(type[v]); }, 2);
}

}  // namespace mgw
