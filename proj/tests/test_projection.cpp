#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "mgw/constants.hpp"
#include "mgw/errors.hpp"
#include "mgw/experiments.hpp"
#include "mgw/oracle.hpp"
#include "mgw/projection.hpp"
#include "mgw/sampler.hpp"

using namespace mgw;
using testing::make;

namespace {

OffspringSpec alt() { return alternating_geometric_spec(Rational(1, 2), Rational(1, 2)); }
OffspringSpec spec_file(const std::string& name) { return OffspringSpec::load(std::string(MGW_SPEC_DIR) + "/" + name); }

void check_conservation(const Forest& f) {
    for (int i = 1; i <= f.d(); ++i) {
        auto p = project(f, i);
        std::uint64_t total = p.reduced.size();
        for (auto x : p.n_counters) total += x;
        for (auto x : p.nhat_counters) total += x;
        REQUIRE(total == f.size());
        REQUIRE(p.reduced.size() == f.count_type(i));
    }
}

std::size_t leaves(const Forest& t) {
    std::vector<int> kids(t.size(), 0);
    for (std::size_t v = 1; v < t.size(); ++v) ++kids[static_cast<std::size_t>(t.parent(v))];
    return static_cast<std::size_t>(std::count(kids.begin(), kids.end(), 0));
}

// Alternating trees with a type-1 root: every plane tree, typed by depth parity.
std::vector<Forest> alternating_trees(std::size_t max_size) {
    std::vector<Forest> out;
    for (const auto& t : enumerate_plane_trees(max_size)) {
        Forest a(2, true);
        for (std::size_t v = 0; v < t.size(); ++v) {
            int type = t.depth(v) % 2 == 0 ? 1 : 2;
            if (v == 0)
                a.add_root(type);
            else
                a.add_child(static_cast<std::size_t>(t.parent(v)), type);
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::string one_line(const Forest& f) {
    std::string s = dump_text(f);
    s.pop_back();
    for (char& c : s)
        if (c == '\n') c = ' ';
    return s;
}

}  // namespace

TEST_SUITE("projection") {
    TEST_CASE("projection examples") {
        auto t = make({{"", 1}, {"1", 2}, {"1.1", 1}, {"2", 2}}, 2);
        auto p = project(t, 1);
        CHECK(p.reduced == make({{"1", 1}, {"1.1", 1}}));
        CHECK(p.n(0, 2) == 2);
        CHECK(p.n(1, 2) == 0);
        CHECK_THROWS_AS(p.n(0, 1), RangeError);

        auto mono = make({{"", 1}, {"1", 1}, {"1.1", 1}, {"2", 1}});
        auto q = project(mono, 1);
        CHECK(q.reduced == mono.as_forest());
        CHECK(q.n_counters.empty());

        auto below = make({{"", 2}, {"1", 1}, {"2", 1}}, 2);
        auto r = project(below, 1);
        CHECK(r.reduced == make({{"1", 1}, {"2", 1}}));
        CHECK(r.nhat(0, 2) == 1);
        CHECK(r.n(0, 2) == 0);
        CHECK_THROWS_AS(project(below, 3), RangeError);
    }

    TEST_CASE("collapse examples") {
        auto f = make({{"1", 1}, {"1.1", 2}, {"2", 1}}, 3);
        auto c = collapse_type(f, 3);
        CHECK(c == make({{"1", 1}, {"1.1", 2}, {"2", 1}}, 2));
        auto chain = make({{"", 1}, {"1", 3}, {"1.1", 2}}, 3);
        CHECK(collapse_type(chain, 3) == make({{"", 1}, {"1", 2}}, 2));
        CHECK_THROWS_AS(collapse_type(make({{"", 1}}), 1), DomainError);
    }

    TEST_CASE("collapse composes to projection") {
        Rng rng(21);
        for (const auto& t : enumerate_plane_trees(7)) {
            auto two = testing::retype(t, 2, rng);
            CHECK(collapse_type(two, 2).as_forest() == project(two, 1).reduced);
            auto three = testing::retype(t, 3, rng);
            CHECK(collapse_type(collapse_type(three, 3), 2).as_forest() == project(three, 1).reduced);
            // Removing type 1 first renumbers type 3 to 2.
            auto step = collapse_type(collapse_type(three, 1), 1);
            auto direct = project(three, 3).reduced;
            CHECK(step.as_forest() == direct);
        }
    }

    TEST_CASE("conservation on enumerated and sampled forests") {
        Rng rng(22);
        for (const auto& t : enumerate_plane_trees(8)) {
            auto typed = testing::retype(t, 3, rng);
            check_conservation(typed);
            if (typed.size() > 1) check_conservation(testing::root_subtrees(typed));
        }
        for (const char* name : {"finite_table_reference.json", "heavy_alpha15.json"}) {
            auto spec = spec_file(name);
            Rng r(23);
            check_conservation(sample_forest(ChildSampler(spec), {1, 2}, 50'000, 10'000'000, r).forest);
        }
    }

    TEST_CASE("streamed counters match the stored forest") {
        for (const char* name : {"alternating_geometric.json", "finite_table_reference.json", "heavy_alpha15.json"}) {
            auto spec = spec_file(name);
            ChildSampler s(spec);
            for (int i = 1; i <= spec.d(); ++i) {
                const std::size_t count = 2000;
                Rng a(derive_seed(31, static_cast<std::uint64_t>(i))), b = a;
                auto stream = nij_stream(s, i, count, a, 50'000'000);
                ForestGrower g(s, {i});
                while (g.forest().count_type(i) < count || !g.between_components()) g.step(b);
                auto p = project(g.forest(), i);
                REQUIRE(stream.others == p.others);
                const std::size_t w = p.others.size();
                for (std::size_t k = 0; k < count * w; ++k) REQUIRE(stream.counters[k] == p.n_counters[k]);
            }
        }
    }

    TEST_CASE("Janson-Stefansson examples") {
        auto single = js_bijection(make({{"", 1}}, 2));
        CHECK(single == make({{"", 1}}));

        auto t = make({{"", 1}, {"1", 2}, {"1.1", 1}, {"1.2", 1}}, 2);
        auto g = js_bijection(t);
        CHECK(g.size() == 4);
        CHECK(leaves(g) == 3);
        CHECK(g == make({{"", 1}, {"1", 1}, {"2", 1}, {"3", 1}}));

        CHECK_THROWS_AS(js_bijection(make({{"", 1}, {"1", 1}}, 2)), StructuralError);
        CHECK_THROWS_AS(js_bijection(make({{"", 2}}, 2)), StructuralError);
    }

    TEST_CASE("Janson-Stefansson is a size-preserving bijection") {
        for (auto orientation : {JsOrientation::extra_first, JsOrientation::extra_last}) {
            std::map<std::size_t, std::set<std::string>> images;
            for (const auto& t : alternating_trees(9)) {
                auto g = js_bijection(t, orientation);
                REQUIRE(g.size() == t.size());
                REQUIRE(leaves(g) == t.count_type(1));
                REQUIRE(js_inverse(g, orientation) == t);
                images[t.size()].insert(dump_text(g));
            }
            // Plane trees with n vertices: Catalan(n - 1).
            std::vector<std::size_t> catalan = {1, 1, 2, 5, 14, 42, 132, 429, 1430};
            for (std::size_t n = 1; n <= 9; ++n) CHECK(images[n].size() == catalan[n - 1]);
        }
    }

    TEST_CASE("Janson-Stefansson orientation is frozen") {
        std::ifstream in(MGW_GOLDEN_DIR "/js_extra_first.txt");
        REQUIRE(in);
        std::string line;
        std::size_t k = 0;
        auto trees = alternating_trees(5);
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            REQUIRE(k < trees.size());
            CHECK(line == one_line(trees[k]) + " -> " + one_line(js_bijection(trees[k])));
            ++k;
        }
        CHECK(k == trees.size());
    }

    TEST_CASE("nu offspring law") {
        std::vector<Rational> mu2(40);
        for (std::size_t z = 0; z < mu2.size(); ++z) mu2[z] = Rational(1, 2) / (BigInt(1) << z);
        auto nu = nu_offspring(Rational(1, 2), mu2);
        CHECK(nu[0] == Rational(1, 2));
        for (std::size_t z = 1; z < nu.size(); ++z) CHECK(nu[z] == Rational(1, 2) * mu2[z - 1]);
        Rational sum = 0, mean = 0;
        for (std::size_t z = 0; z < nu.size(); ++z) {
            sum += nu[z];
            mean += nu[z] * static_cast<long long>(z);
        }
        CHECK(to_double(1 - sum) < 1e-12);
        CHECK(to_double(mean) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK_THROWS_AS(nu_offspring(Rational(1), mu2), DomainError);
        CHECK_THROWS_AS(nu_offspring(0.0, std::vector<double>{1.0}), DomainError);
    }

    TEST_CASE("pushforward laws") {
        auto spec = alt();
        auto law = enumerate_trees(spec, 1, 6);
        std::vector<Rational> mu2(8);
        for (std::size_t z = 0; z < mu2.size(); ++z) mu2[z] = spec.prob_exact(2, {static_cast<int>(z), 0});
        auto nu = nu_offspring(Rational(1, 2), mu2);
        std::map<std::string, Rational> push;
        for (const auto& e : law.entries) push[dump_text(js_bijection(e.tree))] += e.exact;
        for (const auto& g : enumerate_plane_trees(6)) {
            Rational expect = monotype_tree_probability(nu, g);
            CHECK(push[dump_text(g)] == expect);
        }

        // The reduced forest law: local configurations against the generating-function route.
        auto local = local_reduced_law(spec, 6, 40);
        auto series = reduced_offspring_rational(spec, 1, 7);
        for (std::size_t c = 0; c < local.pmf.size(); ++c) CHECK(std::abs(to_double(local.pmf[c] - series[c])) < 1e-11);
        CHECK(to_double(local.dropped) < 1e-11);
    }
}
