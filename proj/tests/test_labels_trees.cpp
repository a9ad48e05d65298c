#include <doctest.h>

#include <numeric>

#include "helpers.hpp"
#include "mgw/errors.hpp"
#include "mgw/forest.hpp"
#include "mgw/offspring.hpp"
#include "mgw/oracle.hpp"
#include "mgw/sampler.hpp"

using namespace mgw;
using testing::make;

namespace {

std::vector<std::string> labels(const Forest& f) {
    std::vector<std::string> out;
    for (const auto& u : depth_first_order(f)) out.push_back(format_label(u));
    return out;
}

void check_invariants(const Forest& f) {
    // Depth-first order is strictly increasing.
    auto order = depth_first_order(f);
    for (std::size_t k = 1; k < order.size(); ++k) REQUIRE(label_less(order[k - 1], order[k]));

    auto h = height_process(f, f.is_tree() ? HeightMode::tree : HeightMode::forest);
    auto ups = component_index_series(f);
    for (std::size_t k = 1; k < h.size(); ++k) REQUIRE(h[k] - h[k - 1] <= 1);
    if (!f.is_tree())
        for (std::size_t k = 0; k < h.size(); ++k) {
            bool new_component = k == 0 || ups[k] != ups[k - 1];
            REQUIRE((h[k] == 0) == new_component);
        }

    std::vector<std::int64_t> total(f.size(), 0);
    for (int i = 1; i <= f.d(); ++i) {
        auto lambda = lambda_series(f, i);
        auto g = g_series(f, i);
        REQUIRE(g.size() == f.count_type(i) + 1);
        REQUIRE(g.back() == static_cast<std::int64_t>(f.size()));
        for (std::size_t n = 0; n + 1 < g.size(); ++n) REQUIRE(lambda[static_cast<std::size_t>(g[n])] == static_cast<std::int64_t>(n) + 1);
        for (std::size_t k = 0; k < f.size(); ++k) total[k] += lambda[k];
    }
    for (std::size_t k = 0; k < f.size(); ++k) REQUIRE(total[k] == static_cast<std::int64_t>(k) + 1);
}

}  // namespace

TEST_SUITE("labels_trees") {
    TEST_CASE("depth-first order") {
        CHECK(labels(make({{"2", 1}, {"1", 1}, {"1.1", 1}})) == std::vector<std::string>{"1", "1.1", "2"});
        CHECK(labels(make({{"", 1}, {"1", 1}, {"1.1", 1}, {"2", 1}})) == std::vector<std::string>{"", "1", "1.1", "2"});
        CHECK(labels(make({{"1", 1}})) == std::vector<std::string>{"1"});
    }

    TEST_CASE("label order and prefixes") {
        CHECK(label_less({}, {1}));
        CHECK(label_less({1, 5}, {2}));
        CHECK_FALSE(label_less({2}, {1, 5}));
        CHECK(is_prefix({1}, {1, 2}));
        CHECK(is_prefix({1, 2}, {1, 2}));
        CHECK_FALSE(is_prefix({2}, {1, 2}));
        CHECK(concat({1}, {2, 3}) == Label{1, 2, 3});
        CHECK(parse_label("1.12.3") == Label{1, 12, 3});
        CHECK_THROWS_AS(parse_label("1..2"), StructuralError);
        CHECK_THROWS_AS(parse_label("0"), StructuralError);
    }

    TEST_CASE("malformed forests") {
        CHECK_THROWS_AS(make({{"1", 1}, {"1", 1}}), StructuralError);
        CHECK_THROWS_AS(make({{"1", 1}, {"1.2", 1}}), StructuralError);
        CHECK_THROWS_AS(make({{"2", 1}}), StructuralError);
        CHECK_THROWS_AS(make({{"", 3}}, 2), StructuralError);
        CHECK_THROWS_AS(make({{"", 1}, {"1", 1}, {"2", 1}}).add_child(1, 1), StructuralError);
    }

    TEST_CASE("height process") {
        CHECK(height_process(make({{"1", 1}, {"1.1", 1}, {"2", 1}}), HeightMode::forest) == std::vector<std::int64_t>{0, 1, 0});
        CHECK(height_process(make({{"", 1}, {"1", 1}, {"1.1", 1}, {"2", 1}}), HeightMode::tree) ==
              std::vector<std::int64_t>{0, 1, 2, 1});
        CHECK(height_process(make({{"", 1}}), HeightMode::tree) == std::vector<std::int64_t>{0});
        CHECK_THROWS_AS(height_process(make({{"1", 1}, {"2", 1}}), HeightMode::tree), ModeError);
    }

    TEST_CASE("component index") {
        auto f = make({{"1", 1}, {"1.1", 1}, {"2", 1}});
        CHECK(component_index_series(f) == std::vector<std::int64_t>{1, 1, 2});
        CHECK(component_index_series(make({{"1", 1}, {"2", 1}, {"3", 1}})) == std::vector<std::int64_t>{1, 2, 3});
        CHECK(component_index_at(f, f.size()) == 2);
        CHECK(component_index_at(f, 1) == 1);
    }

    TEST_CASE("type counts and inverses") {
        auto t = make({{"", 1}, {"1", 2}, {"1.1", 1}, {"2", 2}}, 2);
        CHECK(lambda_series(t, 1) == std::vector<std::int64_t>{1, 1, 2, 2});
        CHECK(g_at(t, 1, 0) == 0);
        CHECK(g_at(t, 1, 1) == 2);
        CHECK(g_at(t, 1, 2) == 4);
        CHECK_THROWS_AS(g_at(t, 1, 3), RangeError);
        CHECK_THROWS_AS(lambda_series(t, 3), RangeError);

        auto mono = make({{"", 1}, {"1", 1}, {"2", 1}});
        CHECK(lambda_series(mono, 1) == std::vector<std::int64_t>{1, 2, 3});
        CHECK(g_series(mono, 1) == std::vector<std::int64_t>{0, 1, 2, 3});
        auto none = make({{"", 2}, {"1", 2}}, 2);
        CHECK(lambda_series(none, 1) == std::vector<std::int64_t>{0, 0});
    }

    TEST_CASE("ancestor type counts") {
        auto t = make({{"", 1}, {"1", 2}, {"1.1", 1}}, 2);
        CHECK(ancestor_type_count(t, {1, 1}, 2) == 1);
        CHECK(ancestor_type_count(t, {}, 1) == 0);
        auto chain = make({{"", 1}, {"1", 1}, {"1.1", 1}, {"1.1.1", 1}, {"1.1.1.1", 1}});
        CHECK(ancestor_type_count(chain, {1, 1, 1, 1}, 1) == 4);
        CHECK_THROWS_AS(ancestor_type_count(chain, {2}, 1), LookupError);
    }

    TEST_CASE("subtree and prune") {
        auto t = make({{"", 1}, {"1", 1}, {"1.1", 1}});
        CHECK(subtree(t, {1}) == make({{"", 1}, {"1", 1}}));
        CHECK(prune(t, {1}) == make({{"", 1}, {"1", 1}}));
        CHECK(subtree(make({{"", 1}}), {}) == make({{"", 1}}));
        auto f = make({{"1", 2}, {"1.1", 1}, {"1.2", 2}, {"2", 1}}, 2);
        CHECK(subtree(f, {1}) == make({{"", 2}, {"1", 1}, {"2", 2}}, 2));
        CHECK(prune(f, {1}) == make({{"1", 2}, {"2", 1}}, 2));
        CHECK(f.find({2}) == std::optional<std::size_t>(3));
        CHECK_FALSE(f.find({3}).has_value());
    }

    TEST_CASE("text serialization") {
        auto f = make({{"1", 2}, {"1.1", 2}, {"1.2", 1}, {"2", 1}}, 2);
        CHECK(dump_text(f) == "1:2\n1.1:2\n1.2:1\n2:1\n");
        CHECK(load_text(dump_text(f)) == f);
        auto t = make({{"", 1}, {"1", 1}});
        CHECK(dump_text(t) == ":1\n1:1\n");
        CHECK(load_text(dump_text(t)) == t);
        CHECK(load_text("# comment\n:1\r\n1:1\n") == t);
        CHECK(load_text(":1\n", 3).d() == 3);
        CHECK_THROWS_AS(load_text("1\n"), StructuralError);
        CHECK_THROWS_AS(load_text("1:x\n"), StructuralError);
    }

    TEST_CASE("invariants on every plane tree and forest up to 8 vertices") {
        Rng rng(7);
        std::size_t checked = 0;
        for (const auto& t : enumerate_plane_trees(8)) {
            for (int d : {1, 2, 3}) {
                auto typed = testing::retype(t, d, rng);
                check_invariants(typed);
                if (typed.size() > 1) check_invariants(testing::root_subtrees(typed));
                ++checked;
            }
        }
        CHECK(checked == 3 * (1 + 1 + 2 + 5 + 14 + 42 + 132 + 429));
    }

    TEST_CASE("invariants on sampled forests") {
        for (const auto& spec : {alternating_geometric_spec(Rational(1, 2), Rational(1, 2)),
                                 OffspringSpec::load(MGW_SPEC_DIR "/finite_table_reference.json"),
                                 OffspringSpec::load(MGW_SPEC_DIR "/heavy_alpha15.json")}) {
            Rng rng(11);
            auto s = sample_forest(ChildSampler(spec), {1}, 20'000, 10'000'000, rng);
            REQUIRE(s.status == SampleStatus::ok);
            check_invariants(s.forest);
            CHECK(load_text(dump_text(s.forest), spec.d()) == s.forest);
        }
    }
}
