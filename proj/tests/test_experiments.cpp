#include <doctest.h>

#include <cmath>

#include "mgw/constants.hpp"
#include "mgw/errors.hpp"
#include "mgw/experiments.hpp"

using namespace mgw;
using nlohmann::json;

namespace {

OffspringSpec alt() { return alternating_geometric_spec(Rational(1, 2), Rational(1, 2)); }
OffspringSpec mono() { return monotype_geometric_spec(Rational(1, 2)); }
OffspringSpec spec_file(const std::string& name) { return OffspringSpec::load(std::string(MGW_SPEC_DIR) + "/" + name); }

double estimate(const ExperimentReport& r, const std::string& label) {
    const auto* s = r.find(label);
    REQUIRE(s != nullptr);
    return s->estimate;
}

}  // namespace

TEST_SUITE("experiments") {
    TEST_CASE("summary helpers") {
        CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
        CHECK(quantile({4, 1, 3, 2}, 0.9) == doctest::Approx(3.7));
        CHECK(quantile({7}, 0.3) == 7);
        CHECK(std::isnan(quantile({}, 0.5)));
        CHECK(ks_statistic({1, 2, 3}, {4, 5}) == 1.0);
        CHECK(ks_statistic({1, 2, 3}, {3, 2, 1}) == 0.0);
        CHECK(ks_statistic({1, 2}, {2, 3}) == doctest::Approx(0.5));
        CHECK(ls_slope({1, 2, 3}, {2, 4, 6}) == doctest::Approx(2.0));
        CHECK(std::isnan(ls_slope({1, 1}, {2, 3})));
        CHECK(lag1_autocorrelation({1, -1, 1, -1}) == doctest::Approx(-0.75));
        CHECK(sup_linear_deviation({1, 2, 3}, 2.0, 1.0) == doctest::Approx(0.5));
        CHECK(sup_linear_deviation({0, 0, 1, 1}, 1.0, 1.0) == doctest::Approx(2.0 / 3));
    }

    TEST_CASE("report rows and serialization") {
        ExperimentReport r;
        r.name = "demo";
        r.param("n", std::int64_t{3});
        r.param("spec", std::string("a\"b"));
        Statistic s;
        s.label = "x";
        s.estimate = 0.5;
        s.target = 0.0;
        s.tolerance = 0.4;
        CHECK_FALSE(r.add(s).pass);
        s.label = "y";
        s.estimate = no_value;
        s.target = no_value;
        s.informational = true;
        CHECK(r.add(s).pass);
        CHECK_FALSE(r.passed());

        auto j = json::parse(r.to_json());
        CHECK(j["name"] == "demo");
        CHECK(j["parameters"]["n"] == 3);
        CHECK(j["parameters"]["spec"] == "a\"b");
        CHECK(j["statistics"][0]["pass"] == false);
        CHECK(j["statistics"][1]["estimate"].is_null());
        CHECK_FALSE(j.contains("runtime_seconds"));
        r.include_runtime = true;
        CHECK(json::parse(r.to_json()).contains("runtime_seconds"));

        auto csv = r.to_csv();
        CHECK(csv.rfind("label,anchor,estimate,std_error,target,tolerance,pass,informational,note\n", 0) == 0);
        CHECK(csv.find("\nx,,0.5,,0,0.40000000000000002,0,0,\n") != std::string::npos);
    }

    TEST_CASE("types convergence") {
        RunOptions opt;
        auto one = types_convergence(mono(), 1, 1000, 5, opt);
        CHECK(estimate(one, "d_max") <= 2.0 / 1000);
        auto small = types_convergence(alt(), 1, 1, 3, opt);
        CHECK(estimate(small, "d_max") <= 1.0);
        auto r = types_convergence(spec_file("finite_table_reference.json"), 2, 20000, 20, opt);
        CHECK(r.passed());
        CHECK_THROWS_AS(types_convergence(alt(), 3, 10, 1, opt), RangeError);
        CHECK_THROWS_AS(types_convergence(alt(), 1, 0, 1, opt), RangeError);
    }

    TEST_CASE("height coupling in the single-type case") {
        // With one type the reduced forest is the forest itself, so the statistic
        // is the largest one-step change of the height process.
        RunOptions opt;
        const std::uint64_t n = 2000;
        auto r = height_coupling(mono(), 1, {n}, 1, opt);
        Rng rng = opt.stream(0, 0);
        ChildSampler s(mono());
        ForestGrower g(s, {1});
        while (g.forest().size() < n + 2) g.step(rng);
        double jump = 0;
        for (std::size_t k = 0; k <= n; ++k)
            jump = std::max(jump, std::abs(double(g.forest().depth(k)) - double(g.forest().depth(k + 1))));
        CHECK(estimate(r, "e_median_n2000") == doctest::Approx(jump / std::sqrt(double(n))));
        CHECK(estimate(r, "ancestor_median_n2000") == 0.0);
    }

    TEST_CASE("height coupling trend") {
        RunOptions opt;
        auto r = height_coupling(alt(), 1, {1000, 100000}, 20, opt);
        CHECK(r.find("e_median_n1000")->informational);
        CHECK(r.find("e_median_decreasing")->pass);
        CHECK(r.find("max_height_below_bound")->pass);
    }

    TEST_CASE("max height tail") {
        RunOptions opt;
        auto r = max_height_tail(alt(), 1, {32}, 100000, opt);
        CHECK(r.find("calibration_d1_n32")->pass);
        CHECK(r.find("sanity_n1")->pass);
        CHECK(r.find("n_tail_n32") != nullptr);

        opt.tolerances["calibration_d1"] = 0.0;
        auto aborted = max_height_tail(alt(), 1, {32}, 1000, opt);
        CHECK(aborted.aborted);
        CHECK_FALSE(aborted.passed());
        CHECK(aborted.statistics.size() == 1);
    }

    TEST_CASE("component index scaling") {
        RunOptions opt;
        auto d1 = upsilon_scaling(mono(), 1, 2000, 30, opt);
        CHECK(estimate(d1, "ks_matched") == 0.0);
        auto r = upsilon_scaling(alt(), 1, 20000, 100, opt);
        CHECK(r.find("ks_matched")->pass);
        CHECK(r.find("ks_independent")->informational);
    }

    TEST_CASE("deleted-vertex counters") {
        RunOptions opt;
        CHECK(nij_moments(mono(), 1, 1000, opt).statistics.empty());
        auto r = nij_moments(alt(), 1, 20000, opt);
        CHECK(r.passed());
        CHECK(r.find("mean_n_12") != nullptr);
        CHECK(r.find("lag1_autocorrelation_12") != nullptr);
        auto heavy = nij_moments(spec_file("heavy_alpha15.json"), 2, 20000, opt);
        CHECK(heavy.find("mean_n_21") != nullptr);
    }

    TEST_CASE("size tail exponent") {
        RunOptions opt;
        auto r = size_tail_exponent(alt(), 1, {25, 50, 100, 200}, 200000, opt);
        CHECK(r.find("calibration_d1_slope")->pass);
        CHECK(r.passed());
        CHECK_THROWS_AS(size_tail_exponent(alt(), 1, {25}, 10, opt), ValidationError);
    }

    TEST_CASE("conditioned profile") {
        RunOptions opt;
        auto r = conditioned_profile(alt(), 1, {10, 20}, 30, opt);
        CHECK(r.find("lambda_median_n20") != nullptr);
        CHECK(r.find("acceptance_exponent") != nullptr);
        CHECK_FALSE(r.find("size_ratio_outside")->informational);
        CHECK_THROWS_AS(conditioned_profile(spec_file("finite_table_reference.json"), 1, {10}, 3, opt), DomainError);
        CHECK_THROWS_AS(conditioned_profile(alternating_geometric_spec(Rational(1, 2), Rational(1, 2)), 1, {0}, 3, opt), SupportError);
        opt.max_tries = 5;
        CHECK_THROWS_AS(conditioned_profile(alt(), 1, {200}, 3, opt), BudgetError);
    }

    TEST_CASE("reports do not depend on the worker count") {
        RunOptions one, many;
        many.workers = 3;
        auto spec = spec_file("heavy_alpha15.json");
        CHECK(types_convergence(spec, 1, 5000, 7, one).to_json() == types_convergence(spec, 1, 5000, 7, many).to_json());
        CHECK(height_coupling(alt(), 1, {500, 2000}, 7, one).to_json() == height_coupling(alt(), 1, {500, 2000}, 7, many).to_json());
        CHECK(max_height_tail(alt(), 1, {16}, 10000, one).to_json() == max_height_tail(alt(), 1, {16}, 10000, many).to_json());
        CHECK(upsilon_scaling(alt(), 1, 2000, 9, one).to_json() == upsilon_scaling(alt(), 1, 2000, 9, many).to_json());
        CHECK(conditioned_profile(alt(), 1, {10, 20}, 9, one).to_json() == conditioned_profile(alt(), 1, {10, 20}, 9, many).to_json());
        RunOptions other;
        other.seed = 5;
        CHECK(types_convergence(spec, 1, 5000, 7, one).to_json() != types_convergence(spec, 1, 5000, 7, other).to_json());
    }
}
