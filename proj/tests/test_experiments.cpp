#include <doctest.h>

#include "rotorwalk/experiments.hpp"

using namespace rotorwalk;

namespace {

ExperimentReport run(const Json& j, int threads = 1) { return run_experiment(ExperimentSpec::from_json(j), {threads, {}}); }

bool passed(const ExperimentReport& r, const std::string& check) {
    for (const auto& c : r.checks)
        if (c.name == check) return c.passed;
    FAIL("no check named " << check);
    return false;
}

}  // namespace

TEST_CASE("spec parsing") {
    Json j = {{"experiment", "sigma_bijection"}, {"family", "corpus"}, {"params", {{"name", "K3"}}}, {"seed", 1}};
    auto spec = ExperimentSpec::from_json(j);
    CHECK(spec.seed_given);
    CHECK(ExperimentSpec::from_json(spec.to_json()).to_json() == spec.to_json());

    Json bad = j;
    bad["radii"] = {{"s", 3}, {"r", 2}};
    CHECK_THROWS_AS(ExperimentSpec::from_json(bad), SpecError);
    bad["radii"] = {{"r_ladder", {3, 2}}};
    CHECK_THROWS_AS(ExperimentSpec::from_json(bad), SpecError);
    Json unknown = j;
    unknown["experiment"] = "nope";
    CHECK_THROWS_AS(run(unknown), SpecError);
    Json unseeded = j;
    unseeded.erase("seed");
    CHECK_THROWS_AS(run(unseeded), SpecError);
}

TEST_CASE("sigma is a permutation of forests") {
    auto r = run({{"experiment", "sigma_bijection"}, {"family", "corpus"}, {"params", {{"name", "K3"}}}, {"seed", 1}});
    CHECK(r.verdict == Verdict::Pass);
    CHECK(r.estimates["forest_count"] == 3);
    auto p = run({{"experiment", "sigma_bijection"}, {"family", "corpus"}, {"params", {{"name", "P3"}}}, {"seed", 1}});
    CHECK(p.verdict == Verdict::Pass);
}

TEST_CASE("mean odometer over forests equals the Green function") {
    for (const char* name : {"P3", "K3", "grid2x3"}) {
        auto r = run({{"experiment", "mean_odometer_equals_green"},
                      {"family", "corpus"},
                      {"params", {{"name", name}}},
                      {"seed", 1}});
        CHECK(r.verdict == Verdict::Pass);
    }
    auto r = run({{"experiment", "mean_odometer_equals_green"},
                  {"family", "bary"},
                  {"params", {{"b", 2}, {"depth", 3}}},
                  {"seed", 1}});
    CHECK(r.verdict == Verdict::Pass);
}

TEST_CASE("Cesaro limit, including a non-forest start") {
    auto r = run({{"experiment", "cesaro_limit"},
                  {"family", "corpus"},
                  {"params", {{"name", "P3"}}},
                  {"seed", 2},
                  {"options", {{"configs", 0}, {"explicit", {"v0:v1,v1:v0"}}}}});
    CHECK(r.verdict == Verdict::Pass);
    auto k4 = run({{"experiment", "cesaro_limit"},
                   {"family", "corpus"},
                   {"params", {{"name", "K4"}}},
                   {"seed", 2},
                   {"options", {{"configs", 30}}}});
    CHECK(k4.verdict == Verdict::Pass);
}

TEST_CASE("S3 probability is one when r = R") {
    auto r = run({{"experiment", "s3_probability"},
                  {"family", "bary"},
                  {"params", {{"b", 2}}},
                  {"lazy", true},
                  {"radii", {{"s", 0}, {"R", 8}}},
                  {"samples", 200},
                  {"seed", 3}});
    CHECK(passed(r, "whole trajectory stays inside B_R (r = R)"));
}

TEST_CASE("finite-graph stationarity") {
    auto r = run({{"experiment", "stationarity_tv"},
                  {"family", "bary"},
                  {"params", {{"b", 2}}},
                  {"radii", {{"s", 1}, {"R", 5}}},
                  {"samples", 2000},
                  {"seed", 4},
                  {"tolerances", {{"max_z", 3}}}});
    CHECK(r.verdict == Verdict::Pass);
}

TEST_CASE("tree lemmas and the odometer bound on small trees") {
    auto l = run({{"experiment", "tree_visit_lemmas"},
                  {"family", "tree-ray"},
                  {"params", {{"b", 2}, {"depth", 5}, {"ray", 5}}},
                  {"samples", 50},
                  {"seed", 5}});
    CHECK(l.verdict == Verdict::Pass);
    auto p = run({{"experiment", "tree_visit_lemmas"}, {"family", "corpus"}, {"params", {{"name", "P3"}}},
                  {"samples", 5}, {"seed", 5}});
    CHECK(p.verdict == Verdict::Pass);
    auto b = run({{"experiment", "owusf_odometer_bound"},
                  {"family", "bary"},
                  {"params", {{"b", 2}, {"depth", 6}}},
                  {"radii", {{"s", 2}, {"r", 4}}},
                  {"samples", 500},
                  {"seed", 6}});
    CHECK(b.verdict == Verdict::Pass);
}

TEST_CASE("results do not depend on the thread count") {
    Json j = {{"experiment", "owusf_odometer_bound"},
              {"family", "grid"},
              {"params", {{"dim", 2}, {"radius", 5}}},
              {"radii", {{"s", 1}, {"r", 3}}},
              {"samples", 300},
              {"seed", 9}};
    auto a = run(j, 1), b = run(j, 4);
    REQUIRE(a.series.size() == b.series.size());
    for (std::size_t i = 0; i < a.series.size(); ++i) CHECK(a.series_csv(a.series[i]) == b.series_csv(b.series[i]));

    Json o = {{"experiment", "occupation_convergence"},
              {"family", "grid"},
              {"params", {{"dim", 2}, {"radius", 4}}},
              {"walks", 64},
              {"seed", 9},
              {"options", {{"initial", {{"wilson", 6}, {"random", 3}}}, {"lower_bound_radii", {1, 2}}}}};
    auto c = run(o, 1), d = run(o, 3);
    for (std::size_t i = 0; i < c.series.size(); ++i) CHECK(c.series_csv(c.series[i]) == d.series_csv(d.series[i]));
}

TEST_CASE("family builder") {
    CHECK(build_family("grid", {{"dim", 2}, {"radius", 2}}).graph.vertex_count() == 25);
    CHECK(build_family("tree-ray", {{"b", 2}}, 3).graph.vertex_count() == 7 + 4);
    CHECK_THROWS_AS(build_family("bogus", Json::object()), SpecError);
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(3) == "3");
}
