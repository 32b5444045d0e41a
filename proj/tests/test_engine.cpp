#include <doctest.h>

#include <numeric>
#include <sstream>

#include "rotorwalk/engine.hpp"
#include "rotorwalk/experiments.hpp"
#include "rotorwalk/forest.hpp"
#include "rotorwalk/graph.hpp"
#include "rotorwalk/green.hpp"
#include "rotorwalk/rng.hpp"

using namespace rotorwalk;

namespace {

RotorConfig random_config(const Graph& g, const SinkSet& z, Rng& rng) {
    RotorConfig rho(g.vertex_count(), kNoRotor);
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        if (!z.contains(static_cast<VertexId>(v)))
            rho[v] = static_cast<std::int32_t>(uniform_index(rng, g.degree(static_cast<VertexId>(v))));
    return rho;
}

VertexId id(const Graph& g, const char* label) { return *g.find_label(label); }

}  // namespace

TEST_CASE("single steps") {
    auto p3 = corpus::path3();
    RotorConfig rho = parse_config(p3.graph, p3.sink, "v1:v0");
    VertexId x = step(p3.graph, p3.sink, 1, rho);
    CHECK(p3.graph.label(x) == "v2");
    CHECK(p3.graph.neighbor(1, rho[1]) == 2);

    RotorConfig leaf = parse_config(p3.graph, p3.sink, "v0:v1");
    CHECK(step(p3.graph, p3.sink, 0, leaf) == 1);
    CHECK(leaf[0] == 0);

    Graph k3({{1, 2}, {2, 0}, {0, 1}}, {"a", "b", "c"});
    SinkSet none(3, {});
    RotorConfig r3 = parse_config(k3, none, "a:c");
    CHECK(k3.label(step(k3, none, 0, r3)) == "b");
    CHECK(k3.label(k3.neighbor(0, r3[0])) == "b");
}

TEST_CASE("hand traces of walks to the sink") {
    auto p3 = corpus::path3();
    RotorConfig rho = parse_config(p3.graph, p3.sink, "v0:v1,v1:v2");
    std::vector<TraceEntry> trace;
    WalkOptions opt;
    opt.trace = &trace;
    auto out = run_to_sink(p3.graph, p3.sink, 0, rho, opt);
    CHECK(out.status == WalkStatus::Terminated);
    CHECK(out.steps == 4);
    CHECK(out.odometer[0] == 2);
    CHECK(out.odometer[1] == 2);
    CHECK(out.sigma == rho);
    std::vector<VertexId> path;
    for (const auto& e : trace) path.push_back(e.position);
    CHECK(path == std::vector<VertexId>{1, 0, 1, 2});
    CHECK(out.first_visit[0] == 0);
    CHECK(out.last_visit[0] == 2);
    CHECK(out.first_visit[1] == 1);
    CHECK(out.last_visit[1] == 3);
    CHECK(out.first_visit[2] == 4);
    CHECK(out.edge_count(p3.graph, 1, 0) == 1);
    CHECK(out.edge_count(p3.graph, 1, 2) == 1);

    Graph edge({{1}, {0}}, {"a", "z"});
    SinkSet zs(2, {1});
    auto single = run_to_sink(edge, zs, 0, parse_config(edge, zs, ""));
    CHECK(single.odometer[0] == 1);
    CHECK(single.steps == 1);

    auto k3 = corpus::triangle();
    auto o3 = run_to_sink(k3.graph, k3.sink, 0, parse_config(k3.graph, k3.sink, "a:b,b:z"));
    CHECK(o3.steps == 1);
    CHECK(o3.odometer[id(k3.graph, "a")] == 1);
    CHECK(o3.odometer[id(k3.graph, "b")] == 0);
    CHECK(o3.first_visit[id(k3.graph, "b")] == kNeverVisited);
    CHECK(format_config(k3.graph, o3.sigma) == "a:z,b:z");
}

TEST_CASE("walk invariants on random configurations") {
    Rng rng = make_stream(99, 0);
    for (const Domain& d : {corpus::k4(), corpus::grid2x3(), build_grid_box(2, 3), build_bary_tree(2, 4)}) {
        for (int rep = 0; rep < 20; ++rep) {
            RotorConfig rho = random_config(d.graph, d.sink, rng);
            auto out = run_to_sink(d.graph, d.sink, d.start, rho);
            REQUIRE(out.status == WalkStatus::Terminated);
            CHECK(std::accumulate(out.odometer.begin(), out.odometer.end(), std::uint64_t{0}) == out.steps);
            // visits in = visits out, except one extra out at the start and one extra in at the end
            for (std::size_t v = 0; v < d.graph.vertex_count(); ++v) {
                auto x = static_cast<VertexId>(v);
                std::uint64_t in = 0, outgoing = 0;
                for (std::size_t k = 0; k < d.graph.degree(x); ++k) {
                    VertexId y = d.graph.neighbor(x, k);
                    outgoing += out.edge_count(d.graph, x, y);
                    in += out.edge_count(d.graph, y, x);
                }
                std::int64_t balance = static_cast<std::int64_t>(in) - static_cast<std::int64_t>(outgoing);
                std::int64_t expect = (x == out.final_position) - (x == d.start);
                CHECK(balance == expect);
                if (!d.sink.contains(x)) CHECK(outgoing == out.odometer[v]);
                // rotor fairness: out-edge counts differ by at most one
                if (!d.sink.contains(x) && d.graph.degree(x) > 0) {
                    std::uint64_t lo = UINT64_MAX, hi = 0;
                    for (std::size_t k = 0; k < d.graph.degree(x); ++k) {
                        auto c = out.edge_util[d.graph.edge_offset(x) + k];
                        lo = std::min(lo, c);
                        hi = std::max(hi, c);
                    }
                    CHECK(hi - lo <= 1);
                    std::uint64_t turns = out.odometer[v] % d.graph.degree(x);
                    CHECK(out.sigma[v] == static_cast<std::int32_t>((rho[v] + turns) % d.graph.degree(x)));
                }
            }
            auto again = run_to_sink(d.graph, d.sink, d.start, rho);
            CHECK(again.odometer == out.odometer);
            CHECK(again.sigma == out.sigma);
        }
    }
}

TEST_CASE("odometer decreases as the sink grows") {
    Rng rng = make_stream(5, 1);
    auto d = build_grid_box(2, 4);
    for (int r = 1; r < 4; ++r) {
        Truncation t = truncate(d.graph, d.start, r);
        std::vector<VertexId> bigger = d.sink.vertices();
        for (VertexId v : t.domain.sink.vertices()) bigger.push_back(t.to_parent[v]);
        SinkSet z2(d.graph.vertex_count(), bigger);
        for (int rep = 0; rep < 10; ++rep) {
            RotorConfig rho = random_config(d.graph, d.sink, rng);
            auto full = run_to_sink(d.graph, d.sink, d.start, rho);
            RotorConfig rho2 = rho;
            for (VertexId v : z2.vertices()) rho2[v] = kNoRotor;
            auto part = run_to_sink(d.graph, z2, d.start, rho2);
            for (std::size_t v = 0; v < d.graph.vertex_count(); ++v) CHECK(part.odometer[v] <= full.odometer[v]);

            // the truncated graph sees exactly the same stopped walk
            RotorConfig xi(t.domain.graph.vertex_count(), kNoRotor);
            for (std::size_t v = 0; v < xi.size(); ++v)
                if (!t.domain.sink.contains(static_cast<VertexId>(v))) xi[v] = rho[t.to_parent[v]];
            auto trunc = run_to_sink(t.domain.graph, t.domain.sink, t.domain.start, xi);
            for (std::size_t v = 0; v < xi.size(); ++v) CHECK(trunc.odometer[v] == part.odometer[t.to_parent[v]]);
        }
    }
}

TEST_CASE("step cap is reported, not thrown") {
    auto d = build_grid_box(2, 5);
    WalkOptions opt;
    opt.step_cap = 3;
    auto out = run_to_sink(d.graph, d.sink, d.start, RotorConfig(d.graph.vertex_count(), 0), opt);
    CHECK(out.status == WalkStatus::StepCapExceeded);
    CHECK(out.steps == 3);
    CHECK(default_step_cap(d.graph) == 2 * d.graph.vertex_count() * d.graph.total_degree());
}

TEST_CASE("configuration parsing and validation") {
    auto k3 = corpus::triangle();
    CHECK_THROWS(parse_config(k3.graph, k3.sink, "a:a"));
    CHECK_THROWS(parse_config(k3.graph, k3.sink, "q:a"));
    RotorConfig bad{0, 2, kNoRotor};
    CHECK_THROWS_AS(validate_config(k3.graph, k3.sink, bad), WalkError);
    RotorConfig rho = parse_config(k3.graph, k3.sink, "b:a");
    CHECK(format_config(k3.graph, rho) == "a:b,b:a");
    auto grid = build_grid_box(2, 2);
    RotorConfig gr = parse_config(grid.graph, grid.sink, "(0,0):(0,1),(1,0):(0,0)");
    CHECK(grid.graph.label(grid.graph.neighbor(grid.start, gr[grid.start])) == "(0,1)");
    CHECK(parse_config(grid.graph, grid.sink, format_config(grid.graph, gr)) == gr);
}

TEST_CASE("repeated walks and periods") {
    auto p3 = corpus::path3();
    RotorConfig rho = parse_config(p3.graph, p3.sink, "v0:v1,v1:v2");
    auto two = run_n_walks(p3.graph, p3.sink, 0, rho, 2);
    CHECK(two.totals[0] == 4);
    auto one = run_n_walks(p3.graph, p3.sink, 0, rho, 1);
    CHECK(one.totals == run_to_sink(p3.graph, p3.sink, 0, rho).odometer);

    auto per = detect_sigma_period(p3.graph, p3.sink, 0, rho);
    CHECK(per.found);
    CHECK(per.preperiod == 0);
    CHECK(per.period == 1);

    auto star = corpus::star3();
    auto forests = enumerate_forests(star.graph, star.sink);
    REQUIRE(forests.size() == 1);
    auto sp = detect_sigma_period(star.graph, star.sink, star.start, forests[0]);
    CHECK(sp.preperiod == 0);
    CHECK(sp.period >= 1);
    CHECK(sp.period <= 3);

    for (const auto& name : corpus::names()) {
        Domain d = corpus::by_name(name);
        for (const auto& f : enumerate_forests(d.graph, d.sink))
            CHECK(detect_sigma_period(d.graph, d.sink, d.start, f).preperiod == 0);
    }
}

TEST_CASE("Cesaro averages equal the Green function") {
    auto p3 = corpus::path3();
    for (const char* text : {"v0:v1,v1:v2", "v0:v1,v1:v0"}) {
        auto c = cesaro_occupation(p3.graph, p3.sink, 0, parse_config(p3.graph, p3.sink, text));
        CHECK(c.average[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(c.average[1] == doctest::Approx(2.0).epsilon(1e-12));
    }
    auto k3 = corpus::triangle();
    Rng rng = make_stream(3, 3);
    for (int rep = 0; rep < 5; ++rep) {
        auto c = cesaro_occupation(k3.graph, k3.sink, 0, random_config(k3.graph, k3.sink, rng));
        CHECK(c.average[0] == doctest::Approx(4.0 / 3).epsilon(1e-12));
        CHECK(c.average[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    }
    auto k4 = corpus::k4();
    auto g = green_exact(k4.graph, k4.sink, 0);
    auto s = run_n_walks(k4.graph, k4.sink, 0, random_config(k4.graph, k4.sink, rng), 1000);
    for (VertexId v = 0; v < 3; ++v) CHECK(std::abs(static_cast<double>(s.totals[v]) / 1000 - g.value[v]) < 0.05);
}

TEST_CASE("outcome writers") {
    auto p3 = corpus::path3();
    auto out = run_to_sink(p3.graph, p3.sink, 0, parse_config(p3.graph, p3.sink, "v0:v1,v1:v2"));
    std::ostringstream csv;
    write_outcome_csv(csv, p3.graph, out);
    CHECK(csv.str().rfind("vertex,u,FV,LV\nv0,2,0,2\nv1,2,1,3\nv2,0,4,4\n", 0) == 0);
    auto j = Json::parse(outcome_json(p3.graph, out));
    CHECK(j["steps"] == 4);
}
