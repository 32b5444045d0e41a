#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "rotorwalk/graph.hpp"

using namespace rotorwalk;

namespace {

std::size_t count_degree(const Graph& g, std::size_t d) {
    std::size_t c = 0;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) c += g.degree(static_cast<VertexId>(v)) == d;
    return c;
}

// Independent lattice-point count for the L1 ball.
std::size_t l1_points(int d, int R) {
    if (d == 0) return 1;
    std::size_t total = 0;
    for (int x = -R; x <= R; ++x) total += l1_points(d - 1, R - std::abs(x));
    return total;
}

}  // namespace

TEST_CASE("grid boxes") {
    auto line = build_grid_box(1, 2);
    CHECK(line.graph.vertex_count() == 5);
    CHECK(line.sink.size() == 2);
    CHECK(line.sink.contains(*line.graph.find_label("(-2)")));
    CHECK(line.sink.contains(*line.graph.find_label("(2)")));
    CHECK(line.graph.degree(line.start) == 2);

    auto plus = build_grid_box(2, 1, BallMetric::L1);
    CHECK(plus.graph.vertex_count() == 5);
    CHECK(plus.sink.size() == 4);
    CHECK(plus.graph.degree(plus.start) == 4);

    auto l1 = build_grid_box(3, 10, BallMetric::L1);
    CHECK(l1.graph.vertex_count() == l1_points(3, 10));
    CHECK(l1.graph.vertex_count() == 1561);

    auto box = build_grid_box(3, 4);
    CHECK(box.graph.vertex_count() == 9 * 9 * 9);
    CHECK(box.sink.size() == 9 * 9 * 9 - 7 * 7 * 7);
    CHECK(box.graph.label(box.start) == "(0,0,0)");
}

TEST_CASE("trees") {
    auto t1 = build_bary_tree(2, 1);
    CHECK(t1.graph.vertex_count() == 3);
    CHECK(t1.graph.degree(t1.start) == 2);
    CHECK(t1.sink.size() == 2);

    auto t3 = build_bary_tree(2, 3);
    CHECK(t3.graph.vertex_count() == 15);
    CHECK(t3.sink.size() == 8);
    CHECK(build_bary_tree(3, 2).graph.vertex_count() == 13);

    auto r1 = build_tree_with_ray(2, 1, 1);
    CHECK(r1.graph.vertex_count() == 5);
    CHECK(r1.graph.label(r1.start) == "y0");
    CHECK(r1.sink.contains(*r1.graph.find_label("y1")));

    auto r8 = build_tree_with_ray(2, 8, 8);
    CHECK(r8.graph.vertex_count() == 520);
    CHECK(r8.sink.size() == 256 + 1);
    CHECK(r8.graph.edge_count() + 1 == r8.graph.vertex_count());
}

TEST_CASE("edge lists") {
    std::istringstream tri("a b\nb c\nc a\n");
    Graph k3 = read_edge_list(tri);
    CHECK(k3.vertex_count() == 3);
    CHECK(k3.edge_count() == 3);

    Graph k4 = corpus::k4().graph;
    CHECK(count_degree(k4, 3) == 4);

    std::istringstream path("a b\nb c\n");
    Graph p = read_edge_list(path);
    VertexId b = *p.find_label("b");
    CHECK(p.label(p.neighbor(b, 0)) == "a");
    CHECK(p.label(p.neighbor(b, 1)) == "c");

    std::istringstream numeric("0 1\n1 2\n");
    Graph n = read_edge_list(numeric);
    CHECK(n.degree(1) == 2);
    CHECK(resolve_vertex(n, "2") == 2);

    CHECK_THROWS_AS(build_from_edge_list({{{0, 0}}, {}, {}}), GraphError);
    CHECK_THROWS_AS(build_from_edge_list({{{0, 1}, {2, 3}}, {}, {}}), GraphError);
}

TEST_CASE("edge list round trip keeps rotor orders") {
    for (const Domain& d : {corpus::grid2x3(), corpus::k4(), build_tree_with_ray(2, 3, 3), build_grid_box(2, 2)}) {
        std::stringstream s;
        write_edge_list(s, d.graph);
        Graph back = read_edge_list(s);
        CHECK(back == d.graph);
        CHECK(back.labels() == d.graph.labels());
    }
}

TEST_CASE("balls and truncations") {
    auto k4 = corpus::k4();
    Ball b0 = ball_and_boundary(k4.graph, 0, 0);
    CHECK(b0.vertices == std::vector<VertexId>{0});
    CHECK(b0.boundary == std::vector<VertexId>{0});

    Graph p4({{1}, {0, 2}, {1, 3}, {2}}, {"v0", "v1", "v2", "v3"});
    Ball b2 = ball_and_boundary(p4, 0, 2);
    CHECK(b2.vertices == std::vector<VertexId>{0, 1, 2});
    CHECK(b2.boundary == std::vector<VertexId>{2});
    Truncation t = truncate(p4, 0, 2);
    CHECK(t.domain.graph == corpus::path3().graph);
    CHECK(t.domain.sink.vertices() == std::vector<VertexId>{2});

    auto tern = build_bary_tree(3, 2);
    Ball tb = ball_and_boundary(tern.graph, tern.start, 1);
    CHECK(tb.vertices.size() == 4);
    CHECK(tb.boundary.size() == 3);

    auto bary5 = build_bary_tree(2, 5);
    Truncation bt = truncate(bary5.graph, bary5.start, 2);
    auto bary2 = build_bary_tree(2, 2);
    CHECK(bt.domain.graph == bary2.graph);
    CHECK(bt.domain.sink.vertices() == bary2.sink.vertices());

    auto grid = build_grid_box(2, 3);
    Truncation gt = truncate(grid.graph, grid.start, 1);
    CHECK(gt.domain.graph.vertex_count() == 5);
    CHECK(gt.domain.sink.size() == 4);
    CHECK(gt.domain.graph.degree(gt.domain.start) == 4);
}

TEST_CASE("truncations nest and preserve rotor order") {
    auto grid = build_grid_box(3, 5);
    for (int r = 1; r <= 4; ++r) {
        Truncation small = truncate(grid.graph, grid.start, r);
        Truncation big = truncate(grid.graph, grid.start, r + 1);
        const Graph& gs = small.domain.graph;
        for (std::size_t v = 0; v < gs.vertex_count(); ++v) {
            VertexId p = small.to_parent[v];
            REQUIRE(big.to_local[p] != kNoVertex);
            if (small.domain.sink.contains(static_cast<VertexId>(v))) continue;
            // interior vertices keep their full neighborhood in the parent's order
            auto nb = gs.neighbors(static_cast<VertexId>(v));
            REQUIRE(nb.size() == grid.graph.degree(p));
            for (std::size_t k = 0; k < nb.size(); ++k) CHECK(small.to_parent[nb[k]] == grid.graph.neighbor(p, k));
        }
    }
}

TEST_CASE("corpus") {
    for (const auto& name : corpus::names()) {
        Domain d = corpus::by_name(name);
        CHECK(!d.sink.empty());
        CHECK(!d.sink.contains(d.start));
    }
    CHECK_THROWS(corpus::by_name("nope"));
}
