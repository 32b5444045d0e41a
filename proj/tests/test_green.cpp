#include <doctest.h>

#include <sstream>

#include "rotorwalk/graph.hpp"
#include "rotorwalk/green.hpp"
#include "rotorwalk/stats.hpp"

using namespace rotorwalk;

TEST_CASE("exact Green values") {
    Graph edge({{1}, {0}}, {"a", "z"});
    SinkSet z(2, {1});
    auto g1 = green_exact(edge, z, 0, Arithmetic::Exact);
    CHECK(g1.exact[0] == 1);
    CHECK(green_exact(edge, z, 0).value[0] == doctest::Approx(1.0));

    auto k3 = corpus::triangle();
    auto g3 = green_exact(k3.graph, k3.sink, 0, Arithmetic::Exact);
    CHECK(g3.exact[0] == Rational(4, 3));
    CHECK(g3.exact[1] == Rational(2, 3));
    CHECK(g3.exact[2] == 0);
    CHECK(green_residual_exact_zero(k3.graph, k3.sink, g3));

    auto p3 = corpus::path3();
    auto gp = green_exact(p3.graph, p3.sink, 0, Arithmetic::Exact);
    CHECK(gp.exact[0] == 2);
    CHECK(gp.exact[1] == 2);
}

TEST_CASE("float and exact solvers agree") {
    for (const Domain& d : {corpus::grid2x3(), corpus::k4(), build_grid_box(2, 3), build_bary_tree(3, 3)}) {
        auto f = green_exact(d.graph, d.sink, d.start);
        auto e = green_exact(d.graph, d.sink, d.start, Arithmetic::Exact);
        CHECK(green_residual(d.graph, d.sink, f) < 1e-12);
        CHECK(green_residual_exact_zero(d.graph, d.sink, e));
        for (std::size_t v = 0; v < d.graph.vertex_count(); ++v)
            CHECK(f.value[v] == doctest::Approx(e.exact[v].convert_to<double>()).epsilon(1e-12));
    }
}

TEST_CASE("iterative solver on large truncations") {
    auto d = build_grid_box(3, 8);  // above the dense limit
    REQUIRE(d.graph.vertex_count() > kDenseLimit);
    auto g = green_exact(d.graph, d.sink, d.start);
    CHECK(green_residual(d.graph, d.sink, g) < 1e-9);
    // Z^3 Green function at the origin is about 1.516; truncations approach it from below
    CHECK(g.value[d.start] > 1.3);
    CHECK(g.value[d.start] < 1.5164);
}

TEST_CASE("Green function grows with the truncation radius") {
    auto big = build_grid_box(3, 6);
    double prev = 0;
    for (int r = 1; r <= 6; ++r) {
        Truncation t = truncate(big.graph, big.start, r);
        double g = green_exact(t.domain.graph, t.domain.sink, t.domain.start).value[t.domain.start];
        CHECK(g > prev);
        prev = g;
    }
    // tree with a ray: G(o) tends to 3 and G(y0) to 4 as both sides grow
    auto tr = build_tree_with_ray(2, 14, 400);
    auto g = green_exact(tr.graph, tr.sink, tr.start);
    CHECK(g.value[*tr.graph.find_label("o")] == doctest::Approx(3.0).epsilon(0.01));
    CHECK(g.value[tr.start] == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("Monte Carlo Green function") {
    Graph edge({{1}, {0}}, {"a", "z"});
    SinkSet z(2, {1});
    auto single = green_mc(edge, z, 0, 1000, 1);
    CHECK(single.value[0] == 1.0);
    CHECK(single.stderr_[0] == 0.0);

    auto d = corpus::grid2x3();
    auto exact = green_exact(d.graph, d.sink, d.start);
    auto mc = green_mc(d.graph, d.sink, d.start, 200000, 17);
    for (std::size_t v = 0; v < d.graph.vertex_count(); ++v)
        CHECK(std::abs(mc.value[v] - exact.value[v]) <= 4 * mc.stderr_[v] + 1e-12);
    auto one = green_mc(d.graph, d.sink, d.start, 5000, 3, 1);
    auto four = green_mc(d.graph, d.sink, d.start, 5000, 3, 4);
    CHECK(one.value == four.value);
}

TEST_CASE("Green CSV") {
    auto k3 = corpus::triangle();
    std::ostringstream os;
    write_green_csv(os, k3.graph, green_exact(k3.graph, k3.sink, 0, Arithmetic::Exact));
    CHECK(os.str() == "vertex,G\na,4/3\nb,2/3\nz,0\n");
}

TEST_CASE("statistics helpers") {
    RunningStats s;
    for (double x : {1.0, 2.0, 3.0, 4.0}) s.add(x);
    CHECK(s.mean() == doctest::Approx(2.5));
    CHECK(s.variance() == doctest::Approx(5.0 / 3));
    auto chi = chi_square_test({50, 50}, {0.5, 0.5});
    CHECK(chi.statistic == doctest::Approx(0.0));
    CHECK(chi.p_value == doctest::Approx(1.0));
    // chi-square with 1 dof at 3.841 has p = 0.05
    auto c2 = chi_square_test({60, 40}, {0.5, 0.5});
    CHECK(c2.statistic == doctest::Approx(4.0));
    CHECK(c2.dof == 1);
    CHECK(c2.p_value == doctest::Approx(0.0455).epsilon(0.01));
}
