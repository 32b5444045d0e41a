#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "rotorwalk/engine.hpp"
#include "rotorwalk/forest.hpp"
#include "rotorwalk/graph.hpp"
#include "rotorwalk/implicit_tree.hpp"
#include "rotorwalk/stats.hpp"

using namespace rotorwalk;

TEST_CASE("forest predicate") {
    auto p3 = corpus::path3();
    CHECK_FALSE(is_forest(p3.graph, p3.sink, parse_config(p3.graph, p3.sink, "v0:v1,v1:v0")));
    CHECK(is_forest(p3.graph, p3.sink, parse_config(p3.graph, p3.sink, "v0:v1,v1:v2")));
}

TEST_CASE("enumeration agrees with the matrix-tree count") {
    std::map<std::string, int> expected{{"P3", 1}, {"K3", 3}, {"K4", 16}, {"star3", 1}, {"grid2x3", 15}};
    for (const auto& [name, count] : expected) {
        Domain d = corpus::by_name(name);
        auto all = enumerate_forests(d.graph, d.sink);
        CHECK(all.size() == static_cast<std::size_t>(count));
        CHECK(count_forests_matrix_tree(d.graph, d.sink) == count);
        std::set<RotorConfig> distinct(all.begin(), all.end());
        CHECK(distinct.size() == all.size());
        for (const auto& f : all) CHECK(is_forest(d.graph, d.sink, f));
    }
    auto g = build_grid_box(2, 2);
    CHECK(count_forests_matrix_tree(g.graph, g.sink) == enumerate_forests(g.graph, g.sink).size());
    CHECK_THROWS(enumerate_forests(build_grid_box(2, 4).graph, build_grid_box(2, 4).sink, 1000));
}

TEST_CASE("Wilson samples are forests and reproducible") {
    auto d = build_grid_box(3, 4);
    ForestSampler a(d.graph, d.sink, 42), b(d.graph, d.sink, 42), c(d.graph, d.sink, 43);
    for (int i = 0; i < 5; ++i) {
        auto fa = a.sample();
        CHECK(is_forest(d.graph, d.sink, fa));
        CHECK(fa == b.sample());
        CHECK(fa != c.sample());
    }
    auto p3 = corpus::path3();
    Rng rng = make_stream(1, 0);
    CHECK(format_config(p3.graph, wilson_sample(p3.graph, p3.sink, rng)) == "v0:v1,v1:v2");
}

TEST_CASE("Wilson is uniform on K3 and K4") {
    for (const char* name : {"K3", "K4"}) {
        Domain d = corpus::by_name(name);
        auto all = enumerate_forests(d.graph, d.sink);
        std::map<RotorConfig, std::size_t> index;
        for (std::size_t i = 0; i < all.size(); ++i) index[all[i]] = i;
        std::vector<std::uint64_t> counts(all.size(), 0);
        ForestSampler s(d.graph, d.sink, 7);
        for (int i = 0; i < 100000; ++i) ++counts[index.at(s.sample())];
        auto chi = chi_square_test(counts, std::vector<double>(all.size(), 1.0 / all.size()));
        CHECK(chi.p_value > 0.001);
    }
}

TEST_CASE("lazy sampling in walk order has the uniform law") {
    // Rotors requested in the order a rotor walk needs them.
    Domain d = corpus::k4();
    auto all = enumerate_forests(d.graph, d.sink);
    std::map<RotorConfig, std::size_t> index;
    for (std::size_t i = 0; i < all.size(); ++i) index[all[i]] = i;
    std::vector<std::uint64_t> counts(all.size(), 0);
    const DomainView view(d);
    for (std::uint64_t i = 0; i < 50000; ++i) {
        Rng rng = make_stream(11, i);
        LazyForest<const DomainView> f(view, rng);
        f.walk(d.start, INT32_MAX, 1000, [](std::uint64_t, VertexId) {});
        RotorConfig rho(d.graph.vertex_count());
        for (VertexId v = 0; v < 4; ++v) rho[v] = f.initial_rotor(v);
        ++counts[index.at(rho)];
    }
    CHECK(chi_square_test(counts, std::vector<double>(all.size(), 1.0 / all.size())).p_value > 0.001);
}

TEST_CASE("lazy walk reproduces the materialized walk") {
    auto d = build_grid_box(2, 4);
    const DomainView view(d);
    for (std::uint64_t i = 0; i < 20; ++i) {
        Rng rng = make_stream(8, i);
        LazyForest<const DomainView> f(view, rng);
        std::vector<std::uint64_t> u(d.graph.vertex_count(), 0);
        std::uint64_t steps = f.walk(d.start, INT32_MAX, 1 << 20, [&](std::uint64_t, VertexId x) {
            if (!d.sink.contains(x)) ++u[x];
        });
        RotorConfig rho(d.graph.vertex_count());
        for (VertexId v = 0; v < static_cast<VertexId>(rho.size()); ++v) rho[v] = f.initial_rotor(v);
        REQUIRE(is_forest(d.graph, d.sink, rho));
        auto out = run_to_sink(d.graph, d.sink, d.start, rho);
        CHECK(out.steps == steps);
        CHECK(out.odometer == u);
        for (VertexId v = 0; v < static_cast<VertexId>(rho.size()); ++v) CHECK(out.sigma[v] == f.current_rotor(v));
    }
}

TEST_CASE("incomplete vertices along the forward path on the binary tree") {
    // On the b-ary tree each x_i (i >= 1) of P(o, rho) is incomplete with
    // probability 1 - (1/b)^(b-1), independently.
    const int levels = 8;
    RunningStats frac;
    for (std::uint64_t i = 0; i < 4000; ++i) {
        ImplicitTree t(2, 60);
        Rng rng = make_stream(21, i);
        LazyForest<ImplicitTree> f(t, rng);
        VertexId x = t.start();
        x = f.initial_target(x);
        int incomplete = 0;
        for (int lvl = 1; lvl <= levels; ++lvl) {
            VertexId next = f.initial_target(x);
            REQUIRE(t.parent(next) == x);
            // the sibling of `next` belongs to T(x) iff its rotor points at x
            for (std::size_t k = 1; k < t.degree(x); ++k) {
                VertexId c = t.neighbor(x, k);
                if (c != next) incomplete += f.initial_target(c) != x;
            }
            x = next;
        }
        frac.add(static_cast<double>(incomplete) / levels);
    }
    CHECK(std::abs(frac.mean() - 0.5) < 4 * frac.stderr_());
}

TEST_CASE("structural queries") {
    auto p3 = corpus::path3();
    RotorConfig f = parse_config(p3.graph, p3.sink, "v0:v1,v1:v2");
    CHECK(forward_path(p3.graph, p3.sink, f, 0) == std::vector<VertexId>{0, 1, 2});
    CHECK(w_set(p3.graph, p3.sink, f, 1) == std::vector<VertexId>{0, 1});
    CHECK(tree_of(p3.graph, p3.sink, f, 0) == std::vector<VertexId>{0, 1, 2});
    CHECK(forest_roots(p3.graph, p3.sink, f)[0] == 2);

    auto star = corpus::star3();
    RotorConfig s = enumerate_forests(star.graph, star.sink)[0];
    auto w = w_set(star.graph, star.sink, s, 0);
    CHECK(w.size() == 3);  // c and the two leaves pointing at it; l3 is the sink
    CHECK(tree_of(star.graph, star.sink, s, 0).size() == 4);
    CHECK(is_complete(star.graph, star.sink, s, 0));
    CHECK(incomplete_on_path(star.graph, star.sink, s, 0).empty());

    auto k3 = corpus::triangle();
    RotorConfig split = parse_config(k3.graph, k3.sink, "a:z,b:z");
    CHECK(is_complete(k3.graph, k3.sink, split, 0));
    auto bary = build_bary_tree(2, 3);
    Rng rng = make_stream(2, 2);
    RotorConfig bf = wilson_sample(bary.graph, bary.sink, rng);
    for (VertexId x : incomplete_on_path(bary.graph, bary.sink, bf, bary.start))
        CHECK_FALSE(is_complete(bary.graph, bary.sink, bf, x));
}

TEST_CASE("forest CSV and marginals") {
    auto p3 = corpus::path3();
    std::ostringstream os;
    write_forest_csv(os, p3.graph, parse_config(p3.graph, p3.sink, "v0:v1,v1:v2"));
    CHECK(os.str() == "x,rho(x)\nv0,v1\nv1,v2\n");

    auto family = [](int R) { return build_tree_with_ray(2, R - 1, R); };
    auto t = owusf_marginal_estimate(family, {"y1->y0", "y1->y2"}, 2, {4, 10}, 2000, 3);
    REQUIRE(t.rows.size() == 6);
    // y1 has exactly two neighbors, so its two marginals sum to one
    CHECK(t.rows[0].estimate + t.rows[1].estimate == doctest::Approx(1.0));
    CHECK(t.rows[2].estimate == 0.0);  // joint event is impossible
    // y1 -> y0 becomes likelier as the truncation grows
    CHECK(t.rows[3].radius == 10);
    CHECK(t.rows[3].estimate > t.rows[0].estimate + 4 * t.rows[0].stderr_);
}
