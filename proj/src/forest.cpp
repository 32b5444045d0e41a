#include "rotorwalk/forest.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rotorwalk/parallel.hpp"

namespace rotorwalk {

using boost::multiprecision::cpp_int;

namespace {

bool valid_slot(const Graph& g, VertexId x, std::int32_t r) {
    return r >= 0 && static_cast<std::size_t>(r) < g.degree(x);
}

VertexId target(const Graph& g, const RotorConfig& f, VertexId x) {
    return g.neighbor(x, static_cast<std::size_t>(f[x]));
}

}  // namespace

bool is_forest(const Graph& g, const SinkSet& sink, const RotorConfig& rho) {
    const std::size_t n = g.vertex_count();
    if (rho.size() != n) return false;
    // 0 unknown, 1 on the current chain, 2 reaches the sink
    std::vector<char> state(n, 0);
    std::vector<VertexId> chain;
    for (std::size_t v = 0; v < n; ++v) {
        auto x = static_cast<VertexId>(v);
        if (state[v] || sink.contains(x)) continue;
        chain.clear();
        while (!sink.contains(x) && state[x] == 0) {
            if (!valid_slot(g, x, rho[x])) return false;
            state[x] = 1;
            chain.push_back(x);
            x = target(g, rho, x);
        }
        if (!sink.contains(x) && state[x] == 1) return false;
        for (VertexId c : chain) state[c] = 2;
    }
    return true;
}

ForestSampler::ForestSampler(const Graph& g, const SinkSet& sink, std::uint64_t seed, std::uint64_t stream)
    : view_(g, sink, 0), seed_(seed), stream_(stream), rng_(make_stream(seed, stream)) {
    if (sink.empty()) throw SamplerError("Wilson sampling needs a nonempty sink");
}

RotorConfig ForestSampler::sample() {
    LazyForest<DomainView> forest(view_, rng_);
    const auto n = static_cast<VertexId>(view_.vertex_count());
    for (VertexId v = 0; v < n; ++v) forest.ensure(v);
    RotorConfig out = forest.initial();
    return out;
}

RotorConfig wilson_sample(const Graph& g, const SinkSet& sink, Rng& rng) {
    if (sink.empty()) throw SamplerError("Wilson sampling needs a nonempty sink");
    DomainView view(g, sink, 0);
    LazyForest<DomainView> forest(view, rng);
    const auto n = static_cast<VertexId>(g.vertex_count());
    for (VertexId v = 0; v < n; ++v) forest.ensure(v);
    return forest.initial();
}

std::vector<RotorConfig> enumerate_forests(const Graph& g, const SinkSet& sink, std::uint64_t bound) {
    std::vector<VertexId> free;
    double product = 1;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        auto x = static_cast<VertexId>(v);
        if (sink.contains(x)) continue;
        free.push_back(x);
        product *= static_cast<double>(g.degree(x));
        if (product > static_cast<double>(bound))
            throw SamplerError("enumeration bound exceeded: more than " + std::to_string(bound) + " configurations");
    }
    std::vector<RotorConfig> forests;
    RotorConfig rho(g.vertex_count(), kNoRotor);
    for (VertexId x : free) rho[x] = 0;
    for (;;) {
        if (is_forest(g, sink, rho)) forests.push_back(rho);
        // Odometer increment, last free vertex fastest.
        std::size_t i = free.size();
        while (i > 0) {
            VertexId x = free[i - 1];
            if (static_cast<std::size_t>(++rho[x]) < g.degree(x)) break;
            rho[x] = 0;
            --i;
        }
        if (i == 0) break;
    }
    return forests;
}

cpp_int count_forests_matrix_tree(const Graph& g, const SinkSet& sink) {
    if (sink.empty()) throw SamplerError("matrix-tree count needs a nonempty sink");
    std::vector<std::int64_t> index(g.vertex_count(), -1);
    std::size_t m = 0;
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        if (!sink.contains(static_cast<VertexId>(v))) index[v] = static_cast<std::int64_t>(m++);
    if (m == 0) return 1;
    std::vector<std::vector<cpp_int>> a(m, std::vector<cpp_int>(m, 0));
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        if (index[v] < 0) continue;
        auto i = static_cast<std::size_t>(index[v]);
        a[i][i] = static_cast<long long>(g.degree(static_cast<VertexId>(v)));
        for (VertexId w : g.neighbors(static_cast<VertexId>(v)))
            if (index[w] >= 0) a[i][static_cast<std::size_t>(index[w])] -= 1;
    }
    // Bareiss fraction-free elimination.
    cpp_int prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < m && a[p][k] == 0) ++p;
            if (p == m) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < m; ++i) {
            for (std::size_t j = k + 1; j < m; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    return sign * a[m - 1][m - 1];
}

std::vector<VertexId> forward_path(const Graph& g, const SinkSet& sink, const RotorConfig& f, VertexId a) {
    std::vector<VertexId> path{a};
    std::vector<char> seen(g.vertex_count(), 0);
    seen[a] = 1;
    VertexId x = a;
    while (!sink.contains(x)) {
        x = target(g, f, x);
        if (seen[x]) throw SamplerError("configuration has a cycle through " + g.label(x));
        seen[x] = 1;
        path.push_back(x);
    }
    return path;
}

std::vector<VertexId> forest_roots(const Graph& g, const SinkSet& sink, const RotorConfig& f) {
    const std::size_t n = g.vertex_count();
    std::vector<VertexId> root(n, kNoVertex);
    std::vector<VertexId> chain;
    for (std::size_t v = 0; v < n; ++v) {
        auto x = static_cast<VertexId>(v);
        chain.clear();
        while (root[x] == kNoVertex && !sink.contains(x)) {
            chain.push_back(x);
            x = target(g, f, x);
            if (chain.size() > n) throw SamplerError("configuration is not a forest");
        }
        VertexId r = sink.contains(x) ? x : root[x];
        root[x] = r;
        for (VertexId c : chain) root[c] = r;
    }
    return root;
}

std::vector<VertexId> tree_of(const Graph& g, const SinkSet& sink, const RotorConfig& f, VertexId a) {
    auto root = forest_roots(g, sink, f);
    std::vector<VertexId> out;
    for (std::size_t v = 0; v < root.size(); ++v)
        if (root[v] == root[a]) out.push_back(static_cast<VertexId>(v));
    return out;
}

std::vector<VertexId> w_set(const Graph& g, const SinkSet& sink, const RotorConfig& f, VertexId x) {
    const std::size_t n = g.vertex_count();
    std::vector<std::vector<VertexId>> into(n);
    for (std::size_t v = 0; v < n; ++v) {
        auto y = static_cast<VertexId>(v);
        if (!sink.contains(y)) into[target(g, f, y)].push_back(y);
    }
    std::vector<char> in(n, 0);
    std::vector<VertexId> stack{x};
    in[x] = 1;
    while (!stack.empty()) {
        VertexId y = stack.back();
        stack.pop_back();
        for (VertexId w : into[y])
            if (!in[w]) {
                in[w] = 1;
                stack.push_back(w);
            }
    }
    std::vector<VertexId> out;
    for (std::size_t v = 0; v < n; ++v)
        if (in[v]) out.push_back(static_cast<VertexId>(v));
    return out;
}

namespace {

bool complete_with(const Graph& g, const std::vector<VertexId>& root, VertexId x) {
    for (VertexId w : g.neighbors(x))
        if (root[w] != root[x]) return false;
    return true;
}

}  // namespace

bool is_complete(const Graph& g, const SinkSet& sink, const RotorConfig& f, VertexId x) {
    return complete_with(g, forest_roots(g, sink, f), x);
}

std::vector<VertexId> incomplete_on_path(const Graph& g, const SinkSet& sink, const RotorConfig& f, VertexId a) {
    auto root = forest_roots(g, sink, f);
    auto path = forward_path(g, sink, f, a);
    std::vector<VertexId> out;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        if (!complete_with(g, root, path[i])) out.push_back(path[i]);
    return out;
}

void write_forest_csv(std::ostream& os, const Graph& g, const RotorConfig& f, bool header) {
    if (header) os << "x,rho(x)\n";
    for (std::size_t v = 0; v < f.size(); ++v) {
        if (f[v] < 0) continue;
        auto x = static_cast<VertexId>(v);
        os << g.label(x) << ',' << g.label(target(g, f, x)) << '\n';
    }
}

void MarginalTable::write_csv(std::ostream& os) const {
    os << "edge,estimate,stderr,N,R\n";
    for (const auto& r : rows) os << r.edge << ',' << r.estimate << ',' << r.stderr_ << ',' << r.samples << ',' << r.radius << '\n';
}

MarginalTable owusf_marginal_estimate(const DomainFamily& family, const std::vector<std::string>& edges, int inner,
                                      const std::vector<int>& radii, std::uint64_t samples, std::uint64_t seed,
                                      int threads) {
    if (edges.empty()) throw SamplerError("no edges given");
    if (samples == 0) throw SamplerError("sample count must be positive");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] <= inner) throw SamplerError("truncation radii must exceed the inner radius");
        if (i > 0 && radii[i] <= radii[i - 1]) throw SamplerError("truncation radii must be strictly increasing");
    }
    MarginalTable table;
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        const int R = radii[ri];
        Domain d = family(R);
        DomainView view(d);
        std::vector<std::pair<VertexId, int>> resolved;
        for (const auto& e : edges) {
            auto arrow = e.find("->");
            if (arrow == std::string::npos) throw SamplerError("edge '" + e + "' is not of the form x->y");
            VertexId x = resolve_vertex(d.graph, std::string_view(e).substr(0, arrow));
            VertexId y = resolve_vertex(d.graph, std::string_view(e).substr(arrow + 2));
            int slot = d.graph.slot_of(x, y);
            if (slot < 0) throw SamplerError("'" + e + "' is not an edge");
            if (view.distance(x) > inner || view.distance(y) > inner)
                throw SamplerError("edge '" + e + "' lies outside the inner ball");
            resolved.emplace_back(x, slot);
        }
        const std::size_t k = resolved.size();
        std::vector<char> hits(samples * (k + 1), 0);
        for_each_replica(samples, threads, [&](std::size_t i) {
            Rng rng = make_stream(seed, ri * samples + i);
            DomainView local(view);
            LazyForest<DomainView> forest(local, rng);
            bool all = true;
            for (std::size_t e = 0; e < k; ++e) {
                bool hit = forest.initial_rotor(resolved[e].first) == resolved[e].second;
                hits[i * (k + 1) + e] = hit;
                all = all && hit;
            }
            hits[i * (k + 1) + k] = all;
        });
        for (std::size_t e = 0; e <= k; ++e) {
            if (e == k && k == 1) break;
            std::uint64_t c = 0;
            for (std::size_t i = 0; i < samples; ++i) c += static_cast<std::uint64_t>(hits[i * (k + 1) + e]);
            double p = static_cast<double>(c) / static_cast<double>(samples);
            MarginalRow row;
            if (e < k) {
                row.edge = edges[e];
            } else {
                for (std::size_t j = 0; j < k; ++j) row.edge += (j ? ";" : "") + edges[j];
            }
            row.estimate = p;
            row.stderr_ = std::sqrt(p * (1 - p) / static_cast<double>(samples));
            row.samples = samples;
            row.radius = R;
            table.rows.push_back(row);
        }
    }
    return table;
}

}  // namespace rotorwalk
