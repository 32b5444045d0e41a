#include "rotorwalk/graph.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace rotorwalk {

namespace {

constexpr std::string_view kOrderPragma = "#@order ";
constexpr std::string_view kVerticesPragma = "#@vertices ";

bool parse_int(std::string_view s, long long& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Graph::Graph(std::vector<std::vector<VertexId>> adjacency, std::vector<std::string> labels) {
    const std::size_t n = adjacency.size();
    if (n == 0) throw GraphError("graph must have at least one vertex");
    if (!labels.empty() && labels.size() != n) throw GraphError("label count does not match vertex count");
    if (n > static_cast<std::size_t>(std::numeric_limits<VertexId>::max()))
        throw GraphError("too many vertices");

    offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + static_cast<std::int64_t>(adjacency[v].size());
    neighbors_.reserve(static_cast<std::size_t>(offsets_[n]));
    for (std::size_t v = 0; v < n; ++v) {
        for (VertexId w : adjacency[v]) {
            if (w < 0 || static_cast<std::size_t>(w) >= n)
                throw GraphError("neighbor id out of range at vertex " + std::to_string(v));
            if (static_cast<std::size_t>(w) == v) throw GraphError("self-loop at vertex " + std::to_string(v));
            neighbors_.push_back(w);
        }
    }

    // Repeated neighbors and symmetry, checked on sorted copies.
    std::vector<std::vector<VertexId>> sorted(n);
    for (std::size_t v = 0; v < n; ++v) {
        sorted[v] = adjacency[v];
        std::sort(sorted[v].begin(), sorted[v].end());
        if (std::adjacent_find(sorted[v].begin(), sorted[v].end()) != sorted[v].end())
            throw GraphError("repeated neighbor at vertex " + std::to_string(v));
    }
    for (std::size_t v = 0; v < n; ++v) {
        for (VertexId w : sorted[v]) {
            if (!std::binary_search(sorted[w].begin(), sorted[w].end(), static_cast<VertexId>(v)))
                throw GraphError("adjacency is not symmetric between " + std::to_string(v) + " and " +
                                 std::to_string(w));
        }
    }

    std::vector<char> seen(n, 0);
    std::vector<VertexId> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (VertexId w : neighbors(v)) {
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    if (reached != n) throw GraphError("graph is not connected");

    if (labels.empty()) {
        labels.reserve(n);
        for (std::size_t v = 0; v < n; ++v) labels.push_back(std::to_string(v));
    }
    labels_ = std::move(labels);
}

int Graph::slot_of(VertexId v, VertexId w) const {
    auto nb = neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i)
        if (nb[i] == w) return static_cast<int>(i);
    return -1;
}

std::optional<VertexId> Graph::find_label(std::string_view label) const {
    for (std::size_t v = 0; v < labels_.size(); ++v)
        if (labels_[v] == label) return static_cast<VertexId>(v);
    return std::nullopt;
}

std::vector<std::vector<VertexId>> Graph::adjacency() const {
    std::vector<std::vector<VertexId>> adj(vertex_count());
    for (std::size_t v = 0; v < adj.size(); ++v) {
        auto nb = neighbors(static_cast<VertexId>(v));
        adj[v].assign(nb.begin(), nb.end());
    }
    return adj;
}

SinkSet::SinkSet(std::size_t vertex_count, std::vector<VertexId> members) : member_(vertex_count, 0) {
    for (VertexId v : members) {
        if (v < 0 || static_cast<std::size_t>(v) >= vertex_count)
            throw GraphError("sink vertex " + std::to_string(v) + " is not a vertex");
        member_[v] = 1;
    }
    for (std::size_t v = 0; v < vertex_count; ++v)
        if (member_[v]) list_.push_back(static_cast<VertexId>(v));
}

Domain build_grid_box(int dimension, int radius, BallMetric metric) {
    if (dimension < 1) throw GraphError("grid dimension must be >= 1");
    if (radius < 1) throw GraphError("grid radius must be >= 1");
    const int side = 2 * radius + 1;
    std::size_t box = 1;
    for (int k = 0; k < dimension; ++k) {
        box *= static_cast<std::size_t>(side);
        if (box > 200'000'000) throw GraphError("grid box too large");
    }

    auto norm = [&](const std::vector<int>& x) {
        int acc = 0;
        for (int c : x) acc = metric == BallMetric::L1 ? acc + std::abs(c) : std::max(acc, std::abs(c));
        return acc;
    };

    // Lexicographic enumeration of the box; points outside an L1 ball get no id.
    std::vector<VertexId> id_of(box, kNoVertex);
    std::vector<std::vector<int>> coords;
    std::vector<int> x(dimension, -radius);
    for (std::size_t cell = 0; cell < box; ++cell) {
        if (norm(x) <= radius) {
            id_of[cell] = static_cast<VertexId>(coords.size());
            coords.push_back(x);
        }
        for (int k = dimension - 1; k >= 0; --k) {
            if (++x[k] <= radius) break;
            x[k] = -radius;
        }
    }

    auto cell_of = [&](const std::vector<int>& p) {
        std::size_t c = 0;
        for (int k = 0; k < dimension; ++k) c = c * side + static_cast<std::size_t>(p[k] + radius);
        return c;
    };

    std::vector<std::vector<VertexId>> adj(coords.size());
    std::vector<std::string> labels;
    labels.reserve(coords.size());
    std::vector<VertexId> sink;
    VertexId origin = kNoVertex;
    for (std::size_t v = 0; v < coords.size(); ++v) {
        std::vector<int> p = coords[v];
        for (int k = 0; k < dimension; ++k) {
            for (int sign : {+1, -1}) {
                p[k] += sign;
                if (std::abs(p[k]) <= radius) {
                    VertexId w = id_of[cell_of(p)];
                    if (w != kNoVertex) adj[v].push_back(w);
                }
                p[k] -= sign;
            }
        }
        std::string label = "(";
        for (int k = 0; k < dimension; ++k) label += (k ? "," : "") + std::to_string(p[k]);
        labels.push_back(label + ")");
        int nv = norm(p);
        if (nv == radius) sink.push_back(static_cast<VertexId>(v));
        if (nv == 0) origin = static_cast<VertexId>(v);
    }
    Domain d{Graph(std::move(adj), std::move(labels)), {}, origin};
    d.sink = SinkSet(d.graph.vertex_count(), std::move(sink));
    return d;
}

namespace {

// Heap-ordered b-ary tree adjacency: root 0, children of v are v*b+1 .. v*b+b.
std::vector<std::vector<VertexId>> bary_adjacency(int branching, int depth, std::size_t& leaf_begin) {
    std::size_t n = 1, level = 1;
    for (int d = 1; d <= depth; ++d) {
        level *= static_cast<std::size_t>(branching);
        n += level;
        if (n > 50'000'000) throw GraphError("tree too large to materialize");
    }
    leaf_begin = n - level;
    std::vector<std::vector<VertexId>> adj(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (v > 0) adj[v].push_back(static_cast<VertexId>((v - 1) / branching));
        if (v < leaf_begin)
            for (int j = 1; j <= branching; ++j) adj[v].push_back(static_cast<VertexId>(v * branching + j));
    }
    return adj;
}

std::vector<std::string> tree_labels(std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    labels.emplace_back("o");
    for (std::size_t v = 1; v < n; ++v) labels.push_back("t" + std::to_string(v));
    return labels;
}

}  // namespace

Domain build_bary_tree(int branching, int depth) {
    if (branching < 2) throw GraphError("branching must be >= 2");
    if (depth < 1) throw GraphError("depth must be >= 1");
    std::size_t leaf_begin = 0;
    auto adj = bary_adjacency(branching, depth, leaf_begin);
    const std::size_t n = adj.size();
    std::vector<VertexId> sink;
    for (std::size_t v = leaf_begin; v < n; ++v) sink.push_back(static_cast<VertexId>(v));
    Domain d{Graph(std::move(adj), tree_labels(n)), {}, 0};
    d.sink = SinkSet(n, std::move(sink));
    return d;
}

Domain build_tree_with_ray(int branching, int depth, int ray_length) {
    if (branching < 2) throw GraphError("branching must be >= 2");
    if (depth < 1) throw GraphError("depth must be >= 1");
    if (ray_length < 1) throw GraphError("ray length must be >= 1");
    std::size_t leaf_begin = 0;
    auto adj = bary_adjacency(branching, depth, leaf_begin);
    const std::size_t tree_n = adj.size();
    auto labels = tree_labels(tree_n);
    const auto ray0 = static_cast<VertexId>(tree_n);
    adj.resize(tree_n + ray_length + 1);
    // y_0 takes the parent slot at the root.
    adj[0].insert(adj[0].begin(), ray0);
    for (int i = 0; i <= ray_length; ++i) {
        auto& list = adj[tree_n + i];
        list.push_back(i == 0 ? 0 : ray0 + i - 1);
        if (i < ray_length) list.push_back(ray0 + i + 1);
        labels.push_back("y" + std::to_string(i));
    }
    std::vector<VertexId> sink;
    for (std::size_t v = leaf_begin; v < tree_n; ++v) sink.push_back(static_cast<VertexId>(v));
    sink.push_back(ray0 + ray_length);
    const std::size_t n = adj.size();
    Domain d{Graph(std::move(adj), std::move(labels)), {}, ray0};
    d.sink = SinkSet(n, std::move(sink));
    return d;
}

Graph build_from_edge_list(const EdgeListInput& input) {
    VertexId max_id = -1;
    for (auto [u, v] : input.edges) {
        if (u < 0 || v < 0) throw GraphError("negative vertex id in edge list");
        max_id = std::max({max_id, u, v});
    }
    std::size_t n = static_cast<std::size_t>(max_id + 1);
    n = std::max(n, input.labels.size());
    if (n == 0) throw GraphError("empty edge list");

    std::vector<std::vector<VertexId>> adj(n);
    std::map<std::pair<VertexId, VertexId>, int> seen;
    for (auto [u, v] : input.edges) {
        if (u == v) throw GraphError("self-loop at vertex " + std::to_string(u));
        auto key = std::minmax(u, v);
        if (seen[key]++) throw GraphError("duplicate edge " + std::to_string(u) + " " + std::to_string(v));
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    if (!input.orders.empty()) {
        if (input.orders.size() != n) throw GraphError("neighbor order table has wrong size");
        for (std::size_t v = 0; v < n; ++v) {
            if (input.orders[v].empty()) continue;
            auto given = input.orders[v];
            auto a = given, b = adj[v];
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            if (a != b) throw GraphError("neighbor order for vertex " + std::to_string(v) + " is not a permutation of its neighbors");
            adj[v] = std::move(given);
        }
    }
    std::vector<std::string> labels = input.labels;
    if (!labels.empty() && labels.size() != n) labels.clear();
    return Graph(std::move(adj), std::move(labels));
}

std::vector<int> distances_from(const Graph& g, VertexId center) {
    std::vector<int> dist(g.vertex_count(), -1);
    std::queue<VertexId> q;
    dist[center] = 0;
    q.push(center);
    while (!q.empty()) {
        VertexId v = q.front();
        q.pop();
        for (VertexId w : g.neighbors(v)) {
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                q.push(w);
            }
        }
    }
    return dist;
}

Ball ball_and_boundary(const Graph& g, VertexId center, int radius) {
    if (center < 0 || static_cast<std::size_t>(center) >= g.vertex_count()) throw GraphError("center is not a vertex");
    if (radius < 0) throw GraphError("radius must be >= 0");
    Ball ball;
    ball.center = center;
    ball.radius = radius;
    ball.distance.assign(g.vertex_count(), -1);
    std::queue<VertexId> q;
    ball.distance[center] = 0;
    q.push(center);
    while (!q.empty()) {
        VertexId v = q.front();
        q.pop();
        if (ball.distance[v] == radius) continue;
        for (VertexId w : g.neighbors(v)) {
            if (ball.distance[w] < 0) {
                ball.distance[w] = ball.distance[v] + 1;
                q.push(w);
            }
        }
    }
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        if (ball.distance[v] < 0) continue;
        ball.vertices.push_back(static_cast<VertexId>(v));
        if (ball.distance[v] == radius) ball.boundary.push_back(static_cast<VertexId>(v));
    }
    return ball;
}

Truncation truncate(const Graph& g, VertexId center, int radius) {
    if (radius < 1) throw GraphError("truncation radius must be >= 1");
    Ball ball = ball_and_boundary(g, center, radius);
    Truncation t;
    t.to_parent = ball.vertices;
    t.to_local.assign(g.vertex_count(), kNoVertex);
    for (std::size_t i = 0; i < t.to_parent.size(); ++i) t.to_local[t.to_parent[i]] = static_cast<VertexId>(i);

    std::vector<std::vector<VertexId>> adj(t.to_parent.size());
    std::vector<std::string> labels;
    labels.reserve(t.to_parent.size());
    for (std::size_t i = 0; i < t.to_parent.size(); ++i) {
        VertexId p = t.to_parent[i];
        for (VertexId w : g.neighbors(p))
            if (t.to_local[w] != kNoVertex) adj[i].push_back(t.to_local[w]);
        labels.push_back(g.label(p));
    }
    std::vector<VertexId> sink;
    for (VertexId p : ball.boundary) sink.push_back(t.to_local[p]);
    t.domain.graph = Graph(std::move(adj), std::move(labels));
    t.domain.sink = SinkSet(t.domain.graph.vertex_count(), std::move(sink));
    t.domain.start = t.to_local[center];
    return t;
}

EdgeListInput parse_edge_list(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> raw;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<std::string>> pragmas;
    std::vector<std::string> declared;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind(kVerticesPragma, 0) == 0) {
            std::istringstream ps(line.substr(kVerticesPragma.size()));
            for (std::string t; ps >> t;) declared.push_back(t);
            continue;
        }
        if (line.rfind(kOrderPragma, 0) == 0) {
            std::istringstream ps(line.substr(kOrderPragma.size()));
            std::vector<std::string> toks;
            for (std::string t; ps >> t;) toks.push_back(t);
            if (toks.size() < 2) throw GraphError("edge list line " + std::to_string(line_no) + ": malformed order pragma");
            pragmas.push_back(std::move(toks));
            continue;
        }
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string u, v, extra;
        if (!(ls >> u)) continue;
        if (!(ls >> v) || (ls >> extra))
            throw GraphError("edge list line " + std::to_string(line_no) + ": expected exactly two vertices");
        raw.emplace_back(u, v);
    }
    if (raw.empty()) throw GraphError("edge list contains no edges");

    EdgeListInput out;
    bool numeric = true;
    long long max_id = -1;
    std::map<long long, int> ints;
    for (auto& [u, v] : raw) {
        for (const auto* s : {&u, &v}) {
            long long x = 0;
            if (!parse_int(*s, x) || x < 0) {
                numeric = false;
                break;
            }
            ints[x] = 1;
            max_id = std::max(max_id, x);
        }
        if (!numeric) break;
    }
    if (numeric && declared.empty() && static_cast<long long>(ints.size()) == max_id + 1) {
        for (auto& [u, v] : raw) out.edges.emplace_back(std::stoi(u), std::stoi(v));
        for (long long i = 0; i <= max_id; ++i) out.labels.push_back(std::to_string(i));
    } else {
        std::unordered_map<std::string, VertexId> ids;
        auto id = [&](const std::string& s) {
            auto [it, inserted] = ids.emplace(s, static_cast<VertexId>(out.labels.size()));
            if (inserted) out.labels.push_back(s);
            return it->second;
        };
        for (const auto& d : declared) id(d);
        for (auto& [u, v] : raw) {
            VertexId a = id(u);
            VertexId b = id(v);
            out.edges.emplace_back(a, b);
        }
    }
    if (!pragmas.empty()) {
        std::unordered_map<std::string, VertexId> by_label;
        for (std::size_t i = 0; i < out.labels.size(); ++i) by_label.emplace(out.labels[i], static_cast<VertexId>(i));
        auto lookup = [&](const std::string& s) {
            auto it = by_label.find(s);
            if (it == by_label.end()) throw GraphError("order pragma names unknown vertex '" + s + "'");
            return it->second;
        };
        out.orders.assign(out.labels.size(), {});
        for (const auto& toks : pragmas) {
            auto& order = out.orders[lookup(toks[0])];
            order.clear();
            for (std::size_t i = 1; i < toks.size(); ++i) order.push_back(lookup(toks[i]));
        }
    }
    return out;
}
Graph read_edge_list(std::istream& in) { return build_from_edge_list(parse_edge_list(in)); }

Graph read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open edge list '" + path + "'");
    return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
    out << "# vertices " << g.vertex_count() << " edges " << g.edge_count() << "\n";
    // Labels are written when they survive tokenization; the vertices pragma
    // then pins the id order. Default labels are the ids themselves.
    bool use_labels = false;
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        if (g.label(static_cast<VertexId>(v)) != std::to_string(v)) use_labels = true;
    std::set<std::string_view> distinct;
    for (const auto& l : g.labels()) {
        if (l.empty() || l.find_first_of(" \t\r\n#") != std::string::npos) use_labels = false;
        distinct.insert(l);
    }
    if (distinct.size() != g.vertex_count()) use_labels = false;
    auto name = [&](std::size_t v) -> std::string {
        return use_labels ? g.label(static_cast<VertexId>(v)) : std::to_string(v);
    };
    if (use_labels) {
        out << kVerticesPragma;
        for (std::size_t v = 0; v < g.vertex_count(); ++v) out << (v ? " " : "") << name(v);
        out << '\n';
    }
    std::vector<std::vector<VertexId>> appearance(g.vertex_count());
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        for (VertexId w : g.neighbors(static_cast<VertexId>(v))) {
            if (static_cast<VertexId>(v) < w) {
                out << name(v) << ' ' << name(w) << '\n';
                appearance[v].push_back(w);
                appearance[w].push_back(static_cast<VertexId>(v));
            }
        }
    }
    // Rotor orders that first appearance does not reproduce.
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        auto nb = g.neighbors(static_cast<VertexId>(v));
        if (std::equal(nb.begin(), nb.end(), appearance[v].begin(), appearance[v].end())) continue;
        out << kOrderPragma << name(v);
        for (VertexId w : nb) out << ' ' << name(w);
        out << '\n';
    }
}

VertexId resolve_vertex(const Graph& g, std::string_view token) {
    if (auto v = g.find_label(token)) return *v;
    long long x = 0;
    if (parse_int(token, x) && x >= 0 && static_cast<std::size_t>(x) < g.vertex_count()) return static_cast<VertexId>(x);
    throw GraphError("unknown vertex '" + std::string(token) + "'");
}

std::vector<std::string_view> split_list(std::string_view text) {
    std::vector<std::string_view> out;
    int depth = 0;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        char c = i < text.size() ? text[i] : ',';
        if (c == '(') ++depth;
        else if (c == ')') --depth;
        else if (c == ',' && depth <= 0) {
            if (i > begin) out.push_back(text.substr(begin, i - begin));
            begin = i + 1;
        }
    }
    return out;
}

std::vector<VertexId> resolve_vertices(const Graph& g, std::string_view comma_list) {
    std::vector<VertexId> out;
    for (auto tok : split_list(comma_list)) out.push_back(resolve_vertex(g, tok));
    return out;
}

std::string graph_metadata_json(const Graph& g, const SinkSet& sink) {
    nlohmann::ordered_json j;
    j["vertex_count"] = g.vertex_count();
    j["edge_count"] = g.edge_count();
    std::map<std::size_t, std::size_t> hist;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) ++hist[g.degree(static_cast<VertexId>(v))];
    nlohmann::ordered_json h = nlohmann::ordered_json::object();
    for (auto [d, c] : hist) h[std::to_string(d)] = c;
    j["degree_histogram"] = h;
    j["sink"] = sink.vertices();
    return j.dump(2);
}

namespace corpus {

namespace {

Domain make(std::vector<std::string> labels, std::vector<std::vector<VertexId>> adj, std::vector<VertexId> sink,
            VertexId start) {
    Domain d{Graph(std::move(adj), std::move(labels)), {}, start};
    d.sink = SinkSet(d.graph.vertex_count(), std::move(sink));
    return d;
}

}  // namespace

Domain path3() { return make({"v0", "v1", "v2"}, {{1}, {0, 2}, {1}}, {2}, 0); }

Domain triangle() { return make({"a", "b", "z"}, {{1, 2}, {2, 0}, {0, 1}}, {2}, 0); }

Domain k4() {
    return make({"a", "b", "c", "z"}, {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}, {3}, 0);
}

Domain star3() { return make({"c", "l1", "l2", "l3"}, {{1, 2, 3}, {0}, {0}, {0}}, {3}, 0); }

Domain grid2x3() {
    // id = 3 * i + j for row i in {0,1}, column j in {0,1,2}; order (+i, -i, +j, -j).
    std::vector<std::vector<VertexId>> adj(6);
    std::vector<std::string> labels;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j) {
            auto& list = adj[3 * i + j];
            if (i + 1 < 2) list.push_back(3 * (i + 1) + j);
            if (i - 1 >= 0) list.push_back(3 * (i - 1) + j);
            if (j + 1 < 3) list.push_back(3 * i + j + 1);
            if (j - 1 >= 0) list.push_back(3 * i + j - 1);
            labels.push_back("(" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
    return make(std::move(labels), std::move(adj), {5}, 0);
}

Domain by_name(std::string_view name) {
    if (name == "P3") return path3();
    if (name == "K3") return triangle();
    if (name == "K4") return k4();
    if (name == "star3") return star3();
    if (name == "grid2x3") return grid2x3();
    throw GraphError("unknown corpus graph '" + std::string(name) + "'");
}

std::vector<std::string> names() { return {"P3", "K3", "K4", "star3", "grid2x3"}; }

}  // namespace corpus

}  // namespace rotorwalk
