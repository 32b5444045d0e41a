#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rotorwalk {

using VertexId = std::int32_t;

inline constexpr VertexId kNoVertex = -1;

class GraphError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/*
 * Immutable simple connected graph in compressed adjacency form.
 *
 * The order of each adjacency list is the cyclic order used by the rotor at
 * that vertex: the rotor advances from slot i to slot (i + 1) mod deg.
 */
class Graph {
public:
    Graph() = default;

    // Throws GraphError on self-loops, repeated neighbors, asymmetric lists or
    // a disconnected vertex set.
    explicit Graph(std::vector<std::vector<VertexId>> adjacency,
                   std::vector<std::string> labels = {});

    std::size_t vertex_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const { return neighbors_.size() / 2; }
    std::size_t directed_edge_count() const { return neighbors_.size(); }

    std::size_t degree(VertexId v) const {
        return static_cast<std::size_t>(offsets_[v + 1] - offsets_[v]);
    }
    std::span<const VertexId> neighbors(VertexId v) const {
        return {neighbors_.data() + offsets_[v], degree(v)};
    }
    VertexId neighbor(VertexId v, std::size_t slot) const { return neighbors_[offsets_[v] + slot]; }

    // Offset of v's first slot in the flat directed-edge numbering.
    std::size_t edge_offset(VertexId v) const { return static_cast<std::size_t>(offsets_[v]); }

    // Slot of w in v's adjacency list, or -1 when w is not adjacent.
    int slot_of(VertexId v, VertexId w) const;

    const std::string& label(VertexId v) const { return labels_[v]; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::optional<VertexId> find_label(std::string_view label) const;

    std::uint64_t total_degree() const { return neighbors_.size(); }

    std::vector<std::vector<VertexId>> adjacency() const;

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.offsets_ == b.offsets_ && a.neighbors_ == b.neighbors_;
    }

private:
    std::vector<std::int64_t> offsets_;
    std::vector<VertexId> neighbors_;
    std::vector<std::string> labels_;
};

class SinkSet {
public:
    SinkSet() = default;
    SinkSet(std::size_t vertex_count, std::vector<VertexId> members);

    bool contains(VertexId v) const { return member_[v] != 0; }
    bool empty() const { return list_.empty(); }
    std::size_t size() const { return list_.size(); }
    std::size_t universe() const { return member_.size(); }
    const std::vector<VertexId>& vertices() const { return list_; }

private:
    std::vector<char> member_;
    std::vector<VertexId> list_;
};

// A graph together with the absorbing set and the conventional start vertex.
struct Domain {
    Graph graph;
    SinkSet sink;
    VertexId start = 0;
};

struct Ball {
    VertexId center = 0;
    int radius = 0;
    std::vector<VertexId> vertices;  // ascending id
    std::vector<VertexId> boundary;  // distance exactly radius, ascending id
    std::vector<int> distance;       // per vertex of the graph, -1 beyond radius
};

struct Truncation {
    Domain domain;                    // induced subgraph, sink = boundary
    std::vector<VertexId> to_parent;  // local id -> parent id
    std::vector<VertexId> to_local;   // parent id -> local id or kNoVertex
};

enum class BallMetric { LInf, L1 };

// Induced subgraph of Z^d on the ball of radius R around the origin; the sink
// is the set of points at distance exactly R.
Domain build_grid_box(int dimension, int radius, BallMetric metric = BallMetric::LInf);

// Full b-ary tree of the given depth; leaves form the sink; start is the root.
Domain build_bary_tree(int branching, int depth);

// b-ary tree of depth D with a path y_0..y_L attached to the root. The sink
// is the depth-D leaves together with y_L and the start vertex is y_0.
Domain build_tree_with_ray(int branching, int depth, int ray_length);

struct EdgeListInput {
    std::vector<std::pair<VertexId, VertexId>> edges;
    std::vector<std::string> labels;  // optional, indexed by vertex id
    // Optional per-vertex neighbor order overriding first appearance.
    std::vector<std::vector<VertexId>> orders;
};

Graph build_from_edge_list(const EdgeListInput& input);

Ball ball_and_boundary(const Graph& g, VertexId center, int radius);

// BFS distances from `center` over the whole graph.
std::vector<int> distances_from(const Graph& g, VertexId center);

Truncation truncate(const Graph& g, VertexId center, int radius);

// Edge-list text: one `u v` pair per line, `#` starts a comment. Tokens are
// vertex names; when every token is a non-negative integer and the set of
// integers is exactly 0..n-1 those integers are the vertex ids, otherwise ids
// follow first appearance. A line `#@order v w1 w2 ...` overrides the
// first-appearance rotor order of v; other readers see it as a comment.
EdgeListInput parse_edge_list(std::istream& in);
Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& g);

// Resolve a vertex by label first, then by integer id.
VertexId resolve_vertex(const Graph& g, std::string_view token);
std::vector<VertexId> resolve_vertices(const Graph& g, std::string_view comma_list);
// Comma-separated items; commas inside parentheses (lattice labels) do not split.
std::vector<std::string_view> split_list(std::string_view text);

std::string graph_metadata_json(const Graph& g, const SinkSet& sink);

// Small fixed graphs used throughout the tests and exact experiments.
namespace corpus {
Domain path3();       // v0 - v1 - v2, sink {v2}, start v0
Domain triangle();    // a, b, z; sink {z}; start a; order a:(b,z) b:(z,a) z:(a,b)
Domain k4();          // a, b, c, z; sink {z}; start a
Domain star3();       // center c with leaves l1 l2 l3; sink {l3}; start c
Domain grid2x3();     // 2 x 3 grid; start (0,0); sink far corner (1,2)
Domain by_name(std::string_view name);
std::vector<std::string> names();
}  // namespace corpus

}  // namespace rotorwalk
