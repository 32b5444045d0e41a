#pragma once

#include <concepts>
#include <cstddef>
#include <vector>

#include "rotorwalk/graph.hpp"

namespace rotorwalk {

/*
 * A locally finite graph explored one vertex at a time, with an absorbing set
 * and graph distances from a distinguished start vertex. `neighbor` may grow
 * the vertex set (lazily materialized graphs), so ids of vertices not yet
 * reached are meaningless until they are returned by `neighbor`.
 */
template <class T>
concept Topology = requires(T& t, const T& ct, VertexId v, std::size_t slot) {
    { ct.vertex_count() } -> std::convertible_to<std::size_t>;
    { ct.degree(v) } -> std::convertible_to<std::size_t>;
    { t.neighbor(v, slot) } -> std::convertible_to<VertexId>;
    { ct.is_sink(v) } -> std::convertible_to<bool>;
    { ct.distance(v) } -> std::convertible_to<int>;
    { ct.start() } -> std::convertible_to<VertexId>;
};

// Materialized graph seen through the Topology interface.
class DomainView {
public:
    DomainView(const Graph& g, const SinkSet& sink, VertexId start)
        : graph_(&g), sink_(&sink), start_(start), distance_(distances_from(g, start)) {}
    explicit DomainView(const Domain& d) : DomainView(d.graph, d.sink, d.start) {}

    std::size_t vertex_count() const { return graph_->vertex_count(); }
    std::size_t degree(VertexId v) const { return graph_->degree(v); }
    VertexId neighbor(VertexId v, std::size_t slot) const { return graph_->neighbor(v, slot); }
    bool is_sink(VertexId v) const { return sink_->contains(v); }
    int distance(VertexId v) const { return distance_[v]; }
    VertexId start() const { return start_; }

    const Graph& graph() const { return *graph_; }
    const SinkSet& sink() const { return *sink_; }

private:
    const Graph* graph_;
    const SinkSet* sink_;
    VertexId start_;
    std::vector<int> distance_;
};

static_assert(Topology<DomainView>);

}  // namespace rotorwalk
