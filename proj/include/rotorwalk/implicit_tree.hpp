#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rotorwalk/graph.hpp"
#include "rotorwalk/topology.hpp"

namespace rotorwalk {

/*
 * Lazily materialized b-ary tree of depth D, optionally with a path
 * y_0 .. y_L attached to the root. Same vertex set, sink and rotor orders as
 * build_bary_tree / build_tree_with_ray, but vertices only exist once a walk
 * has reached them, so depths far beyond what fits in memory are usable.
 *
 * Ids are dense in creation order. The root is id 0; with a ray, y_0 is id 1
 * and is the start vertex, otherwise the root is.
 */
class ImplicitTree {
public:
    ImplicitTree(int branching, int depth, int ray_length = 0);

    std::size_t vertex_count() const { return nodes_.size(); }
    std::size_t degree(VertexId v) const;
    VertexId neighbor(VertexId v, std::size_t slot);
    bool is_sink(VertexId v) const;
    int distance(VertexId v) const { return nodes_[v].distance; }
    VertexId start() const { return ray_length_ > 0 ? 1 : 0; }

    bool is_ray(VertexId v) const { return nodes_[v].ray; }
    // Tree depth for tree vertices, ray index for ray vertices.
    int level(VertexId v) const { return nodes_[v].level; }
    VertexId parent(VertexId v) const { return nodes_[v].parent; }

    int branching() const { return branching_; }
    int depth() const { return depth_; }
    int ray_length() const { return ray_length_; }

    // Label matching the materialized builders ("o", "t<heap index>", "y<i>").
    std::string label(VertexId v) const;

    // Drop every vertex except the root (and y_0).
    void reset();

private:
    struct Node {
        VertexId parent;
        std::int32_t level;
        std::int32_t distance;
        std::int32_t child_index;  // 1-based position among the parent's children
        bool ray;
    };

    VertexId create(VertexId parent, bool ray, int level, int child_index);

    int branching_;
    int depth_;
    int ray_length_;
    std::size_t stride_;
    std::vector<Node> nodes_;
    std::vector<VertexId> links_;  // stride_ slots per node, kNoVertex until created
};

static_assert(Topology<ImplicitTree>);

}  // namespace rotorwalk
