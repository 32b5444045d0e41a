#include "rotorwalk/implicit_tree.hpp"

namespace rotorwalk {

ImplicitTree::ImplicitTree(int branching, int depth, int ray_length)
    : branching_(branching), depth_(depth), ray_length_(ray_length), stride_(static_cast<std::size_t>(branching) + 1) {
    if (branching < 2) throw GraphError("branching must be >= 2");
    if (depth < 1) throw GraphError("depth must be >= 1");
    if (ray_length < 0) throw GraphError("ray length must be >= 0");
    reset();
}

void ImplicitTree::reset() {
    nodes_.clear();
    links_.clear();
    create(kNoVertex, false, 0, 0);
    if (ray_length_ > 0) {
        VertexId y0 = create(0, true, 0, 0);
        links_[0] = y0;  // parent slot of the root
        links_[y0 * stride_] = 0;
    }
}

VertexId ImplicitTree::create(VertexId parent, bool ray, int level, int child_index) {
    const auto id = static_cast<VertexId>(nodes_.size());
    int distance = 0;
    if (ray) {
        distance = level;
    } else {
        distance = ray_length_ > 0 ? level + 1 : level;
    }
    nodes_.push_back(Node{parent, level, distance, child_index, ray});
    links_.resize(links_.size() + stride_, kNoVertex);
    return id;
}

std::size_t ImplicitTree::degree(VertexId v) const {
    const Node& n = nodes_[v];
    if (n.ray) return n.level == ray_length_ ? 1 : 2;
    if (n.level == depth_) return 1;
    if (n.level == 0) return static_cast<std::size_t>(branching_) + (ray_length_ > 0 ? 1 : 0);
    return stride_;
}

bool ImplicitTree::is_sink(VertexId v) const {
    const Node& n = nodes_[v];
    return n.ray ? n.level == ray_length_ : n.level == depth_;
}

VertexId ImplicitTree::neighbor(VertexId v, std::size_t slot) {
    VertexId& link = links_[v * stride_ + slot];
    if (link != kNoVertex) return link;
    const Node n = nodes_[v];
    VertexId w = kNoVertex;
    if (n.ray) {
        // Slot 0 (toward the root) always exists; slot 1 leads outward.
        w = create(v, true, n.level + 1, 0);
        links_[w * stride_] = v;
    } else {
        // Slot layout: [parent or y_0], child_1 .. child_b; the bare root has no parent slot.
        const bool has_parent_slot = n.level > 0 || ray_length_ > 0;
        const int child = static_cast<int>(slot) + (has_parent_slot ? 0 : 1);
        w = create(v, false, n.level + 1, child);
        links_[w * stride_] = v;
    }
    // `link` may dangle after create() grew links_.
    links_[v * stride_ + slot] = w;
    return w;
}

std::string ImplicitTree::label(VertexId v) const {
    const Node& n = nodes_[v];
    if (n.ray) return "y" + std::to_string(n.level);
    if (n.level == 0) return "o";
    // Heap index: root 0, child j of h is h * b + j.
    std::vector<int> path;
    for (VertexId u = v; nodes_[u].level > 0; u = nodes_[u].parent) path.push_back(nodes_[u].child_index);
    unsigned long long heap = 0;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        if (heap > (~0ULL - static_cast<unsigned long long>(*it)) / static_cast<unsigned long long>(branching_))
            return "t?";  // beyond 64-bit heap indices
        heap = heap * static_cast<unsigned long long>(branching_) + static_cast<unsigned long long>(*it);
    }
    return "t" + std::to_string(heap);
}

}  // namespace rotorwalk
