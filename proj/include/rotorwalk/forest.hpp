#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rotorwalk/engine.hpp"
#include "rotorwalk/graph.hpp"
#include "rotorwalk/rng.hpp"
#include "rotorwalk/topology.hpp"

namespace rotorwalk {

class SamplerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool is_forest(const Graph& g, const SinkSet& sink, const RotorConfig& rho);

/*
 * Sink-oriented spanning forest sampled by Wilson's algorithm, one vertex at a
 * time and only where asked. Each request runs a loop-erased random walk from
 * the vertex until it meets the part of the forest already built (or the
 * sink). Whatever order the requests come in, the joint law of the rotors
 * handed out is the uniform Z-oriented spanning forest restricted to them, so
 * a walk can draw its initial rotors on the fly.
 *
 * Besides the initial forest ρ it keeps the current rotor configuration of a
 * rotor walk started on ρ.
 */
template <Topology Topo>
class LazyForest {
public:
    static constexpr std::int32_t kUnassigned = -2;

    LazyForest(Topo& topo, Rng& rng, std::uint64_t step_budget = std::numeric_limits<std::uint64_t>::max())
        : topo_(&topo), rng_(&rng), budget_(step_budget) {}

    // Forget all rotors. The topology is not touched.
    void reset() {
        initial_.clear();
        current_.clear();
        pos_.clear();
    }

    bool assigned(VertexId v) const {
        return static_cast<std::size_t>(v) < initial_.size() && initial_[v] != kUnassigned;
    }

    std::int32_t initial_rotor(VertexId v) {
        ensure(v);
        return initial_[v];
    }
    std::int32_t current_rotor(VertexId v) {
        ensure(v);
        return current_[v];
    }
    VertexId initial_target(VertexId v) {
        std::int32_t r = initial_rotor(v);
        return r < 0 ? kNoVertex : topo_->neighbor(v, static_cast<std::size_t>(r));
    }
    VertexId current_target(VertexId v) {
        std::int32_t r = current_rotor(v);
        return r < 0 ? kNoVertex : topo_->neighbor(v, static_cast<std::size_t>(r));
    }

    void ensure(VertexId v) {
        grow();
        if (initial_[v] != kUnassigned) return;
        if (topo_->is_sink(v)) {
            initial_[v] = current_[v] = kNoRotor;
            return;
        }
        branch_from(v);
    }

    // Rotor walk from `start` on the current rotors, stopped on the sink or on
    // reaching distance >= stop_distance. `visit(t, x)` sees every position,
    // the stopping one included. Returns the number of steps, or the budget
    // value if it ran out.
    template <class Visit>
    std::uint64_t walk(VertexId start, int stop_distance, std::uint64_t step_cap, Visit&& visit,
                       VertexId* final_position = nullptr) {
        VertexId x = start;
        std::uint64_t t = 0;
        for (;;) {
            visit(t, x);
            if (topo_->is_sink(x) || topo_->distance(x) >= stop_distance) break;
            if (t == step_cap) break;
            ensure(x);
            auto deg = static_cast<std::int32_t>(topo_->degree(x));
            std::int32_t r = current_[x] + 1;
            if (r == deg) r = 0;
            current_[x] = r;
            x = topo_->neighbor(x, static_cast<std::size_t>(r));
            ++t;
        }
        if (final_position) *final_position = x;
        return t;
    }

    const std::vector<std::int32_t>& initial() const { return initial_; }
    const std::vector<std::int32_t>& current() const { return current_; }

private:
    void grow() {
        std::size_t n = topo_->vertex_count();
        if (initial_.size() < n) {
            initial_.resize(n, kUnassigned);
            current_.resize(n, kUnassigned);
            pos_.resize(n, 0);
        }
    }

    bool in_forest(VertexId v) const { return topo_->is_sink(v) || initial_[v] != kUnassigned; }

    bool on_path(VertexId v) const {
        std::size_t p = pos_[v];
        return p < path_.size() && path_[p] == v;
    }

    void branch_from(VertexId v) {
        path_.clear();
        exits_.clear();
        path_.push_back(v);
        pos_[v] = 0;
        std::uint64_t steps = 0;
        VertexId x = v;
        for (;;) {
            if (++steps > budget_) throw SamplerError("loop-erased walk exceeded its step budget");
            std::size_t slot = uniform_index(*rng_, topo_->degree(x));
            VertexId y = topo_->neighbor(x, slot);
            grow();
            if (in_forest(y)) {
                exits_.push_back(static_cast<std::int32_t>(slot));
                break;
            }
            if (on_path(y)) {
                // Erase the loop closed at y.
                std::size_t keep = pos_[y] + 1;
                path_.resize(keep);
                exits_.resize(keep - 1);
            } else {
                exits_.push_back(static_cast<std::int32_t>(slot));
                pos_[y] = path_.size();
                path_.push_back(y);
            }
            x = y;
        }
        for (std::size_t i = 0; i < path_.size(); ++i) initial_[path_[i]] = current_[path_[i]] = exits_[i];
    }

    Topo* topo_;
    Rng* rng_;
    std::uint64_t budget_;
    std::vector<std::int32_t> initial_;
    std::vector<std::int32_t> current_;
    std::vector<std::size_t> pos_;
    std::vector<VertexId> path_;
    std::vector<std::int32_t> exits_;
};

// Whole-graph Wilson sampler with its own stream.
class ForestSampler {
public:
    ForestSampler(const Graph& g, const SinkSet& sink, std::uint64_t seed, std::uint64_t stream = 0);

    RotorConfig sample();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    DomainView view_;
    std::uint64_t seed_;
    std::uint64_t stream_;
    Rng rng_;
};

// Vertices processed in ascending id order.
RotorConfig wilson_sample(const Graph& g, const SinkSet& sink, Rng& rng);

// All Z-oriented spanning forests, in lexicographic order of the slot vector.
std::vector<RotorConfig> enumerate_forests(const Graph& g, const SinkSet& sink, std::uint64_t bound = 10'000'000);

boost::multiprecision::cpp_int count_forests_matrix_tree(const Graph& g, const SinkSet& sink);

// ⟨a, ρ(a), ρ(ρ(a)), ...⟩ up to and including the sink vertex reached.
std::vector<VertexId> forward_path(const Graph& g, const SinkSet& sink, const RotorConfig& f, VertexId a);

// Sink vertex at the end of every vertex's forward path.
std::vector<VertexId> forest_roots(const Graph& g, const SinkSet& sink, const RotorConfig& f);

// Vertices of the tree containing a, ascending.
std::vector<VertexId> tree_of(const Graph& g, const SinkSet& sink, const RotorConfig& f, VertexId a);

// Vertices with a directed path into x (x included), ascending.
std::vector<VertexId> w_set(const Graph& g, const SinkSet& sink, const RotorConfig& f, VertexId x);

bool is_complete(const Graph& g, const SinkSet& sink, const RotorConfig& f, VertexId x);

// Incomplete vertices of P(a, F) in path order (the terminal sink vertex excluded).
std::vector<VertexId> incomplete_on_path(const Graph& g, const SinkSet& sink, const RotorConfig& f, VertexId a);

void write_forest_csv(std::ostream& os, const Graph& g, const RotorConfig& f, bool header = true);

struct MarginalRow {
    std::string edge;
    double estimate = 0;
    double stderr_ = 0;
    std::uint64_t samples = 0;
    int radius = 0;
};

struct MarginalTable {
    std::vector<MarginalRow> rows;
    void write_csv(std::ostream& os) const;
};

// Builds the truncation at radius R; the start vertex of the domain is the centre.
using DomainFamily = std::function<Domain(int radius)>;

/*
 * Frequency of {x -> y in F} for each edge "x->y" of `edges` (labels), and of
 * all of them jointly, over N Wilson samples on the domain built at each
 * radius in `radii`. Edges must lie in the ball of radius `inner` around the
 * start vertex.
 */
MarginalTable owusf_marginal_estimate(const DomainFamily& family, const std::vector<std::string>& edges, int inner,
                                      const std::vector<int>& radii, std::uint64_t samples, std::uint64_t seed,
                                      int threads = 1);

}  // namespace rotorwalk
