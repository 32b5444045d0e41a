#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotorwalk/graph.hpp"

namespace rotorwalk {

// Rotor slot per vertex: rotor(x) points at graph.neighbor(x, slot).
// Entries on sink vertices are kNoRotor.
using RotorConfig = std::vector<std::int32_t>;

inline constexpr std::int32_t kNoRotor = -1;
inline constexpr std::int64_t kNeverVisited = -1;

enum class WalkStatus { Terminated, StepCapExceeded };

const char* to_string(WalkStatus s);

class WalkError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct TraceEntry {
    std::uint64_t step;     // t + 1
    VertexId position;      // X_{t+1}
    VertexId rotor_vertex;  // X_t, the only rotor changed by this step
};

struct WalkOptions {
    std::uint64_t step_cap = 0;  // 0 selects default_step_cap
    bool track_edges = true;
    bool track_visits = true;
    std::vector<TraceEntry>* trace = nullptr;
};

struct WalkOutcome {
    RotorConfig sigma;
    std::vector<std::uint64_t> odometer;
    // Number of moves along each directed edge, indexed by graph.edge_offset(y) + slot.
    std::vector<std::uint64_t> edge_util;
    // Step index of the first/last position at each vertex, kNeverVisited otherwise.
    // The sink vertex where the walk ends gets the termination time.
    std::vector<std::int64_t> first_visit;
    std::vector<std::int64_t> last_visit;
    std::uint64_t steps = 0;
    WalkStatus status = WalkStatus::Terminated;
    VertexId final_position = kNoVertex;

    std::uint64_t edge_count(const Graph& g, VertexId from, VertexId to) const;
};

std::uint64_t default_step_cap(const Graph& g);

// Checks that `rho` has one in-range slot per non-sink vertex.
void validate_config(const Graph& g, const SinkSet& sink, const RotorConfig& rho);

// Rotor configuration from "x:y,..." pairs (labels or ids); unspecified
// non-sink vertices get slot 0.
RotorConfig parse_config(const Graph& g, const SinkSet& sink, std::string_view text);
std::string format_config(const Graph& g, const RotorConfig& rho);

// One application of the walk rule: advance the rotor at `x`, then follow it.
VertexId step(const Graph& g, const SinkSet& sink, VertexId x, RotorConfig& rho);

WalkOutcome run_to_sink(const Graph& g, const SinkSet& sink, VertexId start, RotorConfig rho,
                        const WalkOptions& options = {});

struct OccupationResult {
    std::vector<std::uint64_t> totals;  // S_n
    RotorConfig sigma;                  // σ^n(ρ)
    std::uint64_t walks = 0;            // walks completed
    WalkStatus status = WalkStatus::Terminated;
    std::int64_t failed_walk = -1;      // index of the walk that hit the cap
};

// Called after walk number `n` (1-based) with the running totals S_n.
using Checkpoint = std::function<void(std::uint64_t n, const std::vector<std::uint64_t>& totals)>;

OccupationResult run_n_walks(const Graph& g, const SinkSet& sink, VertexId start, RotorConfig rho,
                             std::uint64_t n, std::uint64_t step_cap = 0, const Checkpoint& checkpoint = {});

struct PeriodResult {
    std::uint64_t preperiod = 0;
    std::uint64_t period = 0;
    bool found = false;
    WalkStatus status = WalkStatus::Terminated;
};

// Smallest k, m with σ^k(ρ) = σ^{k+m}(ρ). Gives up (found = false) after
// max_iterations applications of σ.
PeriodResult detect_sigma_period(const Graph& g, const SinkSet& sink, VertexId start, const RotorConfig& rho,
                                 std::uint64_t max_iterations = 1u << 22, std::uint64_t step_cap = 0);

struct CesaroResult {
    PeriodResult period;
    std::vector<std::uint64_t> totals;  // S_{k+m} - S_k
    std::vector<double> average;        // totals / m
};

CesaroResult cesaro_occupation(const Graph& g, const SinkSet& sink, VertexId start, const RotorConfig& rho,
                               std::uint64_t max_iterations = 1u << 22, std::uint64_t step_cap = 0);

std::string outcome_json(const Graph& g, const WalkOutcome& out);
void write_outcome_csv(std::ostream& os, const Graph& g, const WalkOutcome& out);
void write_trace_csv(std::ostream& os, const Graph& g, const std::vector<TraceEntry>& trace);

}  // namespace rotorwalk
