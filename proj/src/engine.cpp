#include "rotorwalk/engine.hpp"

#include <boost/container_hash/hash.hpp>
#include <nlohmann/json.hpp>

#include <ostream>
#include <unordered_map>

namespace rotorwalk {

const char* to_string(WalkStatus s) {
    return s == WalkStatus::Terminated ? "Terminated" : "StepCapExceeded";
}

std::uint64_t WalkOutcome::edge_count(const Graph& g, VertexId from, VertexId to) const {
    int slot = g.slot_of(from, to);
    if (slot < 0 || edge_util.empty()) return 0;
    return edge_util[g.edge_offset(from) + static_cast<std::size_t>(slot)];
}

std::uint64_t default_step_cap(const Graph& g) {
    return 2 * static_cast<std::uint64_t>(g.vertex_count()) * g.total_degree();
}

void validate_config(const Graph& g, const SinkSet& sink, const RotorConfig& rho) {
    if (rho.size() != g.vertex_count())
        throw WalkError("rotor configuration has " + std::to_string(rho.size()) + " entries, graph has " +
                        std::to_string(g.vertex_count()) + " vertices");
    for (std::size_t v = 0; v < rho.size(); ++v) {
        auto x = static_cast<VertexId>(v);
        if (sink.contains(x)) continue;
        if (rho[v] < 0 || static_cast<std::size_t>(rho[v]) >= g.degree(x))
            throw WalkError("rotor at vertex " + g.label(x) + " is out of range");
    }
}

RotorConfig parse_config(const Graph& g, const SinkSet& sink, std::string_view text) {
    RotorConfig rho(g.vertex_count(), 0);
    for (VertexId z : sink.vertices()) rho[z] = kNoRotor;
    for (std::string_view item : split_list(text)) {
        auto colon = item.find(':');
        if (colon == std::string_view::npos)
            throw WalkError("rotor entry '" + std::string(item) + "' is not of the form x:y");
        VertexId x = resolve_vertex(g, item.substr(0, colon));
        VertexId y = resolve_vertex(g, item.substr(colon + 1));
        if (sink.contains(x)) throw WalkError("rotor given for sink vertex " + g.label(x));
        int slot = g.slot_of(x, y);
        if (slot < 0) throw WalkError(g.label(y) + " is not a neighbor of " + g.label(x));
        rho[x] = slot;
    }
    return rho;
}

std::string format_config(const Graph& g, const RotorConfig& rho) {
    std::string s;
    for (std::size_t v = 0; v < rho.size(); ++v) {
        if (rho[v] < 0) continue;
        if (!s.empty()) s += ',';
        auto x = static_cast<VertexId>(v);
        s += g.label(x) + ":" + g.label(g.neighbor(x, static_cast<std::size_t>(rho[v])));
    }
    return s;
}

VertexId step(const Graph& g, const SinkSet& sink, VertexId x, RotorConfig& rho) {
    if (sink.contains(x)) throw WalkError("step called at sink vertex " + g.label(x));
    auto deg = static_cast<std::int32_t>(g.degree(x));
    std::int32_t r = rho[x] + 1;
    if (r == deg) r = 0;
    rho[x] = r;
    return g.neighbor(x, static_cast<std::size_t>(r));
}

WalkOutcome run_to_sink(const Graph& g, const SinkSet& sink, VertexId start, RotorConfig rho,
                        const WalkOptions& options) {
    const std::size_t n = g.vertex_count();
    const std::uint64_t cap = options.step_cap ? options.step_cap : default_step_cap(g);
    WalkOutcome out;
    out.odometer.assign(n, 0);
    if (options.track_edges) out.edge_util.assign(g.directed_edge_count(), 0);
    if (options.track_visits) {
        out.first_visit.assign(n, kNeverVisited);
        out.last_visit.assign(n, kNeverVisited);
    }

    VertexId x = start;
    std::uint64_t t = 0;
    while (!sink.contains(x)) {
        if (t == cap) {
            out.status = WalkStatus::StepCapExceeded;
            break;
        }
        ++out.odometer[x];
        if (options.track_visits) {
            if (out.first_visit[x] == kNeverVisited) out.first_visit[x] = static_cast<std::int64_t>(t);
            out.last_visit[x] = static_cast<std::int64_t>(t);
        }
        auto deg = static_cast<std::int32_t>(g.degree(x));
        std::int32_t r = rho[x] + 1;
        if (r == deg) r = 0;
        rho[x] = r;
        if (options.track_edges) ++out.edge_util[g.edge_offset(x) + static_cast<std::size_t>(r)];
        VertexId next = g.neighbor(x, static_cast<std::size_t>(r));
        ++t;
        if (options.trace) options.trace->push_back({t, next, x});
        x = next;
    }
    if (out.status == WalkStatus::Terminated && options.track_visits) {
        if (out.first_visit[x] == kNeverVisited) out.first_visit[x] = static_cast<std::int64_t>(t);
        out.last_visit[x] = static_cast<std::int64_t>(t);
    }
    out.steps = t;
    out.final_position = x;
    out.sigma = std::move(rho);
    return out;
}

namespace {

// Walk without bookkeeping beyond the odometer; returns false on cap.
bool walk_accumulate(const Graph& g, const SinkSet& sink, VertexId start, RotorConfig& rho, std::uint64_t cap,
                     std::vector<std::uint64_t>* totals) {
    VertexId x = start;
    std::uint64_t t = 0;
    while (!sink.contains(x)) {
        if (t == cap) return false;
        if (totals) ++(*totals)[x];
        x = step(g, sink, x, rho);
        ++t;
    }
    return true;
}

std::size_t config_hash(const RotorConfig& rho) { return boost::hash_range(rho.begin(), rho.end()); }

}  // namespace

OccupationResult run_n_walks(const Graph& g, const SinkSet& sink, VertexId start, RotorConfig rho, std::uint64_t n,
                             std::uint64_t step_cap, const Checkpoint& checkpoint) {
    const std::uint64_t cap = step_cap ? step_cap : default_step_cap(g);
    OccupationResult res;
    res.totals.assign(g.vertex_count(), 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!walk_accumulate(g, sink, start, rho, cap, &res.totals)) {
            res.status = WalkStatus::StepCapExceeded;
            res.failed_walk = static_cast<std::int64_t>(i);
            break;
        }
        ++res.walks;
        if (checkpoint) checkpoint(res.walks, res.totals);
    }
    res.sigma = std::move(rho);
    return res;
}

PeriodResult detect_sigma_period(const Graph& g, const SinkSet& sink, VertexId start, const RotorConfig& rho,
                                 std::uint64_t max_iterations, std::uint64_t step_cap) {
    validate_config(g, sink, rho);
    const std::uint64_t cap = step_cap ? step_cap : default_step_cap(g);
    PeriodResult res;
    std::unordered_multimap<std::size_t, std::uint64_t> seen;
    RotorConfig cur = rho;
    RotorConfig replay;
    for (std::uint64_t j = 0; j <= max_iterations; ++j) {
        auto [lo, hi] = seen.equal_range(config_hash(cur));
        for (auto it = lo; it != hi; ++it) {
            // Hashes can collide: rebuild σ^i(ρ) and compare in full.
            replay = rho;
            for (std::uint64_t i = 0; i < it->second; ++i) walk_accumulate(g, sink, start, replay, cap, nullptr);
            if (replay == cur) {
                res.preperiod = it->second;
                res.period = j - it->second;
                res.found = true;
                return res;
            }
        }
        seen.emplace(config_hash(cur), j);
        if (!walk_accumulate(g, sink, start, cur, cap, nullptr)) {
            res.status = WalkStatus::StepCapExceeded;
            return res;
        }
    }
    return res;
}

CesaroResult cesaro_occupation(const Graph& g, const SinkSet& sink, VertexId start, const RotorConfig& rho,
                               std::uint64_t max_iterations, std::uint64_t step_cap) {
    CesaroResult res;
    res.period = detect_sigma_period(g, sink, start, rho, max_iterations, step_cap);
    if (!res.period.found) return res;
    const std::uint64_t cap = step_cap ? step_cap : default_step_cap(g);
    RotorConfig cur = rho;
    for (std::uint64_t i = 0; i < res.period.preperiod; ++i) walk_accumulate(g, sink, start, cur, cap, nullptr);
    res.totals.assign(g.vertex_count(), 0);
    for (std::uint64_t i = 0; i < res.period.period; ++i) walk_accumulate(g, sink, start, cur, cap, &res.totals);
    res.average.resize(res.totals.size());
    for (std::size_t v = 0; v < res.totals.size(); ++v)
        res.average[v] = static_cast<double>(res.totals[v]) / static_cast<double>(res.period.period);
    return res;
}

std::string outcome_json(const Graph& g, const WalkOutcome& out) {
    nlohmann::ordered_json j;
    j["status"] = to_string(out.status);
    j["steps"] = out.steps;
    j["final_position"] = out.final_position == kNoVertex ? std::string() : g.label(out.final_position);
    j["labels"] = g.labels();
    j["odometer"] = out.odometer;
    j["first_visit"] = out.first_visit;
    j["last_visit"] = out.last_visit;
    j["sigma"] = out.sigma;
    j["edge_util"] = out.edge_util;
    return j.dump(2);
}

void write_outcome_csv(std::ostream& os, const Graph& g, const WalkOutcome& out) {
    os << "vertex,u,FV,LV\n";
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        auto x = static_cast<VertexId>(v);
        os << g.label(x) << ',' << out.odometer[v] << ',';
        if (!out.first_visit.empty()) os << out.first_visit[v];
        os << ',';
        if (!out.last_visit.empty()) os << out.last_visit[v];
        os << '\n';
    }
}

void write_trace_csv(std::ostream& os, const Graph& g, const std::vector<TraceEntry>& trace) {
    os << "step,position,rotor_vertex\n";
    for (const auto& e : trace) os << e.step << ',' << g.label(e.position) << ',' << g.label(e.rotor_vertex) << '\n';
}

}  // namespace rotorwalk
