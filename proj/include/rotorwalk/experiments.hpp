#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rotorwalk/graph.hpp"

namespace rotorwalk {

using Json = nlohmann::ordered_json;

class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/*
 * Families:
 *   grid      dim, radius, metric ("linf" | "l1")
 *   bary      b, depth
 *   tree-ray  b, depth, ray
 *   corpus    name (P3, K3, K4, star3, grid2x3)
 *   edges     path, sink, start (labels)
 * `lazy: true` on bary / tree-ray walks a lazily materialized copy instead.
 */
struct ExperimentSpec {
    std::string experiment;
    std::string family;
    Json params = Json::object();
    std::optional<std::string> start;
    std::vector<std::string> sink;
    bool lazy = false;
    // Two-scale radii: s (measurement) < r (stop) < R (sampling), each optional.
    std::optional<int> s, r, R;
    std::vector<int> r_ladder;
    std::uint64_t samples = 2000;
    std::uint64_t walks = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;
    Json tolerances = Json::object();
    Json options = Json::object();

    static ExperimentSpec from_json(const Json& j);
    Json to_json() const;

    double tolerance(const std::string& key, double fallback) const;
    template <class T>
    T option(const std::string& key, T fallback) const {
        auto it = options.find(key);
        return it == options.end() ? fallback : it->template get<T>();
    }
};

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict v);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Series {
    Series() = default;
    Series(std::string n, std::vector<std::string> c) : name(std::move(n)), columns(std::move(c)) {}

    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    // Columns drawn by --emit-plots; empty plot_x means no chart.
    std::string plot_x;
    std::vector<std::string> plot_y;
    bool log_x = false;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct ExperimentReport {
    std::string experiment;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<Check> checks;
    Json estimates = Json::object();
    std::vector<Series> series;
    std::vector<std::string> notes;
    Json provenance = Json::object();
    double wall_seconds = 0;

    void check(std::string name, bool passed, std::string detail);
    // Pass iff every check passed; Inconclusive when there were none.
    void finalize();
    const Series* find_series(const std::string& name) const;

    Json to_json() const;
    // Body only: the rows that must be identical across reruns.
    std::string series_csv(const Series& s) const;
};

struct RunContext {
    int threads = 1;
    // Extra fields echoed into every output header (CLI manifest).
    Json manifest = Json::object();
};

ExperimentReport run_experiment(const ExperimentSpec& spec, const RunContext& ctx = {});
std::vector<std::string> experiment_names();

// Domain built from a family description; radius override replaces the
// family's size parameter (grid radius, tree depth, tree-ray depth R-1 / ray R).
Domain build_family(const std::string& family, const Json& params, std::optional<int> radius = std::nullopt);

// Shortest round-trip decimal form, locale independent.
std::string format_number(double x);

const char* artifact_version();

// Writes <stem>.json and <stem>_<series>.csv; CSV headers are `#` lines with
// the manifest and a timestamp. Returns the files written.
std::vector<std::string> write_report(const ExperimentReport& report, const std::string& directory,
                                      const std::string& stem, const Json& manifest, bool emit_plots);

// Minimal SVG line chart of columns y_columns against x_column.
std::string svg_line_chart(const Series& s, const std::string& x_column, const std::vector<std::string>& y_columns,
                           bool log_x);

}  // namespace rotorwalk
