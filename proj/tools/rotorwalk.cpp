#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rotorwalk/engine.hpp"
#include "rotorwalk/experiments.hpp"
#include "rotorwalk/forest.hpp"
#include "rotorwalk/green.hpp"
#include "rotorwalk/parallel.hpp"
#include "rotorwalk/rng.hpp"

using namespace rotorwalk;
namespace fs = std::filesystem;

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("ROTORWALK_OUT");
    return env && *env ? env : ".";
}

Json make_manifest(const std::string& sub, const Json& config, std::uint64_t seed, bool seed_drawn,
                   const std::string& out) {
    Json m;
    m["subcommand"] = sub;
    m["config"] = config;
    m["seed"] = seed;
    if (seed_drawn) m["seed_drawn"] = true;
    m["output"] = out;
    m["version"] = artifact_version();
    return m;
}

// Output goes to `path`, or stdout when empty; the manifest leads as comments.
class Output {
public:
    Output(const std::string& path, const Json& manifest) {
        if (!path.empty()) {
            if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
        }
        stream() << "# rotorwalk " << artifact_version() << "\n# manifest " << manifest.dump() << '\n';
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

struct GraphInput {
    std::string path;
    std::string sink;
    std::string start;
};

struct Loaded {
    Graph graph;
    SinkSet sink;
    VertexId start = 0;
};

Loaded load(const GraphInput& in, bool need_start) {
    Loaded l;
    l.graph = read_edge_list_file(in.path);
    if (in.sink.empty()) throw CLI::ValidationError("--sink", "a sink vertex list is required");
    l.sink = SinkSet(l.graph.vertex_count(), resolve_vertices(l.graph, in.sink));
    if (need_start) {
        if (in.start.empty()) throw CLI::ValidationError("--start", "a start vertex is required");
        l.start = resolve_vertex(l.graph, in.start);
    }
    return l;
}

void add_graph_input(CLI::App* app, GraphInput& in, bool start) {
    app->add_option("--graph", in.path, "Edge-list file")->required()->check(CLI::ExistingFile);
    app->add_option("--sink", in.sink, "Comma-separated sink vertices (labels or ids)")->required();
    if (start) app->add_option("--start", in.start, "Start vertex (label or id)")->required();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rotor walks, spanning forests and Green functions on graphs"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(artifact_version()));

    int threads = 1;
    std::uint64_t seed = 0;
    app.add_option("--threads", threads, "Replica worker threads")->check(CLI::PositiveNumber);

    // graph
    auto* g_cmd = app.add_subcommand("graph", "Build a graph family and write edge list + metadata");
    std::string family, metric = "linf", g_name, g_out = default_out_dir(), corpus_name;
    int dim = 2, radius = 1, b = 2, depth = 1, ray = 1;
    g_cmd->add_option("--family", family, "grid | bary | tree-ray | corpus")
        ->required()
        ->check(CLI::IsMember({"grid", "bary", "tree-ray", "corpus"}));
    g_cmd->add_option("--dim", dim, "Lattice dimension")->check(CLI::PositiveNumber);
    g_cmd->add_option("--radius", radius, "Lattice radius")->check(CLI::PositiveNumber);
    g_cmd->add_option("--metric", metric, "Ball metric for grids")->check(CLI::IsMember({"linf", "l1"}));
    g_cmd->add_option("--b", b, "Branching number")->check(CLI::Range(2, 1 << 20));
    g_cmd->add_option("--depth", depth, "Tree depth")->check(CLI::PositiveNumber);
    g_cmd->add_option("--ray", ray, "Ray length")->check(CLI::PositiveNumber);
    g_cmd->add_option("--name", corpus_name, "Corpus graph name (corpus family)");
    g_cmd->add_option("--stem", g_name, "Output file stem (default: derived from parameters)");
    g_cmd->add_option("--out", g_out, "Output directory (default $ROTORWALK_OUT or .)");

    // sample
    auto* s_cmd = app.add_subcommand("sample", "Draw uniform sink-oriented spanning forests (Wilson)");
    GraphInput s_in;
    std::uint64_t s_n = 1;
    std::string s_out;
    add_graph_input(s_cmd, s_in, false);
    s_cmd->add_option("--n", s_n, "Number of forests")->check(CLI::PositiveNumber);
    s_cmd->add_option("--seed", seed, "Master seed (drawn and echoed when omitted)");
    s_cmd->add_option("--out", s_out, "Output file (default stdout)");

    // walk
    auto* w_cmd = app.add_subcommand("walk", "Run rotor walks to the sink");
    GraphInput w_in;
    std::string rho_text, w_init = "given", w_out, trace_out;
    std::uint64_t w_n = 1, step_cap = 0;
    bool w_json = false;
    add_graph_input(w_cmd, w_in, true);
    w_cmd->add_option("--rho", rho_text, "Initial rotors as x:y,... (unlisted vertices use slot 0)");
    w_cmd->add_option("--init", w_init, "given | wilson | random")->check(CLI::IsMember({"given", "wilson", "random"}));
    w_cmd->add_option("--n", w_n, "Number of sequential walks")->check(CLI::PositiveNumber);
    w_cmd->add_option("--seed", seed, "Seed for --init wilson/random");
    w_cmd->add_option("--step-cap", step_cap, "Per-walk step cap (default 2 |V| sum deg)");
    w_cmd->add_flag("--json", w_json, "Write the walk outcome as JSON instead of CSV");
    w_cmd->add_option("--trace", trace_out, "Write a step trace CSV to this file (single walk)");
    w_cmd->add_option("--out", w_out, "Output file (default stdout)");

    // green
    auto* gr_cmd = app.add_subcommand("green", "Green function by exact solve or Monte Carlo");
    GraphInput gr_in;
    bool exact = false;
    std::uint64_t mc = 0;
    std::string gr_out;
    add_graph_input(gr_cmd, gr_in, true);
    gr_cmd->add_flag("--exact", exact, "Rational arithmetic");
    gr_cmd->add_option("--mc", mc, "Monte Carlo with this many walks instead of a solve");
    gr_cmd->add_option("--seed", seed, "Seed for --mc");
    gr_cmd->add_option("--out", gr_out, "Output file (default stdout)");

    // experiment
    auto* e_cmd = app.add_subcommand("experiment", "Run a named experiment from a JSON config");
    std::string config_path, e_out = default_out_dir(), e_stem;
    bool plots = false, list = false;
    e_cmd->add_option("--config", config_path, "Experiment spec (JSON)")->check(CLI::ExistingFile);
    e_cmd->add_option("--seed", seed, "Master seed (overrides the config)");
    e_cmd->add_option("--out", e_out, "Output directory (default $ROTORWALK_OUT or .)");
    e_cmd->add_option("--stem", e_stem, "Output file stem (default: config file name)");
    e_cmd->add_flag("--emit-plots", plots, "Write SVG charts of the series");
    e_cmd->add_flag("--list", list, "List experiment names and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; every usage error exits 2.
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (g_cmd->parsed()) {
            Domain d;
            Json params;
            std::string stem;
            if (family == "grid") {
                d = build_grid_box(dim, radius, metric == "l1" ? BallMetric::L1 : BallMetric::LInf);
                params = {{"dim", dim}, {"radius", radius}, {"metric", metric}};
                stem = "grid_d" + std::to_string(dim) + "_r" + std::to_string(radius) + "_" + metric;
            } else if (family == "bary") {
                d = build_bary_tree(b, depth);
                params = {{"b", b}, {"depth", depth}};
                stem = "bary_b" + std::to_string(b) + "_d" + std::to_string(depth);
            } else if (family == "tree-ray") {
                d = build_tree_with_ray(b, depth, ray);
                params = {{"b", b}, {"depth", depth}, {"ray", ray}};
                stem = "treeray_b" + std::to_string(b) + "_d" + std::to_string(depth) + "_l" + std::to_string(ray);
            } else {
                d = corpus::by_name(corpus_name);
                params = {{"name", corpus_name}};
                stem = corpus_name;
            }
            if (!g_name.empty()) stem = g_name;
            Json manifest = make_manifest("graph", {{"family", family}, {"params", params}}, 0, false, g_out);
            fs::create_directories(g_out);
            const fs::path edges = fs::path(g_out) / (stem + ".edges");
            const fs::path meta = fs::path(g_out) / (stem + ".json");
            {
                Output o(edges.string(), manifest);
                o.stream() << "# start " << d.graph.label(d.start) << '\n';
                write_edge_list(o.stream(), d.graph);
            }
            {
                std::ofstream m(meta);
                Json j = Json::parse(graph_metadata_json(d.graph, d.sink));
                j["start"] = d.graph.label(d.start);
                j["manifest"] = manifest;
                m << j.dump(2) << '\n';
            }
            std::cout << edges.string() << '\n' << meta.string() << '\n';
            return 0;
        }

        if (s_cmd->parsed()) {
            bool drawn = s_cmd->count("--seed") == 0;
            if (drawn) seed = draw_seed();
            Loaded l = load(s_in, false);
            Json cfg = {{"graph", s_in.path}, {"sink", s_in.sink}, {"n", s_n}};
            Output o(s_out, make_manifest("sample", cfg, seed, drawn, s_out));
            if (drawn) std::cerr << "seed " << seed << '\n';
            std::vector<RotorConfig> forests(s_n);
            for_each_replica(s_n, threads, [&](std::size_t i) {
                forests[i] = ForestSampler(l.graph, l.sink, seed, i).sample();
            });
            if (s_n == 1) {
                write_forest_csv(o.stream(), l.graph, forests[0]);
            } else {
                o.stream() << "sample,forest\n";
                for (std::size_t i = 0; i < forests.size(); ++i) {
                    std::string f = format_config(l.graph, forests[i]);
                    std::replace(f.begin(), f.end(), ',', ' ');
                    o.stream() << i << ',' << f << '\n';
                }
            }
            return 0;
        }

        if (w_cmd->parsed()) {
            bool drawn = w_init != "given" && w_cmd->count("--seed") == 0;
            if (drawn) seed = draw_seed();
            Loaded l = load(w_in, true);
            RotorConfig rho;
            if (w_init == "given") {
                rho = parse_config(l.graph, l.sink, rho_text);
            } else {
                Rng rng = make_stream(seed, 0);
                if (w_init == "wilson") {
                    rho = wilson_sample(l.graph, l.sink, rng);
                } else {
                    rho.assign(l.graph.vertex_count(), kNoRotor);
                    for (std::size_t v = 0; v < rho.size(); ++v)
                        if (!l.sink.contains(static_cast<VertexId>(v)))
                            rho[v] = static_cast<std::int32_t>(uniform_index(rng, l.graph.degree(static_cast<VertexId>(v))));
                }
            }
            validate_config(l.graph, l.sink, rho);
            Json cfg = {{"graph", w_in.path}, {"sink", w_in.sink}, {"start", w_in.start}, {"init", w_init},
                        {"rho", format_config(l.graph, rho)}, {"n", w_n}};
            Output o(w_out, make_manifest("walk", cfg, seed, drawn, w_out));
            if (drawn) std::cerr << "seed " << seed << '\n';
            if (w_n == 1) {
                std::vector<TraceEntry> trace;
                WalkOptions opts;
                opts.step_cap = step_cap;
                if (!trace_out.empty()) opts.trace = &trace;
                WalkOutcome out = run_to_sink(l.graph, l.sink, l.start, rho, opts);
                if (w_json)
                    o.stream() << outcome_json(l.graph, out) << '\n';
                else
                    write_outcome_csv(o.stream(), l.graph, out);
                if (!trace_out.empty()) {
                    std::ofstream t(trace_out);
                    write_trace_csv(t, l.graph, trace);
                }
                std::cerr << "status " << to_string(out.status) << " steps " << out.steps << " sigma "
                          << format_config(l.graph, out.sigma) << '\n';
                return out.status == WalkStatus::Terminated ? 0 : 3;
            }
            OccupationResult res = run_n_walks(l.graph, l.sink, l.start, rho, w_n, step_cap);
            o.stream() << "vertex,S_n,rate\n";
            for (std::size_t v = 0; v < res.totals.size(); ++v)
                o.stream() << l.graph.label(static_cast<VertexId>(v)) << ',' << res.totals[v] << ','
                           << format_number(static_cast<double>(res.totals[v]) / static_cast<double>(res.walks))
                           << '\n';
            std::cerr << "walks " << res.walks << " status " << to_string(res.status) << '\n';
            if (res.status != WalkStatus::Terminated) {
                std::cerr << "walk " << res.failed_walk << " exceeded the step cap\n";
                return 3;
            }
            return 0;
        }

        if (gr_cmd->parsed()) {
            bool drawn = mc > 0 && gr_cmd->count("--seed") == 0;
            if (drawn) seed = draw_seed();
            Loaded l = load(gr_in, true);
            Json cfg = {{"graph", gr_in.path}, {"sink", gr_in.sink}, {"start", gr_in.start}, {"exact", exact},
                        {"mc", mc}};
            Output o(gr_out, make_manifest("green", cfg, seed, drawn, gr_out));
            if (drawn) std::cerr << "seed " << seed << '\n';
            GreenTable t = mc > 0 ? green_mc(l.graph, l.sink, l.start, mc, seed, threads)
                                  : green_exact(l.graph, l.sink, l.start, exact ? Arithmetic::Exact : Arithmetic::Float);
            write_green_csv(o.stream(), l.graph, t);
            return 0;
        }

        if (e_cmd->parsed()) {
            if (list) {
                for (const auto& n : experiment_names()) std::cout << n << '\n';
                return 0;
            }
            if (config_path.empty()) throw CLI::ValidationError("--config", "an experiment config is required");
            std::ifstream in(config_path);
            Json cfg = Json::parse(in);
            ExperimentSpec spec = ExperimentSpec::from_json(cfg);
            if (e_cmd->count("--seed")) {
                spec.seed = seed;
                spec.seed_given = true;
            }
            if (!spec.seed_given)
                throw CLI::ValidationError("--seed", "experiments need a seed (in the config or via --seed)");
            std::string stem = e_stem.empty() ? fs::path(config_path).stem().string() : e_stem;
            Json manifest = make_manifest("experiment", spec.to_json(), spec.seed, false, e_out);
            manifest["threads"] = threads;
            RunContext ctx;
            ctx.threads = threads;
            ctx.manifest = manifest;
            ExperimentReport rep = run_experiment(spec, ctx);
            auto files = write_report(rep, e_out, stem, manifest, plots);
            std::cout << spec.experiment << ": " << to_string(rep.verdict) << '\n';
            for (const auto& c : rep.checks)
                std::cout << "  [" << (c.passed ? "pass" : "FAIL") << "] " << c.name
                          << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
            for (const auto& n : rep.notes) std::cout << "  note: " << n << '\n';
            for (const auto& f : files) std::cout << "  wrote " << f << '\n';
            return rep.verdict == Verdict::Fail ? 1 : 0;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
