#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rotorwalk/engine.hpp"
#include "rotorwalk/experiments.hpp"
#include "rotorwalk/forest.hpp"
#include "rotorwalk/graph.hpp"
#include "rotorwalk/green.hpp"

namespace py = pybind11;
using namespace rotorwalk;

namespace {

Domain domain_from_edges(const std::string& text, const std::vector<std::string>& sink, const std::string& start) {
    std::istringstream in(text);
    Domain d;
    d.graph = read_edge_list(in);
    std::vector<VertexId> z;
    for (const auto& s : sink) z.push_back(resolve_vertex(d.graph, s));
    d.sink = SinkSet(d.graph.vertex_count(), z);
    d.start = start.empty() ? 0 : resolve_vertex(d.graph, start);
    return d;
}

py::dict outcome_dict(const Graph& g, const WalkOutcome& o) {
    py::dict d;
    py::dict u, fv, lv;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        const auto& l = g.label(static_cast<VertexId>(v));
        u[py::str(l)] = o.odometer[v];
        fv[py::str(l)] = o.first_visit[v];
        lv[py::str(l)] = o.last_visit[v];
    }
    d["odometer"] = u;
    d["first_visit"] = fv;
    d["last_visit"] = lv;
    d["steps"] = o.steps;
    d["status"] = to_string(o.status);
    d["sigma"] = format_config(g, o.sigma);
    return d;
}

}  // namespace

PYBIND11_MODULE(_rotorwalk, m) {
    m.doc() = "Rotor walks, spanning forests and Green functions";
    m.attr("__version__") = artifact_version();

    py::class_<Domain>(m, "Domain")
        .def_property_readonly("vertex_count", [](const Domain& d) { return d.graph.vertex_count(); })
        .def_property_readonly("edge_count", [](const Domain& d) { return d.graph.edge_count(); })
        .def_property_readonly("labels", [](const Domain& d) { return d.graph.labels(); })
        .def_property_readonly("sink",
                               [](const Domain& d) {
                                   std::vector<std::string> out;
                                   for (VertexId z : d.sink.vertices()) out.push_back(d.graph.label(z));
                                   return out;
                               })
        .def_property_readonly("start", [](const Domain& d) { return d.graph.label(d.start); })
        .def("neighbors",
             [](const Domain& d, const std::string& v) {
                 std::vector<std::string> out;
                 for (VertexId w : d.graph.neighbors(resolve_vertex(d.graph, v))) out.push_back(d.graph.label(w));
                 return out;
             })
        .def("edge_list", [](const Domain& d) {
            std::ostringstream os;
            write_edge_list(os, d.graph);
            return os.str();
        });

    m.def("grid", [](int dim, int radius, const std::string& metric) {
        return build_grid_box(dim, radius, metric == "l1" ? BallMetric::L1 : BallMetric::LInf);
    }, py::arg("dim"), py::arg("radius"), py::arg("metric") = "linf");
    m.def("bary_tree", &build_bary_tree, py::arg("b"), py::arg("depth"));
    m.def("tree_with_ray", &build_tree_with_ray, py::arg("b"), py::arg("depth"), py::arg("ray"));
    m.def("corpus", [](const std::string& name) { return corpus::by_name(name); });
    m.def("from_edge_list", &domain_from_edges, py::arg("text"), py::arg("sink"), py::arg("start") = "");

    m.def("walk", [](const Domain& d, const std::string& rho, std::uint64_t step_cap) {
        WalkOptions opt;
        opt.step_cap = step_cap;
        return outcome_dict(d.graph, run_to_sink(d.graph, d.sink, d.start, parse_config(d.graph, d.sink, rho), opt));
    }, py::arg("domain"), py::arg("rho") = "", py::arg("step_cap") = 0);

    m.def("sample_forest", [](const Domain& d, std::uint64_t seed, std::uint64_t stream) {
        ForestSampler s(d.graph, d.sink, seed, stream);
        return format_config(d.graph, s.sample());
    }, py::arg("domain"), py::arg("seed"), py::arg("stream") = 0);

    m.def("forests", [](const Domain& d) {
        std::vector<std::string> out;
        for (const auto& f : enumerate_forests(d.graph, d.sink)) out.push_back(format_config(d.graph, f));
        return out;
    });
    m.def("count_forests", [](const Domain& d) { return count_forests_matrix_tree(d.graph, d.sink).str(); });

    m.def("green", [](const Domain& d, bool exact) {
        auto t = green_exact(d.graph, d.sink, d.start, exact ? Arithmetic::Exact : Arithmetic::Float);
        py::dict out;
        for (std::size_t v = 0; v < d.graph.vertex_count(); ++v) {
            py::str key(d.graph.label(static_cast<VertexId>(v)));
            if (exact)
                out[key] = py::module_::import("fractions").attr("Fraction")(t.exact[v].str());
            else
                out[key] = t.value[v];
        }
        return out;
    }, py::arg("domain"), py::arg("exact") = false);

    m.def("experiment_names", &experiment_names);
    m.def("run_experiment", [](const std::string& spec_json, int threads) {
        auto spec = ExperimentSpec::from_json(Json::parse(spec_json));
        ExperimentReport r;
        {
            py::gil_scoped_release release;
            r = run_experiment(spec, {threads, {}});
        }
        return r.to_json().dump();
    }, py::arg("spec_json"), py::arg("threads") = 1);

    py::register_exception<GraphError>(m, "GraphError", PyExc_ValueError);
    py::register_exception<WalkError>(m, "WalkError", PyExc_ValueError);
    py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
}
