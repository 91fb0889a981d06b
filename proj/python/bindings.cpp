#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ptensor/combinatorics.hpp"
#include "ptensor/error.hpp"
#include "ptensor/gnn.hpp"
#include "ptensor/maps.hpp"
#include "ptensor/oracle.hpp"

namespace py = pybind11;
using namespace ptensor;

namespace {

py::int_ to_py(const BigInt& n) { return py::int_(py::module_::import("builtins").attr("int")(n.str())); }

std::vector<double> demo(const std::string& graph, const std::string& config, const std::string& features,
                         std::uint64_t seed) {
    const Graph g = parse_graph(graph);
    const auto cfg = parse_model_config(config);
    const auto f = features.empty() ? default_features(g.n) : parse_features(features, g.n);
    if (cfg.numeric == NumericMode::Integer) {
        const auto out = model_forward(g, integer_features(f), build_model<std::int64_t>(cfg, f.cols(), seed));
        return {out.begin(), out.end()};
    }
    return model_forward(g, f, build_model<double>(cfg, f.cols(), seed));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<SizeError>(m, "SizeError", base);
    py::register_exception<ContractError>(m, "ContractError", base);
    py::register_exception<ParseError>(m, "ParseError", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<IsolatedNeuronError>(m, "IsolatedNeuronError", base);

    m.def("bell", [](int n) { return to_py(bell(n)); }, py::arg("n"));
    m.def(
        "count",
        [](int k_in, int k_out, const std::string& mode) {
            return to_py(parse_map_mode(mode) == MapMode::SameDomain ? count_same_domain(k_in, k_out)
                                                                     : count_overlap(k_in, k_out));
        },
        py::arg("k_in"), py::arg("k_out"), py::arg("mode") = "same");
    m.def(
        "enumerate",
        [](int k_in, int k_out, const std::string& mode) {
            std::vector<std::string> out;
            for (const auto& s : enumerate_specs(k_in, k_out, parse_map_mode(mode))) out.push_back(describe_spec(s));
            return out;
        },
        py::arg("k_in"), py::arg("k_out"), py::arg("mode") = "same");
    m.def(
        "burnside_dimension",
        [](int k_in, int k_out, std::size_t a, std::size_t b, std::size_t c) {
            return to_py(burnside_dimension(k_in, k_out, BlockGeometry{a, b, c}));
        },
        py::arg("k_in"), py::arg("k_out"), py::arg("a"), py::arg("b"), py::arg("c"));
    m.def(
        "span_rank",
        [](int k_in, int k_out, std::size_t a, std::size_t b, std::size_t c) {
            return span_rank(enumerate_specs(k_in, k_out, MapMode::Overlap), BlockGeometry{a, b, c}.geometry());
        },
        py::arg("k_in"), py::arg("k_out"), py::arg("a"), py::arg("b"), py::arg("c"));
    m.def("demo", &demo, py::arg("graph"), py::arg("config"), py::arg("features") = "", py::arg("seed") = 0,
          "Invariant embedding of a graph given as edge-list text and a JSON model config.");
}
