#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "metaco/evaluate.hpp"
#include "metaco/gin.hpp"
#include "metaco/heuristics.hpp"
#include "metaco/instance_gen.hpp"
#include "metaco/io.hpp"
#include "metaco/metrics.hpp"
#include "metaco/problems.hpp"
#include "metaco/training.hpp"

namespace py = pybind11;
using namespace metaco;

namespace {

ProblemSpec spec_for(const std::string& problem, std::optional<double> beta) {
    const ProblemKind kind = parse_problem(problem);
    return beta ? ProblemSpec::with_beta(kind, *beta) : ProblemSpec::defaults(kind);
}

std::vector<NodeId> selected(const DiscreteSolution& X) { return X.selected(); }

std::vector<Instance> to_instances(const std::vector<Graph>& graphs, const std::vector<std::optional<double>>& refs) {
    if (!refs.empty() && refs.size() != graphs.size())
        throw std::invalid_argument("references must match the number of graphs");
    std::vector<Instance> out;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        Instance inst{std::to_string(i), graphs[i], std::nullopt, {}};
        if (!refs.empty() && refs[i]) {
            inst.reference = refs[i];
            inst.reference_kind = "exact";
        }
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_metaco, m) {
    m.doc() = "Meta-learned unsupervised GNN solvers for combinatorial optimization";

    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<VersionError>(m, "VersionError", PyExc_ValueError);

    py::class_<Graph>(m, "Graph")
        .def(py::init([](std::size_t n, const std::vector<Edge>& edges) { return Graph::from_edge_list(n, edges); }),
             py::arg("n"), py::arg("edges"))
        .def_property_readonly("num_nodes", &Graph::num_nodes)
        .def_property_readonly("num_edges", &Graph::num_edges)
        .def("edges", [](const Graph& g) { return std::vector<Edge>(g.edges().begin(), g.edges().end()); })
        .def("neighbors",
             [](const Graph& g, NodeId v) {
                 if (v >= g.num_nodes()) throw py::index_error("node out of range");
                 auto s = g.neighbors(v);
                 return std::vector<NodeId>(s.begin(), s.end());
             })
        .def("degree", &Graph::degree)
        .def("has_edge", &Graph::has_edge)
        .def("__eq__", [](const Graph& a, const Graph& b) { return a == b; })
        .def("__repr__", [](const Graph& g) {
            return "Graph(n=" + std::to_string(g.num_nodes()) + ", m=" + std::to_string(g.num_edges()) + ")";
        });

    m.def("complement", &complement);
    m.def("gen_rrg", [](std::size_t n, std::size_t degree, std::uint64_t seed) { return gen_rrg({n, degree, seed}); },
          py::arg("n"), py::arg("degree") = 3, py::arg("seed") = 0);
    m.def("gen_rb",
          [](std::size_t groups, std::size_t group_size, double rho, std::uint64_t seed) {
              return gen_rb({groups, group_size, rho, seed});
          },
          py::arg("groups") = 20, py::arg("group_size") = 10, py::arg("rho") = 0.25, py::arg("seed") = 0);
    m.def("gen_er", &gen_er, py::arg("n"), py::arg("p"), py::arg("seed") = 0);

    m.def("save_graph", &save_graph);
    m.def("load_graph", &load_graph);

    m.def(
        "relaxed_loss",
        [](const std::string& problem, const Graph& g, const std::vector<double>& x, std::optional<double> beta) {
            return relaxed_loss(spec_for(problem, beta), g, x);
        },
        py::arg("problem"), py::arg("graph"), py::arg("x"), py::arg("beta") = py::none());
    m.def(
        "round",
        [](const std::string& problem, const Graph& g, const std::vector<double>& x, std::optional<double> beta) {
            return selected(round(spec_for(problem, beta), g, SoftAssignment(x)));
        },
        py::arg("problem"), py::arg("graph"), py::arg("x"), py::arg("beta") = py::none(),
        "Sequential rounding; returns the selected nodes.");
    m.def(
        "is_feasible",
        [](const std::string& problem, const Graph& g, const std::vector<NodeId>& sel) {
            return is_feasible(parse_problem(problem), g, DiscreteSolution::from_selected(g.num_nodes(), sel));
        },
        py::arg("problem"), py::arg("graph"), py::arg("selected"));
    m.def(
        "exact_optimum",
        [](const std::string& problem, const Graph& g) {
            auto o = exact_optimum(ProblemSpec::defaults(parse_problem(problem)), g);
            return py::make_tuple(o.value, selected(o.witness));
        },
        py::arg("problem"), py::arg("graph"), "Exact optimum and a witness (small graphs only).");

    m.def("rga_mis", [](const Graph& g, std::uint64_t seed) { return selected(rga_mis(g, seed)); }, py::arg("graph"),
          py::arg("seed") = 0);
    m.def("dga_mis", [](const Graph& g) { return selected(dga_mis(g)); });
    m.def("greedy_mvc", [](const Graph& g) { return selected(greedy_mvc(g)); });
    m.def("toenshoff_greedy_mc", [](const Graph& g) { return selected(toenshoff_greedy_mc(g)); });

    m.def("apr", [](double found, double reference, const std::string& problem) {
        return apr(found, reference, ProblemSpec::defaults(parse_problem(problem)).sense());
    });
    m.def("format_mean_std", [](const std::vector<double>& v) { return format_mean_std(mean_std(v)); });

    py::class_<GinConfig>(m, "GinConfig")
        .def(py::init([](const std::string& problem) { return GinConfig::for_problem(parse_problem(problem)); }),
             py::arg("problem") = "mis")
        .def_readwrite("layers", &GinConfig::layers)
        .def_readwrite("hidden_dim", &GinConfig::hidden_dim)
        .def_readwrite("mlp_depth", &GinConfig::mlp_depth)
        .def_readwrite("input_dim", &GinConfig::input_dim)
        .def_readwrite("normalize", &GinConfig::normalize)
        .def_readwrite("residual", &GinConfig::residual);

    py::class_<ModelParams>(m, "Model")
        .def_readonly("config", &ModelParams::config)
        .def_property_readonly("parameter_count", &ModelParams::parameter_count)
        .def("names", &ModelParams::names)
        .def(
            "forward",
            [](const ModelParams& p, const Graph& g, const std::string& features, std::uint64_t seed) {
                auto init = trial_features(parse_feature_kind(features), g, seed, 0, 0);
                auto x = forward(p, g, init);
                return std::vector<double>(x.values().begin(), x.values().end());
            },
            py::arg("graph"), py::arg("features") = "seed", py::arg("seed") = 0,
            "Soft assignment in (0, 1) per node.")
        .def("save", [](const ModelParams& p, const std::filesystem::path& path) { save_checkpoint(path, p); });

    m.def("init_params", &init_params, py::arg("config"), py::arg("seed") = 0);
    m.def("load_checkpoint", [](const std::filesystem::path& path) { return load_checkpoint(path); });

    m.def(
        "train",
        [](const std::vector<Graph>& train, const std::vector<Graph>& val, const std::string& problem,
           const std::string& method, std::size_t iters, std::size_t batch, std::size_t hidden,
           std::optional<std::string> features, std::uint64_t seed) {
            TrainConfig cfg = TrainConfig::for_problem(parse_problem(problem));
            cfg.max_iters = iters;
            cfg.batch_size = batch;
            cfg.model.hidden_dim = hidden;
            cfg.seed = seed;
            if (features) cfg.features = parse_feature_kind(*features);
            auto tr = to_instances(train, {});
            auto va = to_instances(val, {});
            py::gil_scoped_release release;
            TrainState s = method == "egn" ? train_egn(tr, va, cfg) : train_meta_egn(tr, va, cfg);
            return s.params;
        },
        py::arg("train"), py::arg("val"), py::arg("problem") = "mis", py::arg("method") = "meta-egn",
        py::arg("iters") = 100, py::arg("batch") = 32, py::arg("hidden") = 64, py::arg("features") = py::none(),
        py::arg("seed") = 0);

    m.def(
        "evaluate",
        [](const ModelParams& p, const std::vector<Graph>& graphs, const std::string& problem,
           const std::string& protocol, std::optional<std::string> features,
           const std::vector<std::optional<double>>& references, std::uint64_t seed) {
            const ProblemKind kind = parse_problem(problem);
            EvalOptions opts;
            opts.spec = ProblemSpec::defaults(kind);
            opts.protocol = parse_protocol(protocol);
            opts.features = features ? parse_feature_kind(*features) : TrainConfig::for_problem(kind).features;
            opts.seed = seed;
            auto inst = to_instances(graphs, references);
            std::vector<RunRecord> rows;
            {
                py::gil_scoped_release release;
                rows = evaluate(p, inst, opts);
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["instance_id"] = r.instance_id;
                d["objective"] = r.objective;
                d["feasible"] = r.feasible;
                d["apr"] = r.apr;
                d["loss_before"] = r.loss_before;
                d["loss_after"] = r.loss_after;
                d["time_ms"] = r.time_ms_total();
                out.append(d);
            }
            return out;
        },
        py::arg("model"), py::arg("graphs"), py::arg("problem") = "mis", py::arg("protocol") = "fast",
        py::arg("features") = py::none(), py::arg("references") = std::vector<std::optional<double>>{},
        py::arg("seed") = 0);
}
