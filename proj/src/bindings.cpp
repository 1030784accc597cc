#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "trwbin/certificates.hpp"
#include "trwbin/energy_model.hpp"
#include "trwbin/generator.hpp"
#include "trwbin/oracle.hpp"
#include "trwbin/tree_decomp.hpp"
#include "trwbin/tree_inference.hpp"
#include "trwbin/trw_solver.hpp"

namespace py = pybind11;
using namespace trwbin;

namespace {

std::string certificate_text(const Certificate& cert) {
  std::ostringstream os;
  write_certificate(cert, os);
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sequential tree-reweighted message passing for binary pairwise MRFs";

  py::register_exception<ParseError>(m, "InstanceParseError");
  py::register_exception<SizeLimitError>(m, "SizeLimitError");

  py::class_<Graph>(m, "Graph")
      .def(py::init<int, const std::vector<std::pair<int, int>>&>(), py::arg("vertex_count"),
           py::arg("edges"))
      .def_property_readonly("vertex_count", &Graph::vertex_count)
      .def_property_readonly("edge_count", &Graph::edge_count)
      .def("edges",
           [](const Graph& g) {
             std::vector<std::pair<int, int>> out;
             for (const Edge& e : g.edges()) out.emplace_back(e.s, e.t);
             return out;
           })
      .def("degree", &Graph::degree)
      .def("find_edge", [](const Graph& g, int s, int t) -> py::object {
        const auto e = g.find_edge(s, t);
        return e ? py::cast(*e) : py::none();
      });

  py::class_<Parameters>(m, "Parameters")
      .def(py::init<const Graph&>())
      .def_readwrite("const_term", &Parameters::const_term)
      .def("node", [](const Parameters& p, int s, int j) { return p.node(s, j); })
      .def("set_node",
           [](Parameters& p, int s, int j, double v) { p.node(s, j) = v; })
      .def("edge", [](const Parameters& p, int e, int j, int k) { return p.edge(e, j, k); })
      .def("set_edge",
           [](Parameters& p, int e, int j, int k, double v) { p.edge(e, j, k) = v; });

  py::class_<EnergyModel>(m, "EnergyModel")
      .def(py::init([](const Graph& g, const Parameters& p) {
             if (!p.sized_for(g))
               throw std::invalid_argument("parameters not sized for the graph");
             return EnergyModel{g, p};
           }),
           py::arg("graph"), py::arg("params"))
      .def_readonly("graph", &EnergyModel::graph)
      .def_readonly("params", &EnergyModel::params);

  m.def("evaluate_energy", &evaluate_energy);
  m.def("edge_invariant", &edge_invariant);
  m.def("is_submodular", [](const EnergyModel& model, double tol) {
    const auto rep = is_submodular(model, tol);
    std::vector<std::pair<int, double>> violations;
    for (const auto& v : rep.violations) violations.emplace_back(v.edge, v.slack);
    return std::make_pair(rep.submodular, violations);
  }, py::arg("model"), py::arg("tol") = 0.0);
  m.def("check_reparameterization", &check_reparameterization, py::arg("a"), py::arg("b"),
        py::arg("limit"), py::arg("tol") = kDefaultTol);
  m.def("read_instance", py::overload_cast<const std::string&>(&read_instance));
  m.def("write_instance",
        py::overload_cast<const EnergyModel&, const std::string&>(&write_instance));

  py::class_<Tree>(m, "Tree")
      .def_readonly("vertices", &Tree::vertices)
      .def_readonly("edges", &Tree::edges);

  py::class_<TreeDecomposition>(m, "TreeDecomposition")
      .def_readonly("trees", &TreeDecomposition::trees)
      .def_readonly("rho", &TreeDecomposition::rho);

  py::class_<ThetaCollection>(m, "ThetaCollection")
      .def_readonly("theta", &ThetaCollection::theta);

  m.def("build_edge_decomposition", &build_edge_decomposition);
  m.def("build_chain_decomposition", &build_chain_decomposition, py::arg("graph"),
        py::arg("order") = std::vector<int>{});
  m.def("validate_decomposition", [](const TreeDecomposition& d, const Graph& g) {
    std::vector<std::string> out;
    for (const auto& v : validate(d, g)) out.push_back(v.detail);
    return out;
  });
  m.def("split", &split);
  m.def("combine", &combine);
  m.def("lower_bound", &lower_bound);

  py::enum_<DecompositionKind>(m, "DecompositionKind")
      .value("CHAIN", DecompositionKind::kChain)
      .value("EDGE", DecompositionKind::kEdge);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("decomposition", &SolverConfig::decomposition)
      .def_readwrite("order", &SolverConfig::order)
      .def_readwrite("eps_opt", &SolverConfig::eps_opt)
      .def_readwrite("stall_window", &SolverConfig::stall_window)
      .def_readwrite("max_passes", &SolverConfig::max_passes)
      .def_readwrite("bound_tol", &SolverConfig::bound_tol);

  py::class_<SolverReport>(m, "SolverReport")
      .def_readonly("bound_history", &SolverReport::bound_history)
      .def_readonly("passes_run", &SolverReport::passes_run)
      .def_readonly("wta_reached", &SolverReport::wta_reached)
      .def_property_readonly("terminated_by", [](const SolverReport& r) {
        return r.terminated_by == Termination::kStall ? "stall" : "max-passes";
      });

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("collection", &SolveResult::collection)
      .def_readonly("report", &SolveResult::report);

  m.def("build_decomposition", &build_decomposition);
  m.def("run", &run, py::arg("model"), py::arg("decomposition"), py::arg("config"));

  py::class_<LocalSets>(m, "LocalSets")
      .def_readonly("node_sets", &LocalSets::node_sets)
      .def_readonly("edge_sets", &LocalSets::edge_sets)
      .def("node_contains", &LocalSets::node_contains)
      .def("edge_contains", &LocalSets::edge_contains)
      .def("all_nonempty", &LocalSets::all_nonempty);

  m.def("wta_local_sets", &wta_local_sets, py::arg("graph"), py::arg("collection"),
        py::arg("decomposition"), py::arg("eps") = 1e-8);
  m.def("strong_agreement", &strong_agreement, py::arg("model"), py::arg("collection"),
        py::arg("decomposition"), py::arg("chi"), py::arg("eps") = 1e-8);

  py::class_<PartialLabeling>(m, "PartialLabeling")
      .def(py::init<>())
      .def_readwrite("fixed", &PartialLabeling::fixed)
      .def_readwrite("free_vertices", &PartialLabeling::free_vertices);

  py::class_<DualSolution>(m, "DualSolution")
      .def_readonly("tau_const", &DualSolution::tau_const)
      .def_readonly("node_tau", &DualSolution::node_tau)
      .def_readonly("edge_tau", &DualSolution::edge_tau);

  py::class_<CertificateStatement>(m, "CertificateStatement")
      .def_readonly("name", &CertificateStatement::name)
      .def_readonly("checked", &CertificateStatement::checked)
      .def_readonly("passed", &CertificateStatement::passed)
      .def_readonly("detail", &CertificateStatement::detail);

  py::class_<Certificate>(m, "Certificate")
      .def_readonly("partial", &Certificate::partial)
      .def_readonly("bound", &Certificate::bound)
      .def_readonly("has_dual", &Certificate::has_dual)
      .def_readonly("dual_value", &Certificate::dual_value)
      .def_readonly("gaps", &Certificate::gaps)
      .def_readonly("statements", &Certificate::statements)
      .def("ok", &certificate_ok)
      .def("text", &certificate_text);

  m.def("fixed_vertices", &fixed_vertices);
  m.def("fixed_vertices_by_threshold", &fixed_vertices_by_threshold, py::arg("theta_hat"),
        py::arg("graph"), py::arg("thresh") = 1e-6);
  m.def("extend_to_full", &extend_to_full, py::arg("model"), py::arg("collection"),
        py::arg("decomposition"), py::arg("partial"), py::arg("limit") = 20);
  m.def("submodular_labelings", &submodular_labelings);
  m.def("min_marginal_gap", &min_marginal_gap);
  m.def("dual_solution", &dual_solution);
  m.def("verify_local_polytope", &verify_local_polytope, py::arg("tau"), py::arg("graph"),
        py::arg("tol") = 1e-12);
  m.def("verify_global_optimality",
        [](const EnergyModel& model, const ThetaCollection& c, const TreeDecomposition& d,
           const DualSolution& tau, double tol) {
          const auto check = verify_global_optimality(model, c, d, tau, tol);
          return std::make_tuple(check.optimal, check.primal, check.dual);
        },
        py::arg("model"), py::arg("collection"), py::arg("decomposition"), py::arg("tau"),
        py::arg("tol") = 1e-7);

  py::class_<CertifyOptions>(m, "CertifyOptions")
      .def(py::init<>())
      .def_readwrite("fix_threshold", &CertifyOptions::fix_threshold)
      .def_readwrite("eps_opt", &CertifyOptions::eps_opt)
      .def_readwrite("oracle_limit", &CertifyOptions::oracle_limit)
      .def_readwrite("with_oracle", &CertifyOptions::with_oracle);

  m.def("build_certificate", &build_certificate, py::arg("model"), py::arg("collection"),
        py::arg("decomposition"), py::arg("chi"), py::arg("wta_reached"), py::arg("bound"),
        py::arg("opts") = CertifyOptions{});

  py::class_<MinMarginals>(m, "MinMarginals")
      .def_readonly("optimum", &MinMarginals::optimum)
      .def_readonly("node", &MinMarginals::node)
      .def_readonly("edge", &MinMarginals::edge);

  py::class_<OracleResult>(m, "OracleResult")
      .def_readonly("min_value", &OracleResult::min_value)
      .def_readonly("optima", &OracleResult::optima)
      .def_readonly("min_marginals", &OracleResult::min_marginals);

  m.def("brute_solve", &brute_solve, py::arg("model"),
        py::arg("limit") = kDefaultOracleLimit);
  m.def("constrained_min", &constrained_min, py::arg("model"), py::arg("partial"),
        py::arg("limit") = kDefaultOracleLimit);
  m.def("verify_weak_persistency", &verify_weak_persistency, py::arg("model"),
        py::arg("partial"), py::arg("limit") = kDefaultOracleLimit,
        py::arg("tol") = kDefaultTol);

  py::enum_<Topology>(m, "Topology")
      .value("GRID", Topology::kGrid)
      .value("COMPLETE", Topology::kComplete);

  py::class_<GeneratorConfig>(m, "GeneratorConfig")
      .def(py::init<>())
      .def_readwrite("topology", &GeneratorConfig::topology)
      .def_readwrite("size", &GeneratorConfig::size)
      .def_readwrite("alpha", &GeneratorConfig::alpha)
      .def_readwrite("sigma", &GeneratorConfig::sigma)
      .def_readwrite("seed", &GeneratorConfig::seed);

  py::class_<TrialRecord>(m, "TrialRecord")
      .def_readonly("config", &TrialRecord::config)
      .def_readonly("trial", &TrialRecord::trial)
      .def_readonly("p_cor", &TrialRecord::p_cor)
      .def_readonly("bound", &TrialRecord::bound)
      .def_readonly("wta", &TrialRecord::wta)
      .def_readonly("passes", &TrialRecord::passes)
      .def_readonly("fixed_count", &TrialRecord::fixed_count)
      .def_readonly("wall_ms", &TrialRecord::wall_ms);

  py::class_<BenchOptions>(m, "BenchOptions")
      .def(py::init<>())
      .def_readwrite("solver", &BenchOptions::solver)
      .def_readwrite("fix_threshold", &BenchOptions::fix_threshold);

  m.def("generate", &generate);
  m.def("derive_seed", &derive_seed);
  m.def("node_degree", &node_degree);
  m.def("run_trials", &run_trials, py::arg("config"), py::arg("trials"),
        py::arg("opts") = BenchOptions{});

  // Tree-level exact inference.
  m.def("to_canonical_normal_form", &to_canonical_normal_form);
  m.def("tree_min_value", &tree_min_value, py::arg("graph"), py::arg("tree"),
        py::arg("p_canonical"), py::arg("tol") = kDefaultTol);
  m.def("tree_min_marginals", &tree_min_marginals);
  m.def("tree_optimal_local_sets", &tree_optimal_local_sets, py::arg("graph"),
        py::arg("tree"), py::arg("p"), py::arg("eps") = 1e-8);
  m.def("decode_tree_optimum", &decode_tree_optimum);
}
