// Command line front end: instance generation, solving, certification,
// oracle cross-checks, and experiment sweeps.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "trwbin/certificates.hpp"
#include "trwbin/energy_model.hpp"
#include "trwbin/generator.hpp"
#include "trwbin/oracle.hpp"
#include "trwbin/trw_solver.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitVerification = 3;
constexpr int kExitSizeLimit = 4;

struct SolveOutput {
  trwbin::SolveResult result;
  trwbin::TreeDecomposition decomposition;
  trwbin::PartialLabeling threshold_fixed;
};

SolveOutput solve_instance(const trwbin::EnergyModel& model,
                           const trwbin::SolverConfig& config, double fix_threshold) {
  trwbin::TreeDecomposition d = trwbin::build_decomposition(model.graph, config);
  trwbin::SolveResult result = trwbin::run(model, d, config);
  const trwbin::Parameters theta_hat = trwbin::combine(result.collection, d);
  trwbin::PartialLabeling fixed =
      trwbin::fixed_vertices_by_threshold(theta_hat, model.graph, fix_threshold);
  return SolveOutput{std::move(result), std::move(d), std::move(fixed)};
}

void write_solve_report(const SolveOutput& out, const trwbin::SolverConfig& config,
                        double fix_threshold, std::ostream& os) {
  const trwbin::SolverReport& report = out.result.report;
  os << "trw-solve-report 1\n";
  os << "decomp "
     << (config.decomposition == trwbin::DecompositionKind::kChain ? "chain" : "edge")
     << "\n";
  os << "bound " << trwbin::format_real(report.bound_history.back()) << "\n";
  os << "passes " << report.passes_run << "\n";
  os << "terminated "
     << (report.terminated_by == trwbin::Termination::kStall ? "stall" : "max-passes")
     << "\n";
  os << "wta " << (report.wta_reached ? "yes" : "no") << "\n";
  os << "threshold " << trwbin::format_real(fix_threshold) << "\n";
  os << "fixed " << out.threshold_fixed.fixed.size() << "\n";
  for (const auto& [s, j] : out.threshold_fixed.fixed)
    os << "f " << s << " " << int(j) << "\n";
}

struct SolveReportFile {
  double bound = 0.0;
  std::map<int, std::uint8_t> fixed;
};

SolveReportFile read_solve_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw trwbin::ParseError(path + ": cannot open", 0);
  SolveReportFile rep;
  std::string line;
  int line_no = 0;
  bool header_seen = false, bound_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    if (line_no == 1) {
      std::string version;
      ss >> version;
      if (key != "trw-solve-report" || version != "1")
        throw trwbin::ParseError(path + ": not a trw-solve-report", line_no);
      header_seen = true;
      continue;
    }
    if (key == "bound") {
      if (!(ss >> rep.bound)) throw trwbin::ParseError(path + ": bad bound", line_no);
      bound_seen = true;
    } else if (key == "f") {
      int s, j;
      if (!(ss >> s >> j) || (j != 0 && j != 1))
        throw trwbin::ParseError(path + ": bad fixed line", line_no);
      rep.fixed[s] = static_cast<std::uint8_t>(j);
    }
  }
  if (!header_seen || !bound_seen)
    throw trwbin::ParseError(path + ": missing header or bound", 0);
  return rep;
}

std::vector<trwbin::Topology> parse_topologies(const std::vector<std::string>& names) {
  std::vector<trwbin::Topology> out;
  for (const auto& name : names) out.push_back(trwbin::parse_topology(name));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TRW-S solver and certifier for binary pairwise MRFs"};
  app.require_subcommand(1);

  std::string topology_flag = "grid";
  std::vector<std::string> topologies_flag{"grid"};
  int n_flag = 4;
  std::vector<int> sizes_flag{4, 8};
  double alpha_flag = 0.5;
  std::vector<double> alphas_flag{0.5};
  double sigma_d_flag = 4.0;
  std::vector<double> sigma_ds_flag{2, 4, 6, 8, 10};
  std::uint64_t seed_flag = 1;
  int trials_flag = 20;
  std::string out_path, instance_path, report_path;
  std::string decomp_flag = "chain";
  int stall_window = 10;
  int max_passes = 2000;
  double fix_threshold = 1e-6;
  int oracle_limit = trwbin::kDefaultOracleLimit;

  auto add_solver_flags = [&](CLI::App* cmd) {
    cmd->add_option("--decomp", decomp_flag, "Tree decomposition kind")
        ->check(CLI::IsMember({"chain", "edge"}));
    cmd->add_option("--stall-window", stall_window,
                    "Passes without bound increase before stopping");
    cmd->add_option("--max-passes", max_passes, "Hard cap on passes");
    cmd->add_option("--fix-threshold", fix_threshold,
                    "Node gap above which a vertex counts as fixed");
  };

  auto* gen = app.add_subcommand("generate", "Write a random instance file");
  gen->add_option("--topology", topology_flag)->check(CLI::IsMember({"grid", "complete"}));
  gen->add_option("--n", n_flag, "Grid side or complete-graph order");
  gen->add_option("--alpha", alpha_flag, "Submodular edge fraction");
  gen->add_option("--sigma-d", sigma_d_flag, "Interaction strength times node degree");
  gen->add_option("--seed", seed_flag);
  gen->add_option("--out", out_path, "Instance file path")->required();

  auto* solve = app.add_subcommand("solve", "Run TRW on an instance");
  solve->add_option("instance", instance_path)->required();
  solve->add_option("--out", out_path, "Solve report path (stdout when omitted)");
  add_solver_flags(solve);

  auto* certify = app.add_subcommand("certify", "Solve and emit a certificate report");
  certify->add_option("instance", instance_path)->required();
  certify->add_option("--out", out_path, "Certificate path (stdout when omitted)");
  certify->add_option("--oracle-limit", oracle_limit,
                      "Max vertex count for oracle cross-checks");
  add_solver_flags(certify);

  auto* ocheck = app.add_subcommand("oracle-check",
                                    "Verify a solve report against brute force");
  ocheck->add_option("--instance", instance_path)->required();
  ocheck->add_option("--report", report_path)->required();
  ocheck->add_option("--oracle-limit", oracle_limit);

  auto* experiment = app.add_subcommand("experiment", "Sweep and write CSV");
  experiment->add_option("--topology", topologies_flag, "Topology axis");
  experiment->add_option("--n", sizes_flag, "Size axis");
  experiment->add_option("--alpha", alphas_flag, "Alpha axis");
  experiment->add_option("--sigma-d", sigma_ds_flag, "Sigma*d axis");
  experiment->add_option("--trials", trials_flag);
  experiment->add_option("--seed", seed_flag, "Master seed");
  experiment->add_option("--out", out_path, "CSV path")->required();
  add_solver_flags(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  trwbin::SolverConfig solver_config;
  solver_config.decomposition = decomp_flag == "chain" ? trwbin::DecompositionKind::kChain
                                                       : trwbin::DecompositionKind::kEdge;
  solver_config.stall_window = stall_window;
  solver_config.max_passes = max_passes;

  try {
    if (gen->parsed()) {
      trwbin::GeneratorConfig cfg;
      cfg.topology = trwbin::parse_topology(topology_flag);
      cfg.size = n_flag;
      cfg.alpha = alpha_flag;
      cfg.sigma = sigma_d_flag / trwbin::node_degree(cfg.topology, cfg.size);
      cfg.seed = seed_flag;
      trwbin::write_instance(trwbin::generate(cfg), out_path);
      std::cout << "wrote " << out_path << "\n";
      return 0;
    }

    if (solve->parsed()) {
      const trwbin::EnergyModel model = trwbin::read_instance(instance_path);
      const SolveOutput out = solve_instance(model, solver_config, fix_threshold);
      const trwbin::SolverReport& report = out.result.report;
      std::cout << "bound " << trwbin::format_real(report.bound_history.back())
                << " passes " << report.passes_run << " wta "
                << (report.wta_reached ? "yes" : "no") << " fixed "
                << out.threshold_fixed.fixed.size() << "/" << model.graph.vertex_count()
                << "\n";
      if (out_path.empty()) {
        write_solve_report(out, solver_config, fix_threshold, std::cout);
      } else {
        std::ofstream os(out_path);
        if (!os) throw std::runtime_error(out_path + ": cannot open for writing");
        write_solve_report(out, solver_config, fix_threshold, os);
      }
      return 0;
    }

    if (certify->parsed()) {
      const trwbin::EnergyModel model = trwbin::read_instance(instance_path);
      const SolveOutput out = solve_instance(model, solver_config, fix_threshold);
      const trwbin::LocalSets chi = trwbin::wta_local_sets(
          model.graph, out.result.collection, out.decomposition, solver_config.eps_opt);
      trwbin::CertifyOptions opts;
      opts.fix_threshold = fix_threshold;
      opts.eps_opt = solver_config.eps_opt;
      opts.oracle_limit = oracle_limit;
      const trwbin::Certificate cert = trwbin::build_certificate(
          model, out.result.collection, out.decomposition, chi,
          out.result.report.wta_reached, out.result.report.bound_history.back(), opts);
      if (out_path.empty()) {
        trwbin::write_certificate(cert, std::cout);
      } else {
        std::ofstream os(out_path);
        if (!os) throw std::runtime_error(out_path + ": cannot open for writing");
        trwbin::write_certificate(cert, os);
        std::cout << "wrote " << out_path << "\n";
      }
      return trwbin::certificate_ok(cert) ? 0 : kExitVerification;
    }

    if (ocheck->parsed()) {
      const trwbin::EnergyModel model = trwbin::read_instance(instance_path);
      const SolveReportFile rep = read_solve_report(report_path);
      const trwbin::OracleResult oracle = trwbin::brute_solve(model, oracle_limit);
      bool ok = true;

      const bool bound_ok = rep.bound <= oracle.min_value + 1e-9;
      std::cout << "check bound-below-minimum " << (bound_ok ? "PASS" : "FAIL") << " # bound "
                << trwbin::format_real(rep.bound) << " minimum "
                << trwbin::format_real(oracle.min_value) << "\n";
      ok = ok && bound_ok;

      trwbin::PartialLabeling partial;
      partial.fixed = rep.fixed;
      for (int s = 0; s < model.graph.vertex_count(); ++s)
        if (!partial.is_fixed(s)) partial.free_vertices.push_back(s);
      const bool persist_ok = trwbin::verify_weak_persistency(model, partial, oracle_limit);
      std::cout << "check weak-persistency " << (persist_ok ? "PASS" : "FAIL") << " # "
                << rep.fixed.size() << " fixed vertices\n";
      ok = ok && persist_ok;
      return ok ? 0 : kExitVerification;
    }

    if (experiment->parsed()) {
      trwbin::SweepAxes axes;
      axes.topologies = parse_topologies(topologies_flag);
      axes.sizes = sizes_flag;
      axes.alphas = alphas_flag;
      axes.sigma_ds = sigma_ds_flag;
      trwbin::BenchOptions opts;
      opts.solver = solver_config;
      opts.fix_threshold = fix_threshold;
      std::ofstream os(out_path);
      if (!os) throw std::runtime_error(out_path + ": cannot open for writing");
      trwbin::sweep(axes, trials_flag, seed_flag, opts, os);
      std::cout << "wrote " << out_path << "\n";
      return 0;
    }
  } catch (const trwbin::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const trwbin::SizeLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSizeLimit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
