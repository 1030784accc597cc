#include "trwbin/generator.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "trwbin/certificates.hpp"

namespace trwbin {

std::string topology_name(Topology t) {
  return t == Topology::kGrid ? "grid" : "complete";
}

Topology parse_topology(const std::string& name) {
  if (name == "grid") return Topology::kGrid;
  if (name == "complete") return Topology::kComplete;
  throw std::invalid_argument("unknown topology '" + name + "'");
}

int node_degree(Topology t, int size) {
  return t == Topology::kGrid ? 4 : size - 1;
}

double Rng::uniform() {
  // 53 random bits mapped strictly inside (0,1).
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t x = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

Graph make_graph(Topology topology, int size) {
  std::vector<std::pair<int, int>> edges;
  if (topology == Topology::kGrid) {
    const int n = size * size;
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        const int v = r * size + c;
        if (c + 1 < size) edges.emplace_back(v, v + 1);
        if (r + 1 < size) edges.emplace_back(v, v + size);
      }
    return Graph(n, edges);
  }
  for (int s = 0; s < size; ++s)
    for (int t = s + 1; t < size; ++t) edges.emplace_back(s, t);
  return Graph(size, edges);
}

}  // namespace

EnergyModel generate(const GeneratorConfig& cfg) {
  if (cfg.size < 2) throw std::invalid_argument("generator size must be >= 2");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
    throw std::invalid_argument("alpha must be in [0,1]");
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");

  Graph graph = make_graph(cfg.topology, cfg.size);
  Parameters params(graph);
  Rng rng(cfg.seed);
  for (int s = 0; s < graph.vertex_count(); ++s) {
    params.node(s, 0) = rng.normal();
    params.node(s, 1) = rng.normal();
  }
  for (int e = 0; e < graph.edge_count(); ++e) {
    const bool submodular = rng.uniform() < cfg.alpha;
    const double magnitude = std::fabs(rng.normal()) * cfg.sigma;
    const double lambda = submodular ? magnitude : -magnitude;
    params.edge(e, 0, 1) = lambda;
    params.edge(e, 1, 0) = lambda;
  }
  return EnergyModel{std::move(graph), std::move(params)};
}

std::vector<TrialRecord> run_trials(const GeneratorConfig& cfg, int trials,
                                    const BenchOptions& opts) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<TrialRecord> records;
  records.reserve(trials);
  for (int trial = 0; trial < trials; ++trial) {
    GeneratorConfig trial_cfg = cfg;
    trial_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    const EnergyModel model = generate(trial_cfg);
    const TreeDecomposition d = build_decomposition(model.graph, opts.solver);

    const auto start = std::chrono::steady_clock::now();
    const SolveResult result = run(model, d, opts.solver);
    const auto stop = std::chrono::steady_clock::now();

    const Parameters theta_hat = combine(result.collection, d);
    const PartialLabeling partial =
        fixed_vertices_by_threshold(theta_hat, model.graph, opts.fix_threshold);

    TrialRecord rec;
    rec.config = trial_cfg;
    rec.trial = trial;
    rec.fixed_count = static_cast<int>(partial.fixed.size());
    rec.p_cor = static_cast<double>(rec.fixed_count) / model.graph.vertex_count();
    rec.bound = result.report.bound_history.back();
    rec.wta = result.report.wta_reached;
    rec.passes = result.report.passes_run;
    rec.wall_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count();
    records.push_back(rec);
  }
  return records;
}

const char* const kCsvHeader =
    "topology,N,alpha,sigma_d,seed,trial,p_cor,bound,wta,passes,fixed_count,wall_ms";

void write_csv_row(std::ostream& out, const TrialRecord& rec) {
  const double sigma_d =
      rec.config.sigma * node_degree(rec.config.topology, rec.config.size);
  out << topology_name(rec.config.topology) << "," << rec.config.size << ","
      << format_real(rec.config.alpha) << "," << format_real(sigma_d) << ","
      << rec.config.seed << "," << rec.trial << "," << format_real(rec.p_cor) << ","
      << format_real(rec.bound) << "," << (rec.wta ? 1 : 0) << "," << rec.passes << ","
      << rec.fixed_count << "," << rec.wall_ms << "\n";
}

void sweep(const SweepAxes& axes, int trials, std::uint64_t master_seed,
           const BenchOptions& opts, std::ostream& csv) {
  if (axes.topologies.empty() || axes.sizes.empty() || axes.alphas.empty() ||
      axes.sigma_ds.empty())
    throw std::invalid_argument("sweep: empty axis");

  csv << "# trw-experiment-csv 1\n" << kCsvHeader << "\n";
  for (Topology topology : axes.topologies)
    for (int size : axes.sizes)
      for (double alpha : axes.alphas)
        for (double sigma_d : axes.sigma_ds) {
          GeneratorConfig cfg;
          cfg.topology = topology;
          cfg.size = size;
          cfg.alpha = alpha;
          cfg.sigma = sigma_d / node_degree(topology, size);
          cfg.seed = master_seed;
          const auto records = run_trials(cfg, trials, opts);

          TrialRecord mean;
          mean.config = cfg;
          mean.trial = -1;
          double wta_frac = 0.0;
          for (const TrialRecord& rec : records) {
            mean.p_cor += rec.p_cor;
            mean.bound += rec.bound;
            mean.passes += rec.passes;
            mean.fixed_count += rec.fixed_count;
            mean.wall_ms += rec.wall_ms;
            wta_frac += rec.wta ? 1.0 : 0.0;
            write_csv_row(csv, rec);
          }
          const double inv = 1.0 / records.size();
          mean.p_cor *= inv;
          mean.bound *= inv;
          mean.wta = wta_frac * inv >= 1.0;  // aggregate row: 1 iff all trials reached WTA
          mean.passes = static_cast<int>(mean.passes * inv);
          mean.fixed_count = static_cast<int>(mean.fixed_count * inv);
          mean.wall_ms = static_cast<std::int64_t>(mean.wall_ms * inv);
          write_csv_row(csv, mean);
        }
}

}  // namespace trwbin
