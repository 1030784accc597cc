#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "trwbin/energy_model.hpp"
#include "trwbin/trw_solver.hpp"

namespace trwbin {

enum class Topology { kGrid, kComplete };

std::string topology_name(Topology t);
Topology parse_topology(const std::string& name);

/// The single node degree used to convert sigma*d to sigma: 4 for grids
/// (interior degree regardless of boundary), N-1 for complete graphs.
int node_degree(Topology t, int size);

struct GeneratorConfig {
  Topology topology = Topology::kGrid;
  int size = 4;        // grid side or complete-graph order
  double alpha = 0.5;  // probability of a submodular (lambda >= 0) edge
  double sigma = 1.0;  // interaction strength, > 0
  std::uint64_t seed = 0;
};

/// Gaussian node potentials, zero-diagonal edge tables with off-diagonal
/// lambda ~ +/-|N(0, sigma^2)| per the alpha mixture. Fully determined by
/// the seed.
EnergyModel generate(const GeneratorConfig& cfg);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Deterministic normal sampler (Box-Muller over mt19937_64 uniforms);
/// std::normal_distribution is implementation-defined and would not
/// reproduce across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform();  // in (0,1)
  double normal();

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct TrialRecord {
  GeneratorConfig config;  // with the per-trial derived seed
  int trial = 0;
  double p_cor = 0.0;  // fixed_count / vertex_count
  double bound = 0.0;
  bool wta = false;
  int passes = 0;
  int fixed_count = 0;
  std::int64_t wall_ms = 0;
};

struct BenchOptions {
  SolverConfig solver;
  double fix_threshold = 1e-6;
};

/// One generated instance per trial (seed derived from cfg.seed and the trial
/// index), solved with the configured decomposition; V^fix by threshold.
std::vector<TrialRecord> run_trials(const GeneratorConfig& cfg, int trials,
                                    const BenchOptions& opts);

struct SweepAxes {
  std::vector<Topology> topologies;
  std::vector<int> sizes;
  std::vector<double> alphas;
  std::vector<double> sigma_ds;  // sigma * d; sigma derived per topology/size
};

extern const char* const kCsvHeader;

/// Cross-product of the axes, `trials` rows each plus one aggregate mean row
/// per combination (trial = -1).
void sweep(const SweepAxes& axes, int trials, std::uint64_t master_seed,
           const BenchOptions& opts, std::ostream& csv);

void write_csv_row(std::ostream& out, const TrialRecord& rec);

}  // namespace trwbin
