#pragma once

#include <optional>
#include <vector>

#include "trwbin/certificates.hpp"
#include "trwbin/energy_model.hpp"
#include "trwbin/tree_decomp.hpp"
#include "trwbin/tree_inference.hpp"

namespace trwbin {

enum class DecompositionKind { kChain, kEdge };

struct SolverConfig {
  DecompositionKind decomposition = DecompositionKind::kChain;
  std::vector<int> order;  // empty = identity permutation
  double eps_opt = 1e-8;   // local-set membership gap
  int stall_window = 10;   // passes without bound increase before stopping
  int max_passes = 2000;
  double bound_tol = 1e-12;
};

enum class Termination { kStall, kMaxPasses };

struct SolverReport {
  std::vector<double> bound_history;  // Phi_rho after each pass, non-decreasing
  int passes_run = 0;
  Termination terminated_by = Termination::kMaxPasses;
  bool wta_reached = false;
};

/// Message vectors per directed edge plus the bookkeeping needed to realize
/// the working reparameterization theta-hat. Owns a copy of the model; the
/// sequential passes require every edge to be covered by exactly one tree.
class MessageState {
 public:
  MessageState(const EnergyModel& model, const TreeDecomposition& d,
               const std::vector<int>& order);

  const EnergyModel& model() const { return model_; }
  const std::vector<int>& order() const { return order_; }
  double gamma(int s) const { return gamma_[s]; }
  double last_bound() const { return last_bound_; }

  // Message sent toward `to` over edge e, min-normalized.
  const std::array<double, 2>& message_to(int e, int to) const;

  /// Belief at s: theta_s plus all incoming messages.
  std::array<double, 2> belief(int s) const;

  /// The reparameterization implied by the current messages.
  Parameters reparameterized() const;

 private:
  friend double run_pass(MessageState&, const TreeDecomposition&, const SolverConfig&);
  friend ThetaCollection reconstruct_collection(const MessageState&,
                                                const TreeDecomposition&);

  EnergyModel model_;
  std::vector<std::array<double, 2>> msg_up_;    // lower endpoint -> higher
  std::vector<std::array<double, 2>> msg_down_;  // higher endpoint -> lower
  std::vector<double> gamma_;                    // 1/(trees containing s)
  std::vector<int> order_, pos_;
  std::vector<TreeEvaluator> evaluators_;        // aligned with d.trees
  double last_bound_;
};

TreeDecomposition build_decomposition(const Graph& g, const SolverConfig& config);

/// Phi_rho of the collection: rho-weighted sum of tree optima after
/// canonicalizing each tree.
double lower_bound(const Graph& g, const ThetaCollection& c, const TreeDecomposition& d);

/// One forward and one backward sweep; returns Phi_rho of the resulting
/// state. Throws std::logic_error if the bound decreased beyond bound_tol.
double run_pass(MessageState& state, const TreeDecomposition& d, const SolverConfig& config);

/// Per-tree collection implied by the message state (tree scale, not yet
/// canonical); combine() of it reproduces the model parameters exactly.
ThetaCollection reconstruct_collection(const MessageState& state,
                                       const TreeDecomposition& d);

struct SolveResult {
  ThetaCollection collection;  // canonical normal form per tree
  MessageState state;
  SolverReport report;
};

SolveResult run(const EnergyModel& model, const TreeDecomposition& d,
                const SolverConfig& config);

/// Consistent optimal local sets of a canonical fixed-point collection:
/// per-tree optimal sets intersected across trees, then pruned to the largest
/// arc-consistent family. Empty sets mean WTA was not reached (a status, not
/// an error).
LocalSets wta_local_sets(const Graph& g, const ThetaCollection& c,
                         const TreeDecomposition& d, double eps = 1e-8);

/// Attempts a single configuration consistent with chi on every vertex and
/// edge (tree agreement); verifies per-tree optimality before returning it.
std::optional<Assignment> strong_agreement(const EnergyModel& model,
                                           const ThetaCollection& c,
                                           const TreeDecomposition& d,
                                           const LocalSets& chi, double eps = 1e-8);

}  // namespace trwbin
