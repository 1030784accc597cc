#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trwbin/energy_model.hpp"
#include "trwbin/tree_decomp.hpp"

namespace trwbin {

/// Consistent optimal local sets: per-vertex label subsets and per-edge
/// pair subsets, stored as bitmasks (node bit j; edge bit 2*j+k in the
/// canonical edge orientation).
struct LocalSets {
  std::vector<std::uint8_t> node_sets;
  std::vector<std::uint8_t> edge_sets;

  bool node_contains(int s, int j) const { return (node_sets[s] >> j) & 1u; }
  bool edge_contains(int e, int j, int k) const { return (edge_sets[e] >> (2 * j + k)) & 1u; }
  int node_size(int s) const { return __builtin_popcount(node_sets[s]); }
  int edge_size(int e) const { return __builtin_popcount(edge_sets[e]); }
  bool all_nonempty() const;
};

/// Returns the Lemma-1 consistency violations of chi against g (empty when
/// consistent): pair endpoints must be members, members must have support
/// on every incident edge.
std::vector<std::string> local_sets_consistency(const LocalSets& chi, const Graph& g);

struct PartialLabeling {
  std::map<int, std::uint8_t> fixed;  // vertex -> label
  std::vector<int> free_vertices;

  bool is_fixed(int s) const { return fixed.count(s) != 0; }
};

/// A point of LOCAL(G): tau_const = 1, per-vertex distributions, per-edge
/// pairwise tables consistent with both node marginals.
struct DualSolution {
  double tau_const = 1.0;
  std::vector<std::array<double, 2>> node_tau;
  std::vector<std::array<double, 4>> edge_tau;  // canonical orientation
};

struct CertificateStatement {
  std::string name;
  bool checked;  // false = skipped (and `passed` meaningless)
  bool passed;
  std::string detail;
};

struct Certificate {
  PartialLabeling partial;
  double bound = 0.0;
  DualSolution dual;            // empty tables when WTA was not reached
  bool has_dual = false;
  double dual_value = 0.0;      // <theta_bar, tau*>, meaningful iff has_dual
  std::vector<double> gaps;     // aligned with partial.fixed iteration order
  std::vector<CertificateStatement> statements;
};

/// V^fix = vertices whose chi set is a singleton. Throws if chi is
/// inconsistent or has an empty set.
PartialLabeling fixed_vertices(const LocalSets& chi, const Graph& g);

/// V^fix from the combined fixed point: s is fixed to argmin_j theta_hat_{s;j}
/// when |theta_hat_{s;0} - theta_hat_{s;1}| > thresh.
PartialLabeling fixed_vertices_by_threshold(const Parameters& theta_hat, const Graph& g,
                                            double thresh = 1e-6);

/// Completes a partial labeling to a global minimizer: fixed labels kept, free
/// subgraph solved exactly on the combined reparameterization (tree decoding
/// per forest component, exhaustive enumeration otherwise). Throws
/// SizeLimitError when a cyclic free component exceeds limit.
Assignment extend_to_full(const EnergyModel& model, const ThetaCollection& collection,
                          const TreeDecomposition& d, const PartialLabeling& partial,
                          int limit = 20);

/// The two extreme completions (free vertices all 0 / all 1); both optimal for
/// submodular models at a WTA fixed point. Throws listing violating edges when
/// the model is not submodular.
std::pair<Assignment, Assignment> submodular_labelings(const EnergyModel& model,
                                                       const PartialLabeling& partial);

/// C = theta_hat_{s;1-j} summed with rho weights over the canonical collection;
/// lower-bounds the min-marginal difference for a fixed vertex.
double min_marginal_gap(const ThetaCollection& collection, const TreeDecomposition& d,
                        int s, int j);

/// tau* from the node rules and the edge rules (i)-(iv), first match wins;
/// unlisted components zero. Throws if some chi set is empty or no rule
/// matches.
DualSolution dual_solution(const LocalSets& chi, const Graph& g);

std::vector<std::string> verify_local_polytope(const DualSolution& tau, const Graph& g,
                                               double tol = 1e-12);

struct OptimalityCheck {
  bool optimal;
  double primal;  // Phi_rho of the collection
  double dual;    // <theta_bar, tau>
};

/// primal = Phi_rho(collection), dual = inner product of the ORIGINAL model
/// parameters with tau; equal (within tol) iff the collection maximizes the
/// lower bound. Throws if tau is infeasible.
OptimalityCheck verify_global_optimality(const EnergyModel& model,
                                         const ThetaCollection& collection,
                                         const TreeDecomposition& d,
                                         const DualSolution& tau, double tol = 1e-7);

struct CertifyOptions {
  double fix_threshold = 1e-6;
  double eps_opt = 1e-8;
  int oracle_limit = 20;   // desk-scale cross-checks run when n <= limit
  bool with_oracle = true;
};

/// Assembles the certificate for a solved instance: partial labeling, bound,
/// dual point, per-vertex gaps, and re-verifiable statements.
Certificate build_certificate(const EnergyModel& model, const ThetaCollection& collection,
                              const TreeDecomposition& d, const LocalSets& chi,
                              bool wta_reached, double bound, const CertifyOptions& opts);

void write_certificate(const Certificate& cert, std::ostream& out);

/// True iff no checked statement failed.
bool certificate_ok(const Certificate& cert);

}  // namespace trwbin
