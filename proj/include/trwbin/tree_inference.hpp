#pragma once

#include <array>
#include <memory>
#include <vector>

#include "trwbin/certificates.hpp"
#include "trwbin/energy_model.hpp"
#include "trwbin/tree_decomp.hpp"

namespace trwbin {

/// Exact min-marginal tables. Host-sized; entries outside the tree (or, for
/// the oracle, outside nothing) are NaN.
struct MinMarginals {
  double optimum = 0.0;
  std::vector<std::array<double, 2>> node;  // Phi_{s;j}
  std::vector<std::array<double, 4>> edge;  // Phi_{st;jk}, canonical orientation
};

/// Reparameterizes p into the canonical normal form of the tree: min-sum
/// fixed point with zero edge constants, zero node minima, zero edge-triple
/// minima. Exact energy preservation; the constant term absorbs the optimum.
Parameters to_canonical_normal_form(const Graph& g, const Tree& tree, const Parameters& p);

/// Max residual of the canonical-form conditions over the tree.
double canonical_residual(const Graph& g, const Tree& tree, const Parameters& p);

/// theta_const of a canonical vector == the tree optimum. Throws when the
/// canonical residual exceeds tol.
double tree_min_value(const Graph& g, const Tree& tree, const Parameters& p_canonical,
                      double tol = kDefaultTol);

MinMarginals tree_min_marginals(const Graph& g, const Tree& tree, const Parameters& p);

/// Labels / pairs within eps of the tree optimum, by min-marginal gap.
LocalSets tree_optimal_local_sets(const Graph& g, const Tree& tree, const Parameters& p,
                                  double eps = 1e-8);

/// One minimizer of the tree energy; ties prefer label 0. Host-sized
/// assignment, zero outside the tree.
Assignment decode_tree_optimum(const Graph& g, const Tree& tree, const Parameters& p);

/// Precomputed rooted view of a tree for repeated exact minimizations with
/// varying node terms (host-indexed) against fixed edge tables.
class TreeEvaluator {
 public:
  TreeEvaluator(const Graph& g, const Tree& tree);
  double min_value(const Graph& g, const std::vector<std::array<double, 2>>& node_terms,
                   const Parameters& edge_source) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace trwbin
