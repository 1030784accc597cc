#pragma once

#include <string>
#include <vector>

#include "trwbin/energy_model.hpp"

namespace trwbin {

/// Subtree of a host graph: a vertex subset plus host edge indices,
/// connected and acyclic. A single vertex with no edges is a valid tree.
struct Tree {
  std::vector<int> vertices;
  std::vector<int> edges;  // indices into the host graph's edge list
};

struct TreeDecomposition {
  std::vector<Tree> trees;
  std::vector<double> rho;  // positive, sums to 1
};

/// Per-tree parameter vectors, host-sized, zero outside the tree's support.
struct ThetaCollection {
  std::vector<Parameters> theta;  // aligned with TreeDecomposition::trees
};

enum class ViolationKind {
  kRhoNotNormalized,
  kRhoNotPositive,
  kTreeEmpty,
  kTreeEdgeOutsideVertices,
  kTreeNotAcyclic,
  kTreeNotConnected,
  kUncoveredEdge,
  kUncoveredVertex,
  kBadIndex,
};

struct Violation {
  ViolationKind kind;
  std::string detail;
};

/// One single-edge tree per host edge (plus singleton trees for isolated
/// vertices), uniform rho.
TreeDecomposition build_edge_decomposition(const Graph& g);

/// Monotonic chains w.r.t. the vertex order, jointly covering every edge
/// exactly once, uniform rho. An empty order means the identity permutation.
/// A chain arriving at a vertex extends only through the uncovered out-edge
/// with the same order-position stride; other uncovered out-edges open new
/// chains. On a row-major grid this yields the rows and columns.
TreeDecomposition build_chain_decomposition(const Graph& g, std::vector<int> order = {});

std::vector<Violation> validate(const TreeDecomposition& d, const Graph& g);

/// rho-consistent split: theta(T)_s = theta_s / nu_s with
/// nu_s = sum of rho over trees containing s (edges analogous); every tree
/// carries the full constant term.
ThetaCollection split(const EnergyModel& model, const TreeDecomposition& d);

/// Elementwise rho-weighted sum over the overcomplete index set.
Parameters combine(const ThetaCollection& c, const TreeDecomposition& d);

}  // namespace trwbin
