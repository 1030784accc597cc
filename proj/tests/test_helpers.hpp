#pragma once

#include <utility>
#include <vector>

#include "trwbin/energy_model.hpp"
#include "trwbin/generator.hpp"
#include "trwbin/tree_decomp.hpp"

namespace testutil {

inline trwbin::Graph grid_graph(int side) {
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const int v = r * side + c;
      if (c + 1 < side) edges.emplace_back(v, v + 1);
      if (r + 1 < side) edges.emplace_back(v, v + side);
    }
  return trwbin::Graph(side * side, edges);
}

inline trwbin::Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int s = 0; s < n; ++s)
    for (int t = s + 1; t < n; ++t) edges.emplace_back(s, t);
  return trwbin::Graph(n, edges);
}

inline trwbin::Graph path_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
  return trwbin::Graph(n, edges);
}

// Dense Gaussian tables on every term, including the constant.
inline trwbin::EnergyModel random_model(const trwbin::Graph& g, std::uint64_t seed) {
  trwbin::Parameters p(g);
  trwbin::Rng rng(seed);
  p.const_term = rng.normal();
  for (int s = 0; s < g.vertex_count(); ++s)
    for (int j = 0; j < 2; ++j) p.node(s, j) = rng.normal();
  for (int e = 0; e < g.edge_count(); ++e)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) p.edge(e, j, k) = rng.normal();
  return trwbin::EnergyModel{g, std::move(p)};
}

// Random tree on n vertices by random attachment; returned tree spans the
// whole graph.
inline std::pair<trwbin::Graph, trwbin::Tree> random_tree(int n, std::uint64_t seed) {
  trwbin::Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) {
    const int parent = static_cast<int>(rng.uniform() * v);
    edges.emplace_back(parent, v);
  }
  trwbin::Graph g(n, edges);
  trwbin::Tree tree;
  tree.vertices.resize(n);
  for (int v = 0; v < n; ++v) tree.vertices[v] = v;
  tree.edges.resize(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) tree.edges[e] = e;
  return {std::move(g), std::move(tree)};
}

// Second evaluator, written independently of evaluate_energy: edge terms
// first in reverse order, then node terms in reverse order, then the const.
inline double eval_reversed(const trwbin::EnergyModel& model, const trwbin::Assignment& x) {
  double total = 0.0;
  for (int e = model.graph.edge_count() - 1; e >= 0; --e) {
    const auto& ed = model.graph.edge(e);
    total += model.params.edge(e, x[ed.s], x[ed.t]);
  }
  for (int s = model.graph.vertex_count() - 1; s >= 0; --s)
    total += model.params.node(s, x[s]);
  return total + model.params.const_term;
}

inline trwbin::Assignment random_assignment(int n, std::uint64_t seed) {
  trwbin::Rng rng(seed);
  trwbin::Assignment x(n);
  for (int s = 0; s < n; ++s) x[s] = rng.uniform() < 0.5 ? 0 : 1;
  return x;
}

}  // namespace testutil
