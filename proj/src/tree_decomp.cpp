#include "trwbin/tree_decomp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace trwbin {

namespace {

std::string tree_tag(int t) { return "tree " + std::to_string(t); }

TreeDecomposition finalize(std::vector<Tree> trees, const Graph& g) {
  // Singleton trees keep isolated vertices inside the decomposition so that
  // split()/combine() account for their node terms.
  std::vector<bool> covered(g.vertex_count(), false);
  for (const Tree& tree : trees)
    for (int v : tree.vertices) covered[v] = true;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (!covered[v] && g.degree(v) == 0) trees.push_back(Tree{{v}, {}});

  TreeDecomposition d;
  d.rho.assign(trees.size(), 1.0 / static_cast<double>(trees.size()));
  d.trees = std::move(trees);
  return d;
}

}  // namespace

TreeDecomposition build_edge_decomposition(const Graph& g) {
  if (g.edge_count() == 0) throw std::invalid_argument("graph has no edges");
  std::vector<Tree> trees;
  trees.reserve(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e)
    trees.push_back(Tree{{g.edge(e).s, g.edge(e).t}, {e}});
  return finalize(std::move(trees), g);
}

TreeDecomposition build_chain_decomposition(const Graph& g, std::vector<int> order) {
  if (g.edge_count() == 0) throw std::invalid_argument("graph has no edges");
  const int n = g.vertex_count();
  if (order.empty()) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
  }
  if (static_cast<int>(order.size()) != n)
    throw std::invalid_argument("order is not a permutation of the vertices");
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    const int v = order[i];
    if (v < 0 || v >= n || pos[v] != -1)
      throw std::invalid_argument("order is not a permutation of the vertices");
    pos[v] = i;
  }

  struct ChainEnd {
    int chain;
    int stride;  // pos[end] - pos[previous vertex]
  };
  std::vector<Tree> chains;
  std::vector<std::vector<ChainEnd>> ends(n);  // open chains ending at a vertex
  std::vector<bool> edge_covered(g.edge_count(), false);

  for (int i = 0; i < n; ++i) {
    const int s = order[i];
    std::vector<IncidentEdge> out;
    for (const auto& inc : g.incident(s))
      if (!edge_covered[inc.edge] && pos[inc.neighbor] > pos[s]) out.push_back(inc);
    std::sort(out.begin(), out.end(),
              [&](const IncidentEdge& a, const IncidentEdge& b) {
                return pos[a.neighbor] < pos[b.neighbor];
              });
    for (const auto& inc : out) {
      const int t = inc.neighbor;
      const int stride = pos[t] - pos[s];
      int chain = -1;
      auto& here = ends[s];
      for (size_t c = 0; c < here.size(); ++c) {
        if (here[c].stride == stride) {
          chain = here[c].chain;
          here.erase(here.begin() + static_cast<long>(c));
          break;
        }
      }
      if (chain < 0) {
        chain = static_cast<int>(chains.size());
        chains.push_back(Tree{{s}, {}});
      }
      chains[chain].vertices.push_back(t);
      chains[chain].edges.push_back(inc.edge);
      edge_covered[inc.edge] = true;
      ends[t].push_back({chain, stride});
    }
  }
  assert(std::all_of(edge_covered.begin(), edge_covered.end(), [](bool b) { return b; }));
  return finalize(std::move(chains), g);
}

std::vector<Violation> validate(const TreeDecomposition& d, const Graph& g) {
  std::vector<Violation> out;
  if (d.trees.size() != d.rho.size()) {
    out.push_back({ViolationKind::kBadIndex, "rho size differs from tree count"});
    return out;
  }
  double rho_sum = 0.0;
  for (size_t t = 0; t < d.trees.size(); ++t) {
    if (!(d.rho[t] > 0.0))
      out.push_back({ViolationKind::kRhoNotPositive, tree_tag(static_cast<int>(t))});
    rho_sum += d.rho[t];
  }
  if (std::fabs(rho_sum - 1.0) > 1e-12)
    out.push_back({ViolationKind::kRhoNotNormalized,
                   "rho sums to " + format_real(rho_sum)});

  for (size_t ti = 0; ti < d.trees.size(); ++ti) {
    const Tree& tree = d.trees[ti];
    const std::string tag = tree_tag(static_cast<int>(ti));
    if (tree.vertices.empty()) {
      out.push_back({ViolationKind::kTreeEmpty, tag});
      continue;
    }
    bool index_ok = true;
    std::map<int, int> local;  // host vertex -> local index
    for (int v : tree.vertices) {
      if (v < 0 || v >= g.vertex_count()) {
        out.push_back({ViolationKind::kBadIndex, tag + ": vertex " + std::to_string(v)});
        index_ok = false;
      } else if (!local.emplace(v, static_cast<int>(local.size())).second) {
        out.push_back({ViolationKind::kBadIndex, tag + ": repeated vertex " + std::to_string(v)});
        index_ok = false;
      }
    }
    for (int e : tree.edges)
      if (e < 0 || e >= g.edge_count()) {
        out.push_back({ViolationKind::kBadIndex, tag + ": edge " + std::to_string(e)});
        index_ok = false;
      }
    if (!index_ok) continue;

    for (int e : tree.edges) {
      if (!local.count(g.edge(e).s) || !local.count(g.edge(e).t))
        out.push_back({ViolationKind::kTreeEdgeOutsideVertices,
                       tag + ": edge " + std::to_string(e)});
    }
    if (tree.edges.size() + 1 != tree.vertices.size()) {
      out.push_back({ViolationKind::kTreeNotAcyclic, tag});
      continue;
    }
    // Connectivity by union-find over the local vertices.
    std::vector<int> parent(tree.vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    int components = static_cast<int>(tree.vertices.size());
    for (int e : tree.edges) {
      auto ls = local.find(g.edge(e).s);
      auto lt = local.find(g.edge(e).t);
      if (ls == local.end() || lt == local.end()) continue;
      const int a = find(ls->second), b = find(lt->second);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
    if (components != 1) out.push_back({ViolationKind::kTreeNotConnected, tag});
  }

  std::vector<bool> edge_covered(g.edge_count(), false);
  std::vector<bool> vertex_covered(g.vertex_count(), false);
  for (const Tree& tree : d.trees) {
    for (int e : tree.edges)
      if (e >= 0 && e < g.edge_count()) edge_covered[e] = true;
    for (int v : tree.vertices)
      if (v >= 0 && v < g.vertex_count()) vertex_covered[v] = true;
  }
  for (int e = 0; e < g.edge_count(); ++e)
    if (!edge_covered[e])
      out.push_back({ViolationKind::kUncoveredEdge, "edge " + std::to_string(e)});
  for (int v = 0; v < g.vertex_count(); ++v)
    if (!vertex_covered[v])
      out.push_back({ViolationKind::kUncoveredVertex, "vertex " + std::to_string(v)});
  return out;
}

ThetaCollection split(const EnergyModel& model, const TreeDecomposition& d) {
  if (!validate(d, model.graph).empty())
    throw std::invalid_argument("split: invalid decomposition");
  const Graph& g = model.graph;
  std::vector<double> nu_node(g.vertex_count(), 0.0);
  std::vector<double> nu_edge(g.edge_count(), 0.0);
  for (size_t t = 0; t < d.trees.size(); ++t) {
    for (int v : d.trees[t].vertices) nu_node[v] += d.rho[t];
    for (int e : d.trees[t].edges) nu_edge[e] += d.rho[t];
  }

  ThetaCollection c;
  c.theta.reserve(d.trees.size());
  for (const Tree& tree : d.trees) {
    Parameters p(g);
    p.const_term = model.params.const_term;
    for (int v : tree.vertices)
      for (int j = 0; j < 2; ++j) p.node(v, j) = model.params.node(v, j) / nu_node[v];
    for (int e : tree.edges)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          p.edge(e, j, k) = model.params.edge(e, j, k) / nu_edge[e];
    c.theta.push_back(std::move(p));
  }
  return c;
}

Parameters combine(const ThetaCollection& c, const TreeDecomposition& d) {
  if (c.theta.size() != d.trees.size())
    throw std::invalid_argument("combine: collection does not match decomposition");
  if (c.theta.empty()) throw std::invalid_argument("combine: empty collection");
  Parameters out(c.theta.front().vertex_count(), c.theta.front().edge_count());
  for (size_t t = 0; t < c.theta.size(); ++t) {
    const Parameters& p = c.theta[t];
    if (p.vertex_count() != out.vertex_count() || p.edge_count() != out.edge_count())
      throw std::invalid_argument("combine: inconsistent parameter sizes");
    const double w = d.rho[t];
    out.const_term += w * p.const_term;
    for (int s = 0; s < out.vertex_count(); ++s)
      for (int j = 0; j < 2; ++j) out.node(s, j) += w * p.node(s, j);
    for (int e = 0; e < out.edge_count(); ++e)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) out.edge(e, j, k) += w * p.edge(e, j, k);
  }
  return out;
}

}  // namespace trwbin
