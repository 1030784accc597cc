#include "trwbin/tree_inference.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace trwbin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LocalInc {
  int edge;  // host edge index
  int nbr;   // local index of the neighbor
};

// Rooted view of a tree; parents precede children in `order`.
struct Topology {
  std::vector<int> hosts;                // local -> host vertex
  std::unordered_map<int, int> local;    // host vertex -> local
  std::vector<std::vector<LocalInc>> adj;
  std::vector<int> order;
  std::vector<int> parent;       // local index or -1 for the root
  std::vector<int> parent_edge;  // host edge index or -1
  int root = 0;
};

Topology build_topology(const Graph& g, const Tree& tree) {
  Topology topo;
  topo.hosts = tree.vertices;
  const int size = static_cast<int>(tree.vertices.size());
  if (size == 0) throw std::invalid_argument("empty tree");
  topo.local.reserve(tree.vertices.size());
  for (int l = 0; l < size; ++l)
    if (!topo.local.emplace(tree.vertices[l], l).second)
      throw std::invalid_argument("repeated vertex in tree");
  topo.adj.resize(size);
  for (int e : tree.edges) {
    auto ls = topo.local.find(g.edge(e).s);
    auto lt = topo.local.find(g.edge(e).t);
    if (ls == topo.local.end() || lt == topo.local.end())
      throw std::invalid_argument("tree edge endpoint outside tree");
    topo.adj[ls->second].push_back({e, lt->second});
    topo.adj[lt->second].push_back({e, ls->second});
  }

  // Root at the lowest host vertex for determinism.
  topo.root = static_cast<int>(
      std::min_element(topo.hosts.begin(), topo.hosts.end()) - topo.hosts.begin());
  topo.parent.assign(size, -1);
  topo.parent_edge.assign(size, -1);
  topo.order.reserve(size);
  topo.order.push_back(topo.root);
  std::vector<bool> seen(size, false);
  seen[topo.root] = true;
  for (size_t i = 0; i < topo.order.size(); ++i) {
    const int v = topo.order[i];
    for (const LocalInc& inc : topo.adj[v]) {
      if (seen[inc.nbr]) continue;
      seen[inc.nbr] = true;
      topo.parent[inc.nbr] = v;
      topo.parent_edge[inc.nbr] = inc.edge;
      topo.order.push_back(inc.nbr);
    }
  }
  if (static_cast<int>(topo.order.size()) != size ||
      tree.edges.size() + 1 != tree.vertices.size())
    throw std::invalid_argument("tree is not connected and acyclic");
  return topo;
}

// edge_fn(host_edge, from_host, j_from, k_to); node_fn(host_vertex, j).
template <class NodeFn, class EdgeFn>
void up_pass(const Topology& topo, NodeFn&& node_fn, EdgeFn&& edge_fn,
             std::vector<std::array<double, 2>>& up,
             std::vector<std::array<double, 2>>& up_msg) {
  const int size = static_cast<int>(topo.hosts.size());
  up.assign(size, {0.0, 0.0});
  up_msg.assign(size, {0.0, 0.0});
  for (int i = size - 1; i >= 0; --i) {
    const int l = topo.order[i];
    const int host = topo.hosts[l];
    up[l] = {node_fn(host, 0), node_fn(host, 1)};
    for (const LocalInc& inc : topo.adj[l])
      if (inc.nbr != topo.parent[l]) {
        up[l][0] += up_msg[inc.nbr][0];
        up[l][1] += up_msg[inc.nbr][1];
      }
    if (l != topo.root) {
      const int parent_host = topo.hosts[topo.parent[l]];
      for (int j = 0; j < 2; ++j)
        up_msg[l][j] = std::min(edge_fn(topo.parent_edge[l], parent_host, j, 0) + up[l][0],
                                edge_fn(topo.parent_edge[l], parent_host, j, 1) + up[l][1]);
    }
  }
}

template <class NodeFn, class EdgeFn>
void down_pass(const Topology& topo, NodeFn&&, EdgeFn&& edge_fn,
               const std::vector<std::array<double, 2>>& up,
               const std::vector<std::array<double, 2>>& up_msg,
               std::vector<std::array<double, 2>>& down) {
  const int size = static_cast<int>(topo.hosts.size());
  down.assign(size, {0.0, 0.0});
  for (int i = 1; i < size; ++i) {
    const int l = topo.order[i];
    const int v = topo.parent[l];
    const int v_host = topo.hosts[v];
    std::array<double, 2> rest;  // belief at the parent minus this child's message
    for (int j = 0; j < 2; ++j) rest[j] = up[v][j] - up_msg[l][j] + down[v][j];
    for (int k = 0; k < 2; ++k)
      down[l][k] = std::min(rest[0] + edge_fn(topo.parent_edge[l], v_host, 0, k),
                            rest[1] + edge_fn(topo.parent_edge[l], v_host, 1, k));
  }
}

void require_tree_supported(const Graph& g, const Tree& tree, const Parameters& p) {
  if (!p.sized_for(g)) throw std::invalid_argument("parameters not sized for the graph");
  std::vector<bool> in_v(g.vertex_count(), false);
  std::vector<bool> in_e(g.edge_count(), false);
  for (int v : tree.vertices) in_v[v] = true;
  for (int e : tree.edges) in_e[e] = true;
  for (int s = 0; s < g.vertex_count(); ++s)
    if (!in_v[s] && (p.node(s, 0) != 0.0 || p.node(s, 1) != 0.0))
      throw std::invalid_argument("parameters not tree-supported: node " + std::to_string(s));
  for (int e = 0; e < g.edge_count(); ++e)
    if (!in_e[e])
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          if (p.edge(e, j, k) != 0.0)
            throw std::invalid_argument("parameters not tree-supported: edge " +
                                        std::to_string(e));
}

}  // namespace

MinMarginals tree_min_marginals(const Graph& g, const Tree& tree, const Parameters& p) {
  require_tree_supported(g, tree, p);
  const Topology topo = build_topology(g, tree);
  auto node_fn = [&](int s, int j) { return p.node(s, j); };
  auto edge_fn = [&](int e, int from, int j, int k) { return edge_value(g, p, e, from, j, k); };

  std::vector<std::array<double, 2>> up, up_msg, down;
  up_pass(topo, node_fn, edge_fn, up, up_msg);
  down_pass(topo, node_fn, edge_fn, up, up_msg, down);

  MinMarginals mm;
  mm.node.assign(g.vertex_count(), {kNaN, kNaN});
  mm.edge.assign(g.edge_count(), {kNaN, kNaN, kNaN, kNaN});
  mm.optimum = p.const_term + std::min(up[topo.root][0], up[topo.root][1]);
  const int size = static_cast<int>(topo.hosts.size());
  for (int l = 0; l < size; ++l)
    for (int j = 0; j < 2; ++j)
      mm.node[topo.hosts[l]][j] = p.const_term + up[l][j] + down[l][j];
  for (int i = 1; i < size; ++i) {
    const int c = topo.order[i];
    const int v = topo.parent[c];
    const int e = topo.parent_edge[c];
    const int v_host = topo.hosts[v];
    for (int j = 0; j < 2; ++j) {
      const double rest = up[v][j] - up_msg[c][j] + down[v][j];
      for (int k = 0; k < 2; ++k) {
        const double value =
            p.const_term + rest + edge_value(g, p, e, v_host, j, k) + up[c][k];
        if (g.edge(e).s == v_host)
          mm.edge[e][2 * j + k] = value;
        else
          mm.edge[e][2 * k + j] = value;
      }
    }
  }
  return mm;
}

Parameters to_canonical_normal_form(const Graph& g, const Tree& tree, const Parameters& p) {
  const MinMarginals mm = tree_min_marginals(g, tree, p);
  Parameters out(g);
  out.const_term = mm.optimum;
  for (int v : tree.vertices)
    for (int j = 0; j < 2; ++j) out.node(v, j) = mm.node[v][j] - mm.optimum;
  for (int e : tree.edges) {
    const int s = g.edge(e).s, t = g.edge(e).t;
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        out.edge(e, j, k) = mm.edge[e][2 * j + k] - mm.node[s][j] - mm.node[t][k] + mm.optimum;
  }
  return out;
}

double canonical_residual(const Graph& g, const Tree& tree, const Parameters& p) {
  double r = 0.0;
  for (int s : tree.vertices) r = std::max(r, std::fabs(std::min(p.node(s, 0), p.node(s, 1))));
  for (int e : tree.edges) {
    const int s = g.edge(e).s, t = g.edge(e).t;
    for (int dir = 0; dir < 2; ++dir) {
      const int from = dir == 0 ? s : t;
      for (int k = 0; k < 2; ++k) {
        const double m = std::min(p.node(from, 0) + edge_value(g, p, e, from, 0, k),
                                  p.node(from, 1) + edge_value(g, p, e, from, 1, k));
        r = std::max(r, std::fabs(m));
      }
    }
    double triple = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        triple = std::min(triple, p.node(s, j) + p.edge(e, j, k) + p.node(t, k));
    r = std::max(r, std::fabs(triple));
  }
  return r;
}

double tree_min_value(const Graph& g, const Tree& tree, const Parameters& p_canonical,
                      double tol) {
  require_tree_supported(g, tree, p_canonical);
  const double r = canonical_residual(g, tree, p_canonical);
  if (r > tol)
    throw std::invalid_argument("tree_min_value: canonical residual " + format_real(r) +
                                " exceeds " + format_real(tol));
  return p_canonical.const_term;
}

LocalSets tree_optimal_local_sets(const Graph& g, const Tree& tree, const Parameters& p,
                                  double eps) {
  if (eps < 0) throw std::invalid_argument("eps must be non-negative");
  const MinMarginals mm = tree_min_marginals(g, tree, p);
  LocalSets sets;
  sets.node_sets.assign(g.vertex_count(), 0);
  sets.edge_sets.assign(g.edge_count(), 0);
  for (int v : tree.vertices)
    for (int j = 0; j < 2; ++j)
      if (mm.node[v][j] - mm.optimum <= eps) sets.node_sets[v] |= std::uint8_t(1u << j);
  for (int e : tree.edges)
    for (int idx = 0; idx < 4; ++idx)
      if (mm.edge[e][idx] - mm.optimum <= eps) sets.edge_sets[e] |= std::uint8_t(1u << idx);
  return sets;
}

Assignment decode_tree_optimum(const Graph& g, const Tree& tree, const Parameters& p) {
  require_tree_supported(g, tree, p);
  const Topology topo = build_topology(g, tree);
  auto node_fn = [&](int s, int j) { return p.node(s, j); };
  auto edge_fn = [&](int e, int from, int j, int k) { return edge_value(g, p, e, from, j, k); };
  std::vector<std::array<double, 2>> up, up_msg;
  up_pass(topo, node_fn, edge_fn, up, up_msg);

  Assignment x(g.vertex_count(), 0);
  std::vector<std::uint8_t> label(topo.hosts.size(), 0);
  const int root = topo.root;
  label[root] = up[root][1] < up[root][0] ? 1 : 0;
  for (size_t i = 1; i < topo.order.size(); ++i) {
    const int c = topo.order[i];
    const int v = topo.parent[c];
    const int v_host = topo.hosts[v];
    const int e = topo.parent_edge[c];
    const double cost0 = edge_value(g, p, e, v_host, label[v], 0) + up[c][0];
    const double cost1 = edge_value(g, p, e, v_host, label[v], 1) + up[c][1];
    label[c] = cost1 < cost0 ? 1 : 0;
  }
  for (size_t l = 0; l < topo.hosts.size(); ++l) x[topo.hosts[l]] = label[l];
  return x;
}

struct TreeEvaluator::Impl {
  Topology topo;
};

TreeEvaluator::TreeEvaluator(const Graph& g, const Tree& tree)
    : impl_(std::make_shared<Impl>(Impl{build_topology(g, tree)})) {}

double TreeEvaluator::min_value(const Graph& g,
                                const std::vector<std::array<double, 2>>& node_terms,
                                const Parameters& edge_source) const {
  const Topology& topo = impl_->topo;
  auto node_fn = [&](int s, int j) { return node_terms[s][j]; };
  auto edge_fn = [&](int e, int from, int j, int k) {
    return edge_value(g, edge_source, e, from, j, k);
  };
  std::vector<std::array<double, 2>> up, up_msg;
  up_pass(topo, node_fn, edge_fn, up, up_msg);
  return std::min(up[topo.root][0], up[topo.root][1]);
}

}  // namespace trwbin
