#include "trwbin/trw_solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace trwbin {

namespace {

std::vector<int> identity_or(const std::vector<int>& order, int n) {
  if (order.empty()) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
  }
  return order;
}

void require_exact_cover(const TreeDecomposition& d, const Graph& g) {
  std::vector<int> cover(g.edge_count(), 0);
  for (const Tree& tree : d.trees)
    for (int e : tree.edges) ++cover[e];
  for (int e = 0; e < g.edge_count(); ++e)
    if (cover[e] != 1)
      throw std::invalid_argument(
          "sequential passes need each edge in exactly one tree; edge " +
          std::to_string(e) + " is in " + std::to_string(cover[e]));
}

}  // namespace

MessageState::MessageState(const EnergyModel& model, const TreeDecomposition& d,
                           const std::vector<int>& order)
    : model_(model),
      msg_up_(model.graph.edge_count(), {0.0, 0.0}),
      msg_down_(model.graph.edge_count(), {0.0, 0.0}),
      last_bound_(-std::numeric_limits<double>::infinity()) {
  const Graph& g = model_.graph;
  if (!model_.params.sized_for(g))
    throw std::invalid_argument("model parameters not sized for its graph");
  require_exact_cover(d, g);

  order_ = identity_or(order, g.vertex_count());
  pos_.assign(g.vertex_count(), -1);
  for (int i = 0; i < static_cast<int>(order_.size()); ++i) {
    if (order_[i] < 0 || order_[i] >= g.vertex_count() || pos_[order_[i]] != -1)
      throw std::invalid_argument("order is not a permutation of the vertices");
    pos_[order_[i]] = i;
  }

  std::vector<int> tree_count(g.vertex_count(), 0);
  for (const Tree& tree : d.trees)
    for (int v : tree.vertices) ++tree_count[v];
  gamma_.resize(g.vertex_count());
  for (int s = 0; s < g.vertex_count(); ++s) {
    if (tree_count[s] == 0 && g.degree(s) > 0)
      throw std::invalid_argument("vertex " + std::to_string(s) + " covered by no tree");
    gamma_[s] = tree_count[s] > 0 ? 1.0 / tree_count[s] : 1.0;
  }

  evaluators_.reserve(d.trees.size());
  for (const Tree& tree : d.trees) evaluators_.emplace_back(g, tree);
}

const std::array<double, 2>& MessageState::message_to(int e, int to) const {
  return model_.graph.edge(e).t == to ? msg_up_[e] : msg_down_[e];
}

std::array<double, 2> MessageState::belief(int s) const {
  std::array<double, 2> b{model_.params.node(s, 0), model_.params.node(s, 1)};
  for (const IncidentEdge& inc : model_.graph.incident(s)) {
    const auto& m = message_to(inc.edge, s);
    b[0] += m[0];
    b[1] += m[1];
  }
  return b;
}

Parameters MessageState::reparameterized() const {
  const Graph& g = model_.graph;
  Parameters out(g);
  out.const_term = model_.params.const_term;
  for (int s = 0; s < g.vertex_count(); ++s) {
    const auto b = belief(s);
    out.node(s, 0) = b[0];
    out.node(s, 1) = b[1];
  }
  for (int e = 0; e < g.edge_count(); ++e)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        out.edge(e, j, k) = model_.params.edge(e, j, k) - msg_up_[e][k] - msg_down_[e][j];
  return out;
}

TreeDecomposition build_decomposition(const Graph& g, const SolverConfig& config) {
  return config.decomposition == DecompositionKind::kChain
             ? build_chain_decomposition(g, config.order)
             : build_edge_decomposition(g);
}

double lower_bound(const Graph& g, const ThetaCollection& c, const TreeDecomposition& d) {
  if (c.theta.size() != d.trees.size())
    throw std::invalid_argument("collection does not match decomposition");
  double bound = 0.0;
  for (size_t t = 0; t < d.trees.size(); ++t) {
    const Parameters canonical = to_canonical_normal_form(g, d.trees[t], c.theta[t]);
    bound += d.rho[t] * canonical.const_term;
  }
  return bound;
}

namespace {

// node_eff for tree T: gamma_s * belief_s minus the tree's own incoming
// messages; with the original edge tables this is the tree's share of the
// current reparameterization.
double state_bound(const MessageState& state, const TreeDecomposition& d,
                   const std::vector<TreeEvaluator>& evals) {
  const Graph& g = state.model().graph;
  std::vector<std::array<double, 2>> beliefs(g.vertex_count());
  for (int s = 0; s < g.vertex_count(); ++s) beliefs[s] = state.belief(s);

  std::vector<std::array<double, 2>> node_eff(g.vertex_count());
  double bound = state.model().params.const_term;
  for (size_t t = 0; t < d.trees.size(); ++t) {
    const Tree& tree = d.trees[t];
    for (int v : tree.vertices) {
      const double gv = state.gamma(v);
      node_eff[v] = {gv * beliefs[v][0], gv * beliefs[v][1]};
    }
    for (int e : tree.edges) {
      const Edge& ed = g.edge(e);
      const auto& to_s = state.message_to(e, ed.s);
      const auto& to_t = state.message_to(e, ed.t);
      node_eff[ed.s][0] -= to_s[0];
      node_eff[ed.s][1] -= to_s[1];
      node_eff[ed.t][0] -= to_t[0];
      node_eff[ed.t][1] -= to_t[1];
    }
    bound += evals[t].min_value(g, node_eff, state.model().params);
  }
  return bound;
}

}  // namespace

double run_pass(MessageState& state, const TreeDecomposition& d, const SolverConfig& config) {
  const Graph& g = state.model_.graph;
  const Parameters& theta = state.model_.params;

  auto sweep = [&](bool forward) {
    const int n = static_cast<int>(state.order_.size());
    for (int i = 0; i < n; ++i) {
      const int s = state.order_[forward ? i : n - 1 - i];
      const auto b = state.belief(s);
      const double gs = state.gamma_[s];
      for (const IncidentEdge& inc : g.incident(s)) {
        const int t = inc.neighbor;
        if (forward ? state.pos_[t] <= state.pos_[s] : state.pos_[t] >= state.pos_[s])
          continue;
        const int e = inc.edge;
        const bool s_is_lower = g.edge(e).s == s;
        const auto& reverse = s_is_lower ? state.msg_down_[e] : state.msg_up_[e];
        std::array<double, 2> fresh;
        for (int k = 0; k < 2; ++k) {
          double best = std::numeric_limits<double>::infinity();
          for (int j = 0; j < 2; ++j) {
            const double table =
                s_is_lower ? theta.edge(e, j, k) : theta.edge(e, k, j);
            best = std::min(best, gs * b[j] - reverse[j] + table);
          }
          fresh[k] = best;
        }
        const double norm = std::min(fresh[0], fresh[1]);
        fresh[0] -= norm;
        fresh[1] -= norm;
        (s_is_lower ? state.msg_up_[e] : state.msg_down_[e]) = fresh;
      }
    }
  };
  sweep(true);
  sweep(false);

  const double bound = state_bound(state, d, state.evaluators_);
  if (bound < state.last_bound_ - config.bound_tol)
    throw std::logic_error("lower bound decreased from " + format_real(state.last_bound_) +
                           " to " + format_real(bound) + "; solver invariant broken");
  state.last_bound_ = bound;
  return bound;
}

ThetaCollection reconstruct_collection(const MessageState& state,
                                       const TreeDecomposition& d) {
  const Graph& g = state.model_.graph;
  std::vector<std::array<double, 2>> beliefs(g.vertex_count());
  for (int s = 0; s < g.vertex_count(); ++s) beliefs[s] = state.belief(s);

  ThetaCollection c;
  c.theta.reserve(d.trees.size());
  for (size_t t = 0; t < d.trees.size(); ++t) {
    const Tree& tree = d.trees[t];
    const double inv_rho = 1.0 / d.rho[t];
    Parameters p(g);
    p.const_term = state.model_.params.const_term;
    for (int v : tree.vertices) {
      const double gv = state.gamma_[v];
      p.node(v, 0) = gv * beliefs[v][0];
      p.node(v, 1) = gv * beliefs[v][1];
    }
    for (int e : tree.edges) {
      const Edge& ed = g.edge(e);
      const auto& to_s = state.message_to(e, ed.s);
      const auto& to_t = state.message_to(e, ed.t);
      p.node(ed.s, 0) -= to_s[0];
      p.node(ed.s, 1) -= to_s[1];
      p.node(ed.t, 0) -= to_t[0];
      p.node(ed.t, 1) -= to_t[1];
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) p.edge(e, j, k) = state.model_.params.edge(e, j, k) * inv_rho;
    }
    for (int v : tree.vertices) {
      p.node(v, 0) *= inv_rho;
      p.node(v, 1) *= inv_rho;
    }
    c.theta.push_back(std::move(p));
  }
  return c;
}

SolveResult run(const EnergyModel& model, const TreeDecomposition& d,
                const SolverConfig& config) {
  if (config.stall_window < 1) throw std::invalid_argument("stall_window must be >= 1");
  if (config.max_passes < 1) throw std::invalid_argument("max_passes must be >= 1");
  {
    const auto violations = validate(d, model.graph);
    if (!violations.empty())
      throw std::invalid_argument("invalid decomposition: " + violations.front().detail);
  }

  MessageState state(model, d, config.order);
  SolverReport report;
  int stall = 0;
  for (int pass = 0; pass < config.max_passes; ++pass) {
    const double bound = run_pass(state, d, config);
    if (!report.bound_history.empty() &&
        bound <= report.bound_history.back() + config.bound_tol)
      ++stall;
    else
      stall = 0;
    report.bound_history.push_back(bound);
    ++report.passes_run;
    if (stall >= config.stall_window) {
      report.terminated_by = Termination::kStall;
      break;
    }
    report.terminated_by = Termination::kMaxPasses;
  }

  ThetaCollection collection = reconstruct_collection(state, d);
  for (size_t t = 0; t < d.trees.size(); ++t)
    collection.theta[t] = to_canonical_normal_form(model.graph, d.trees[t], collection.theta[t]);

  const LocalSets chi = wta_local_sets(model.graph, collection, d, config.eps_opt);
  report.wta_reached = chi.all_nonempty();
  return SolveResult{std::move(collection), std::move(state), std::move(report)};
}

LocalSets wta_local_sets(const Graph& g, const ThetaCollection& c,
                         const TreeDecomposition& d, double eps) {
  if (c.theta.size() != d.trees.size())
    throw std::invalid_argument("collection does not match decomposition");

  LocalSets chi;
  chi.node_sets.assign(g.vertex_count(), 0x3);
  chi.edge_sets.assign(g.edge_count(), 0xF);
  // Conditions (b)/(c): intersect per-tree optimal sets across trees.
  for (size_t t = 0; t < d.trees.size(); ++t) {
    const LocalSets per_tree = tree_optimal_local_sets(g, d.trees[t], c.theta[t], eps);
    for (int v : d.trees[t].vertices) chi.node_sets[v] &= per_tree.node_sets[v];
    for (int e : d.trees[t].edges) chi.edge_sets[e] &= per_tree.edge_sets[e];
  }

  // Largest arc-consistent family inside the intersection (Lemma 1 closure).
  bool changed = true;
  while (changed) {
    changed = false;
    for (int e = 0; e < g.edge_count(); ++e) {
      const int s = g.edge(e).s, t = g.edge(e).t;
      std::uint8_t mask = chi.edge_sets[e];
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          if ((mask >> (2 * j + k)) & 1u)
            if (!chi.node_contains(s, j) || !chi.node_contains(t, k))
              mask &= static_cast<std::uint8_t>(~(1u << (2 * j + k)));
      if (mask != chi.edge_sets[e]) {
        chi.edge_sets[e] = mask;
        changed = true;
      }
      for (int j = 0; j < 2; ++j) {
        if (chi.node_contains(s, j) && !(((mask >> (2 * j)) & 1u) || ((mask >> (2 * j + 1)) & 1u))) {
          chi.node_sets[s] &= static_cast<std::uint8_t>(~(1u << j));
          changed = true;
        }
        if (chi.node_contains(t, j) && !(((mask >> j) & 1u) || ((mask >> (2 + j)) & 1u))) {
          chi.node_sets[t] &= static_cast<std::uint8_t>(~(1u << j));
          changed = true;
        }
      }
    }
  }
  return chi;
}

bool LocalSets::all_nonempty() const {
  for (auto m : node_sets)
    if (m == 0) return false;
  for (auto m : edge_sets)
    if (m == 0) return false;
  return true;
}

std::optional<Assignment> strong_agreement(const EnergyModel& model,
                                           const ThetaCollection& c,
                                           const TreeDecomposition& d,
                                           const LocalSets& chi, double eps) {
  const Graph& g = model.graph;
  if (!chi.all_nonempty()) return std::nullopt;

  Assignment x(g.vertex_count(), 0);
  std::vector<bool> assigned(g.vertex_count(), false);
  for (int s = 0; s < g.vertex_count(); ++s) {
    int chosen = -1;
    for (int j = 0; j < 2 && chosen < 0; ++j) {
      if (!chi.node_contains(s, j)) continue;
      bool ok = true;
      for (const IncidentEdge& inc : g.incident(s)) {
        if (!assigned[inc.neighbor]) continue;
        const Edge& ed = g.edge(inc.edge);
        const bool s_is_lower = ed.s == s;
        const int js = j, jt = x[inc.neighbor];
        if (!(s_is_lower ? chi.edge_contains(inc.edge, js, jt)
                         : chi.edge_contains(inc.edge, jt, js))) {
          ok = false;
          break;
        }
      }
      if (ok) chosen = j;
    }
    if (chosen < 0) return std::nullopt;
    x[s] = static_cast<std::uint8_t>(chosen);
    assigned[s] = true;
  }

  // Tree agreement: the configuration must attain every tree's optimum.
  const double slack = eps * static_cast<double>(g.vertex_count());
  for (size_t t = 0; t < d.trees.size(); ++t) {
    const Parameters& p = c.theta[t];
    double energy = p.const_term;
    for (int v : d.trees[t].vertices) energy += p.node(v, x[v]);
    for (int e : d.trees[t].edges) energy += p.edge(e, x[g.edge(e).s], x[g.edge(e).t]);
    if (std::fabs(energy - p.const_term) > slack) return std::nullopt;
  }
  return x;
}

}  // namespace trwbin
