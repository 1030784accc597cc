#include "trwbin/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trwbin {

namespace {

void require_within_limit(int n, int limit, const char* who) {
  if (n > limit)
    throw SizeLimitError(std::string(who) + ": " + std::to_string(n) +
                         " vertices exceeds limit " + std::to_string(limit));
}

// Lexicographic enumeration: vertex 0 is the most significant position.
inline void fill_assignment(std::uint64_t mask, int n, Assignment& x) {
  for (int s = 0; s < n; ++s) x[s] = static_cast<std::uint8_t>((mask >> (n - 1 - s)) & 1u);
}

}  // namespace

OracleResult brute_solve(const EnergyModel& model, int limit) {
  const Graph& g = model.graph;
  const int n = g.vertex_count();
  require_within_limit(n, limit, "brute_solve");

  OracleResult out;
  out.min_value = std::numeric_limits<double>::infinity();
  out.min_marginals.node.assign(g.vertex_count(),
                                {std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity()});
  out.min_marginals.edge.assign(g.edge_count(),
                                {std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity()});

  Assignment x(n, 0);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    fill_assignment(mask, n, x);
    const double energy = evaluate_energy(model, x);
    out.min_value = std::min(out.min_value, energy);
    for (int s = 0; s < n; ++s) {
      auto& row = out.min_marginals.node[s];
      row[x[s]] = std::min(row[x[s]], energy);
    }
    for (int e = 0; e < g.edge_count(); ++e) {
      auto& row = out.min_marginals.edge[e];
      const int idx = 2 * x[g.edge(e).s] + x[g.edge(e).t];
      row[idx] = std::min(row[idx], energy);
    }
  }
  out.min_marginals.optimum = out.min_value;

  for (std::uint64_t mask = 0; mask < total; ++mask) {
    fill_assignment(mask, n, x);
    if (evaluate_energy(model, x) <= out.min_value + 1e-12) out.optima.push_back(x);
  }
  return out;
}

double constrained_min(const EnergyModel& model, const PartialLabeling& partial,
                       int limit) {
  const Graph& g = model.graph;
  const int n = g.vertex_count();
  require_within_limit(n, limit, "constrained_min");

  Assignment x(n, 0);
  for (const auto& [s, j] : partial.fixed) {
    if (s < 0 || s >= n) throw std::invalid_argument("fixed vertex out of range");
    x[s] = j;
  }
  std::vector<int> free_vertices;
  for (int s = 0; s < n; ++s)
    if (!partial.is_fixed(s)) free_vertices.push_back(s);

  const int f = static_cast<int>(free_vertices.size());
  double best = std::numeric_limits<double>::infinity();
  const std::uint64_t total = std::uint64_t{1} << f;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (int i = 0; i < f; ++i)
      x[free_vertices[i]] = static_cast<std::uint8_t>((mask >> (f - 1 - i)) & 1u);
    best = std::min(best, evaluate_energy(model, x));
  }
  return best;
}

bool verify_weak_persistency(const EnergyModel& model, const PartialLabeling& partial,
                             int limit, double tol) {
  const double constrained = constrained_min(model, partial, limit);
  const double unconstrained = constrained_min(model, PartialLabeling{}, limit);
  return std::fabs(constrained - unconstrained) <= tol;
}

}  // namespace trwbin
