#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trwbin {

// Global comparison tolerance for energy/value equality checks.
inline constexpr double kDefaultTol = 1e-9;

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line_arg)
      : std::runtime_error(what), line(line_arg) {}
  int line;
};

struct SizeLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Edge {
  int s, t;  // canonical orientation, s < t
};

struct IncidentEdge {
  int edge;      // index into Graph::edges()
  int neighbor;  // the other endpoint
};

/// Undirected graph with canonically oriented edges and adjacency lists.
/// No self-loops, no duplicate edges.
class Graph {
 public:
  Graph(int vertex_count, const std::vector<std::pair<int, int>>& edge_list);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<IncidentEdge>& incident(int s) const { return adjacency_[s]; }
  int degree(int s) const { return static_cast<int>(adjacency_[s].size()); }

  // Orientation-insensitive lookup.
  std::optional<int> find_edge(int s, int t) const;

  bool same_structure(const Graph& other) const;

 private:
  int vertex_count_;
  std::vector<Edge> edges_;
  std::vector<std::vector<IncidentEdge>> adjacency_;
};

/// Overcomplete parameter vector: constant term, per-vertex label costs,
/// per-edge 2x2 tables stored once in canonical orientation. The reversed
/// orientation (t,s;k,j) is served by transposing on the fly.
class Parameters {
 public:
  Parameters() : const_term(0.0) {}
  Parameters(int vertex_count, int edge_count)
      : const_term(0.0),
        node_(vertex_count, {0.0, 0.0}),
        edge_(edge_count, {0.0, 0.0, 0.0, 0.0}) {}
  explicit Parameters(const Graph& g) : Parameters(g.vertex_count(), g.edge_count()) {}

  double const_term;

  double node(int s, int j) const { return node_[s][j]; }
  double& node(int s, int j) { return node_[s][j]; }

  // Edge table in canonical orientation: j labels the lower endpoint.
  double edge(int e, int j, int k) const { return edge_[e][2 * j + k]; }
  double& edge(int e, int j, int k) { return edge_[e][2 * j + k]; }

  int vertex_count() const { return static_cast<int>(node_.size()); }
  int edge_count() const { return static_cast<int>(edge_.size()); }

  bool sized_for(const Graph& g) const {
    return vertex_count() == g.vertex_count() && edge_count() == g.edge_count();
  }

 private:
  std::vector<std::array<double, 2>> node_;
  std::vector<std::array<double, 4>> edge_;
};

/// theta_st(js, jt) for the edge between s and t, in the caller's orientation.
double edge_value(const Graph& g, const Parameters& p, int e, int s, int js, int jt);

struct EnergyModel {
  Graph graph;
  Parameters params;  // sized to graph
};

/// Per-vertex labels in {0,1}.
using Assignment = std::vector<std::uint8_t>;

double evaluate_energy(const EnergyModel& model, const Assignment& x);

/// theta_st(0,1) + theta_st(1,0) - theta_st(0,0) - theta_st(1,1);
/// unchanged by any energy-preserving reparameterization.
double edge_invariant(const EnergyModel& model, int e);

struct SubmodularityViolation {
  int edge;
  double slack;  // theta_00 + theta_11 - theta_01 - theta_10, positive when violated
};

struct SubmodularityReport {
  bool submodular;
  std::vector<SubmodularityViolation> violations;
};

SubmodularityReport is_submodular(const EnergyModel& model, double tol = 0.0);

/// Exhaustively compares all 2^n energies. Throws on graph mismatch or when
/// vertex_count exceeds limit.
bool check_reparameterization(const EnergyModel& a, const EnergyModel& b, int limit,
                              double tol = kDefaultTol);

EnergyModel read_instance(std::istream& in, const std::string& name = "<stream>");
EnergyModel read_instance(const std::string& path);
void write_instance(const EnergyModel& model, std::ostream& out);
void write_instance(const EnergyModel& model, const std::string& path);

/// Shortest decimal form that round-trips a double exactly (up to 17
/// significant digits); used for every real written to disk.
std::string format_real(double v);

}  // namespace trwbin
