#include "trwbin/energy_model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace trwbin {

Graph::Graph(int vertex_count, const std::vector<std::pair<int, int>>& edge_list)
    : vertex_count_(vertex_count) {
  if (vertex_count <= 0) throw std::invalid_argument("vertex_count must be positive");
  edges_.reserve(edge_list.size());
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edge_list) {
    if (a == b) throw std::invalid_argument("self-loop at vertex " + std::to_string(a));
    int s = std::min(a, b), t = std::max(a, b);
    if (s < 0 || t >= vertex_count)
      throw std::invalid_argument("edge endpoint out of range: (" + std::to_string(a) +
                                  "," + std::to_string(b) + ")");
    if (!seen.insert({s, t}).second)
      throw std::invalid_argument("duplicate edge (" + std::to_string(s) + "," +
                                  std::to_string(t) + ")");
    edges_.push_back({s, t});
  }
  adjacency_.resize(vertex_count);
  for (int e = 0; e < edge_count(); ++e) {
    adjacency_[edges_[e].s].push_back({e, edges_[e].t});
    adjacency_[edges_[e].t].push_back({e, edges_[e].s});
  }
}

std::optional<int> Graph::find_edge(int s, int t) const {
  if (s < 0 || t < 0 || s >= vertex_count_ || t >= vertex_count_) return std::nullopt;
  for (const auto& inc : adjacency_[s])
    if (inc.neighbor == t) return inc.edge;
  return std::nullopt;
}

bool Graph::same_structure(const Graph& other) const {
  if (vertex_count_ != other.vertex_count_) return false;
  if (edges_.size() != other.edges_.size()) return false;
  for (size_t e = 0; e < edges_.size(); ++e)
    if (edges_[e].s != other.edges_[e].s || edges_[e].t != other.edges_[e].t) return false;
  return true;
}

double edge_value(const Graph& g, const Parameters& p, int e, int s, int js, int jt) {
  // (st;jk) == (ts;kj): transpose when the caller's s is the higher endpoint.
  return g.edge(e).s == s ? p.edge(e, js, jt) : p.edge(e, jt, js);
}

double evaluate_energy(const EnergyModel& model, const Assignment& x) {
  const Graph& g = model.graph;
  if (static_cast<int>(x.size()) != g.vertex_count())
    throw std::invalid_argument("assignment length does not match vertex count");
  const Parameters& p = model.params;
  double energy = p.const_term;
  for (int s = 0; s < g.vertex_count(); ++s) energy += p.node(s, x[s]);
  for (int e = 0; e < g.edge_count(); ++e)
    energy += p.edge(e, x[g.edge(e).s], x[g.edge(e).t]);
  return energy;
}

double edge_invariant(const EnergyModel& model, int e) {
  if (e < 0 || e >= model.graph.edge_count())
    throw std::invalid_argument("unknown edge index " + std::to_string(e));
  const Parameters& p = model.params;
  return p.edge(e, 0, 1) + p.edge(e, 1, 0) - p.edge(e, 0, 0) - p.edge(e, 1, 1);
}

SubmodularityReport is_submodular(const EnergyModel& model, double tol) {
  SubmodularityReport report{true, {}};
  for (int e = 0; e < model.graph.edge_count(); ++e) {
    const double slack = -edge_invariant(model, e);  // theta_00+theta_11-theta_01-theta_10
    if (slack > tol) {
      report.submodular = false;
      report.violations.push_back({e, slack});
    }
  }
  return report;
}

bool check_reparameterization(const EnergyModel& a, const EnergyModel& b, int limit,
                              double tol) {
  if (!a.graph.same_structure(b.graph))
    throw std::invalid_argument("check_reparameterization: graph mismatch");
  const int n = a.graph.vertex_count();
  if (n > limit)
    throw SizeLimitError("check_reparameterization: " + std::to_string(n) +
                         " vertices exceeds limit " + std::to_string(limit));
  Assignment x(n, 0);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (int s = 0; s < n; ++s) x[s] = static_cast<std::uint8_t>((mask >> s) & 1u);
    if (std::fabs(evaluate_energy(a, x) - evaluate_energy(b, x)) > tol) return false;
  }
  return true;
}

std::string format_real(double v) {
  // Shortest of %.15g/%.16g/%.17g that parses back exactly.
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

struct LineReader {
  std::istream& in;
  const std::string& name;
  int line_no = 0;

  // Next non-empty, non-comment line split into tokens.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      tokens.clear();
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(name + ":" + std::to_string(line_no) + ": " + msg, line_no);
  }
};

double parse_real(const LineReader& r, const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || !std::isfinite(v)) r.fail("bad real '" + tok + "'");
  return v;
}

int parse_int(const LineReader& r, const std::string& tok) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') r.fail("bad integer '" + tok + "'");
  return static_cast<int>(v);
}

}  // namespace

EnergyModel read_instance(std::istream& in, const std::string& name) {
  LineReader r{in, name};
  std::vector<std::string> tok;

  if (!r.next(tok) || tok.size() != 2 || tok[0] != "binary-mrf" || tok[1] != "1")
    r.fail("expected header 'binary-mrf 1'");
  if (!r.next(tok) || tok.size() != 4 || tok[0] != "n" || tok[2] != "m")
    r.fail("expected 'n <vertex_count> m <edge_count>'");
  const int n = parse_int(r, tok[1]);
  const int m = parse_int(r, tok[3]);
  if (n <= 0) r.fail("vertex count must be positive");
  if (m < 0) r.fail("edge count must be non-negative");

  if (!r.next(tok) || tok.size() != 2 || tok[0] != "c") r.fail("expected 'c <theta_const>'");
  const double const_term = parse_real(r, tok[1]);

  std::vector<std::array<double, 2>> node(n, {0.0, 0.0});
  std::vector<bool> node_seen(n, false);
  for (int i = 0; i < n; ++i) {
    if (!r.next(tok) || tok.size() != 4 || tok[0] != "v")
      r.fail("expected 'v <s> <theta_s0> <theta_s1>'");
    const int s = parse_int(r, tok[1]);
    if (s < 0 || s >= n) r.fail("vertex index out of range");
    if (node_seen[s]) r.fail("duplicate vertex line for " + std::to_string(s));
    node_seen[s] = true;
    node[s] = {parse_real(r, tok[2]), parse_real(r, tok[3])};
  }

  std::vector<std::pair<int, int>> edge_list;
  std::vector<std::array<double, 4>> tables;
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < m; ++i) {
    if (!r.next(tok) || tok.size() != 7 || tok[0] != "e")
      r.fail("expected 'e <s> <t> <t00> <t01> <t10> <t11>'");
    const int s = parse_int(r, tok[1]);
    const int t = parse_int(r, tok[2]);
    if (s < 0 || t < 0 || s >= n || t >= n) r.fail("edge endpoint out of range");
    if (s >= t) r.fail("edges must be written with s < t");
    if (!seen.insert({s, t}).second) r.fail("duplicate edge");
    edge_list.emplace_back(s, t);
    tables.push_back({parse_real(r, tok[3]), parse_real(r, tok[4]), parse_real(r, tok[5]),
                      parse_real(r, tok[6])});
  }
  if (r.next(tok)) r.fail("unexpected trailing content");

  Graph graph(n, edge_list);
  Parameters params(graph);
  params.const_term = const_term;
  for (int s = 0; s < n; ++s) {
    params.node(s, 0) = node[s][0];
    params.node(s, 1) = node[s][1];
  }
  for (int e = 0; e < m; ++e)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) params.edge(e, j, k) = tables[e][2 * j + k];
  return EnergyModel{std::move(graph), std::move(params)};
}

EnergyModel read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open", 0);
  return read_instance(in, path);
}

void write_instance(const EnergyModel& model, std::ostream& out) {
  const Graph& g = model.graph;
  const Parameters& p = model.params;
  out << "binary-mrf 1\n";
  out << "n " << g.vertex_count() << " m " << g.edge_count() << "\n";
  out << "c " << format_real(p.const_term) << "\n";
  for (int s = 0; s < g.vertex_count(); ++s)
    out << "v " << s << " " << format_real(p.node(s, 0)) << " " << format_real(p.node(s, 1))
        << "\n";
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    out << "e " << ed.s << " " << ed.t;
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) out << " " << format_real(p.edge(e, j, k));
    out << "\n";
  }
}

void write_instance(const EnergyModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  write_instance(model, out);
  out.flush();
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace trwbin
