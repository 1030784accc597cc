#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"
#include "trwbin/generator.hpp"
#include "trwbin/oracle.hpp"
#include "trwbin/trw_solver.hpp"

using namespace trwbin;

namespace {

GeneratorConfig mixed_cfg(Topology topology, int size, double alpha, double sigma_d,
                          std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.topology = topology;
  cfg.size = size;
  cfg.alpha = alpha;
  cfg.sigma = sigma_d / node_degree(topology, size);
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("lower_bound") {
  SUBCASE("all-zero model") {
    const Graph g = testutil::grid_graph(2);
    const EnergyModel model{g, Parameters(g)};
    const TreeDecomposition d = build_edge_decomposition(g);
    CHECK(lower_bound(g, split(model, d), d) == doctest::Approx(0.0));
  }
  SUBCASE("never exceeds the exact minimum") {
    for (std::uint64_t seed : {101, 102, 103, 104}) {
      const Graph g = testutil::grid_graph(3);
      const EnergyModel model = testutil::random_model(g, seed);
      const TreeDecomposition d = build_chain_decomposition(g);
      const double bound = lower_bound(g, split(model, d), d);
      CHECK(bound <= brute_solve(model).min_value + 1e-9);
    }
  }
}

TEST_CASE("run_pass") {
  SolverConfig config;
  SUBCASE("all-zero model: bound zero, messages stay zero") {
    const Graph g = testutil::grid_graph(2);
    const EnergyModel model{g, Parameters(g)};
    const TreeDecomposition d = build_chain_decomposition(g);
    MessageState state(model, d, {});
    CHECK(run_pass(state, d, config) == doctest::Approx(0.0));
    for (int e = 0; e < g.edge_count(); ++e) {
      CHECK(state.message_to(e, g.edge(e).s)[0] == 0.0);
      CHECK(state.message_to(e, g.edge(e).t)[1] == 0.0);
    }
  }
  SUBCASE("single edge is exact after one pass") {
    const Graph g(2, {{0, 1}});
    const EnergyModel model = testutil::random_model(g, 111);
    const TreeDecomposition d = build_chain_decomposition(g);
    MessageState state(model, d, {});
    const double bound = run_pass(state, d, config);
    CHECK(bound == doctest::Approx(brute_solve(model).min_value).epsilon(1e-9));
  }
  SUBCASE("bound sequence is non-decreasing over 50 passes") {
    const EnergyModel model = testutil::random_model(testutil::grid_graph(3), 112);
    const TreeDecomposition d = build_chain_decomposition(model.graph);
    MessageState state(model, d, {});
    double prev = -1e300;
    for (int pass = 0; pass < 50; ++pass) {
      const double bound = run_pass(state, d, config);
      CHECK(bound >= prev - 1e-12);
      prev = bound;
    }
  }
  SUBCASE("messages stay min-normalized") {
    const EnergyModel model = testutil::random_model(testutil::grid_graph(3), 113);
    const TreeDecomposition d = build_edge_decomposition(model.graph);
    MessageState state(model, d, {});
    for (int pass = 0; pass < 5; ++pass) run_pass(state, d, config);
    for (int e = 0; e < model.graph.edge_count(); ++e)
      for (int to : {model.graph.edge(e).s, model.graph.edge(e).t}) {
        const auto& m = state.message_to(e, to);
        CHECK(std::fabs(std::min(m[0], m[1])) <= 1e-12);
      }
  }
  SUBCASE("the working reparameterization preserves the energy") {
    const EnergyModel model = testutil::random_model(testutil::grid_graph(3), 114);
    const TreeDecomposition d = build_chain_decomposition(model.graph);
    MessageState state(model, d, {});
    for (int pass = 0; pass < 3; ++pass) run_pass(state, d, config);
    const EnergyModel reparameterized{model.graph, state.reparameterized()};
    CHECK(check_reparameterization(model, reparameterized, 12, 1e-9));
  }
  SUBCASE("the raw reconstructed collection combines back to the model") {
    const EnergyModel model = testutil::random_model(testutil::grid_graph(3), 115);
    const TreeDecomposition d = build_chain_decomposition(model.graph);
    MessageState state(model, d, {});
    for (int pass = 0; pass < 4; ++pass) run_pass(state, d, config);
    const Parameters back = combine(reconstruct_collection(state, d), d);
    CHECK(back.const_term == doctest::Approx(model.params.const_term).epsilon(1e-12));
    for (int s = 0; s < model.graph.vertex_count(); ++s)
      for (int j = 0; j < 2; ++j)
        CHECK(back.node(s, j) ==
              doctest::Approx(model.params.node(s, j)).epsilon(1e-12));
    for (int e = 0; e < model.graph.edge_count(); ++e)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          CHECK(back.edge(e, j, k) ==
                doctest::Approx(model.params.edge(e, j, k)).epsilon(1e-12));
  }
}

TEST_CASE("run") {
  SolverConfig config;
  SUBCASE("path-structured model converges to the exact minimum in two passes") {
    const Graph g = testutil::path_graph(6);
    const EnergyModel model = testutil::random_model(g, 121);
    const TreeDecomposition d = build_chain_decomposition(g);
    const SolveResult result = run(model, d, config);
    CHECK(result.report.bound_history[std::min<size_t>(1, result.report.bound_history.size() - 1)] ==
          doctest::Approx(brute_solve(model).min_value).epsilon(1e-9));
    CHECK(result.report.wta_reached);
  }
  SUBCASE("star-structured model is exact under the edge decomposition") {
    const Graph g(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    const EnergyModel model = testutil::random_model(g, 122);
    const TreeDecomposition d = build_edge_decomposition(g);
    const SolveResult result = run(model, d, config);
    CHECK(result.report.bound_history.back() ==
          doctest::Approx(brute_solve(model).min_value).epsilon(1e-9));
  }
  SUBCASE("submodular grid reaches WTA with a tight bound") {
    const EnergyModel model = generate(mixed_cfg(Topology::kGrid, 4, 1.0, 4.0, 123));
    const TreeDecomposition d = build_chain_decomposition(model.graph);
    const SolveResult result = run(model, d, config);
    CHECK(result.report.wta_reached);
    CHECK(result.report.bound_history.back() ==
          doctest::Approx(brute_solve(model).min_value).epsilon(1e-7));
  }
  SUBCASE("frustrated triangle stalls at a valid lower bound") {
    const Graph g(3, {{0, 1}, {1, 2}, {0, 2}});
    Parameters p(g);
    for (int e = 0; e < 3; ++e) {
      p.edge(e, 0, 1) = -1.0;
      p.edge(e, 1, 0) = -1.0;
    }
    const EnergyModel model{g, p};
    const TreeDecomposition d = build_chain_decomposition(g);
    const SolveResult result = run(model, d, config);
    CHECK(result.report.terminated_by == Termination::kStall);
    CHECK(result.report.bound_history.back() <= brute_solve(model).min_value + 1e-9);
    for (int e = 0; e < 3; ++e)
      CHECK(edge_invariant(model, e) < 0);  // every edge non-submodular
  }
  SUBCASE("final collection is canonical and conserves the energy") {
    for (std::uint64_t seed : {131, 132}) {
      const EnergyModel model = generate(mixed_cfg(Topology::kGrid, 3, 0.5, 5.0, seed));
      for (auto kind : {DecompositionKind::kChain, DecompositionKind::kEdge}) {
        SolverConfig c = config;
        c.decomposition = kind;
        const TreeDecomposition d = build_decomposition(model.graph, c);
        const SolveResult result = run(model, d, c);
        for (size_t t = 0; t < d.trees.size(); ++t)
          CHECK(canonical_residual(model.graph, d.trees[t], result.collection.theta[t]) <=
                1e-9);
        const EnergyModel recombined{model.graph, combine(result.collection, d)};
        CHECK(check_reparameterization(model, recombined, 12, 1e-9));
        for (int e = 0; e < model.graph.edge_count(); ++e)
          CHECK(edge_invariant(model, e) ==
                doctest::Approx(edge_invariant(recombined, e)).epsilon(1e-9));
        // Same sign of the invariant means message passing cannot change the
        // submodularity status of any edge.
        CHECK(is_submodular(recombined, 1e-9).submodular ==
              is_submodular(model, 1e-9).submodular);
        CHECK(result.report.bound_history.back() ==
              doctest::Approx(lower_bound(model.graph, result.collection, d))
                  .epsilon(1e-9));
      }
    }
  }
  SUBCASE("WTA stability: one more pass moves the bound by at most 1e-9") {
    for (std::uint64_t seed : {141, 142, 143}) {
      const EnergyModel model = generate(mixed_cfg(Topology::kComplete, 5, 0.5, 3.0, seed));
      const TreeDecomposition d = build_chain_decomposition(model.graph);
      const SolveResult result = run(model, d, config);
      if (!result.report.wta_reached) continue;
      MessageState state = result.state;
      const double before = state.last_bound();
      const double after = run_pass(state, d, config);
      CHECK(std::fabs(after - before) <= 1e-9);
    }
  }
}

TEST_CASE("wta_local_sets") {
  SolverConfig config;
  SUBCASE("strong unary dominance gives singletons") {
    const Graph g = testutil::path_graph(3);
    Parameters p(g);
    for (int s = 0; s < 3; ++s) p.node(s, 1) = 10.0 + s;
    const EnergyModel model{g, p};
    const TreeDecomposition d = build_chain_decomposition(g);
    const SolveResult result = run(model, d, config);
    const LocalSets chi = wta_local_sets(g, result.collection, d);
    for (int s = 0; s < 3; ++s) CHECK(chi.node_size(s) == 1);
    CHECK(result.report.wta_reached);
  }
  SUBCASE("all-zero model keeps all labels") {
    const Graph g = testutil::grid_graph(2);
    const EnergyModel model{g, Parameters(g)};
    const TreeDecomposition d = build_chain_decomposition(g);
    const SolveResult result = run(model, d, config);
    const LocalSets chi = wta_local_sets(g, result.collection, d);
    for (int s = 0; s < g.vertex_count(); ++s) CHECK(chi.node_sets[s] == 0x3);
    for (int e = 0; e < g.edge_count(); ++e) CHECK(chi.edge_sets[e] == 0xF);
  }
  SUBCASE("random fixed points: surviving sets satisfy Lemma 1") {
    int wta_count = 0;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const EnergyModel model =
          generate(mixed_cfg(Topology::kGrid, 3, 0.5, 5.0, 1000 + seed));
      const TreeDecomposition d = build_chain_decomposition(model.graph);
      const SolveResult result = run(model, d, config);
      const LocalSets chi = wta_local_sets(model.graph, result.collection, d);
      if (!chi.all_nonempty()) continue;
      ++wta_count;
      CHECK(local_sets_consistency(chi, model.graph).empty());
    }
    CHECK(wta_count > 0);
  }
}

TEST_CASE("strong_agreement") {
  SolverConfig config;
  SUBCASE("singleton local sets decode directly") {
    const Graph g = testutil::path_graph(3);
    Parameters p(g);
    for (int s = 0; s < 3; ++s) p.node(s, 1 - (s % 2)) = 5.0;
    const EnergyModel model{g, p};
    const TreeDecomposition d = build_chain_decomposition(g);
    const SolveResult result = run(model, d, config);
    const LocalSets chi = wta_local_sets(g, result.collection, d);
    const auto x = strong_agreement(model, result.collection, d, chi);
    REQUIRE(x.has_value());
    CHECK((*x)[0] == 0);
    CHECK((*x)[1] == 1);
    CHECK((*x)[2] == 0);
    CHECK(evaluate_energy(model, *x) ==
          doctest::Approx(brute_solve(model).min_value).epsilon(1e-9));
  }
  SUBCASE("submodular fixed point yields a global optimum") {
    const EnergyModel model = generate(mixed_cfg(Topology::kGrid, 3, 1.0, 4.0, 151));
    const TreeDecomposition d = build_chain_decomposition(model.graph);
    const SolveResult result = run(model, d, config);
    const LocalSets chi = wta_local_sets(model.graph, result.collection, d);
    const auto x = strong_agreement(model, result.collection, d, chi);
    REQUIRE(x.has_value());
    CHECK(evaluate_energy(model, *x) ==
          doctest::Approx(brute_solve(model).min_value).epsilon(1e-7));
  }
  SUBCASE("absence is a legal outcome on frustrated cycles") {
    const Graph g(3, {{0, 1}, {1, 2}, {0, 2}});
    Parameters p(g);
    for (int e = 0; e < 3; ++e) {
      p.edge(e, 0, 1) = -1.0;
      p.edge(e, 1, 0) = -1.0;
    }
    const EnergyModel model{g, p};
    const TreeDecomposition d = build_chain_decomposition(g);
    const SolveResult result = run(model, d, config);
    const LocalSets chi = wta_local_sets(g, result.collection, d);
    const auto x = strong_agreement(model, result.collection, d, chi);
    if (x.has_value())
      CHECK(evaluate_energy(model, *x) ==
            doctest::Approx(brute_solve(model).min_value).epsilon(1e-9));
  }
}

TEST_CASE("solver rejects broken inputs") {
  const Graph g = testutil::path_graph(3);
  const EnergyModel model = testutil::random_model(g, 161);
  SUBCASE("invalid decomposition") {
    TreeDecomposition d = build_chain_decomposition(g);
    d.rho[0] = 0.5;  // breaks normalization
    CHECK_THROWS_AS(run(model, d, SolverConfig{}), std::invalid_argument);
  }
  SUBCASE("bad config") {
    SolverConfig c;
    c.stall_window = 0;
    CHECK_THROWS_AS(run(model, build_chain_decomposition(g), c), std::invalid_argument);
  }
  SUBCASE("bad order") {
    SolverConfig c;
    c.order = {0, 0, 2};
    CHECK_THROWS_AS(run(model, build_chain_decomposition(g), c), std::invalid_argument);
  }
}
