"""Smoke tests for the compiled trwbin module."""

import math

import pytest

trwbin = pytest.importorskip("trwbin")


def small_grid(alpha=0.5, sigma_d=5.0, seed=7, size=3):
    cfg = trwbin.GeneratorConfig()
    cfg.topology = trwbin.Topology.GRID
    cfg.size = size
    cfg.alpha = alpha
    cfg.sigma = sigma_d / trwbin.node_degree(cfg.topology, size)
    cfg.seed = seed
    return trwbin.generate(cfg)


def test_graph_and_energy():
    g = trwbin.Graph(3, [(0, 1), (1, 2)])
    assert g.vertex_count == 3
    assert g.edge_count == 2
    p = trwbin.Parameters(g)
    p.const_term = 1.0
    p.set_node(0, 1, 2.0)
    model = trwbin.EnergyModel(g, p)
    assert trwbin.evaluate_energy(model, [1, 0, 0]) == pytest.approx(3.0)
    assert trwbin.evaluate_energy(model, [0, 0, 0]) == pytest.approx(1.0)


def test_solve_bound_below_oracle():
    model = small_grid()
    config = trwbin.SolverConfig()
    d = trwbin.build_decomposition(model.graph, config)
    result = trwbin.run(model, d, config)
    history = result.report.bound_history
    assert all(b2 >= b1 - 1e-12 for b1, b2 in zip(history, history[1:]))
    oracle = trwbin.brute_solve(model)
    assert history[-1] <= oracle.min_value + 1e-9


def test_submodular_certificate_passes():
    model = small_grid(alpha=1.0, sigma_d=4.0, seed=11)
    ok, violations = trwbin.is_submodular(model)
    assert ok and not violations
    config = trwbin.SolverConfig()
    d = trwbin.build_decomposition(model.graph, config)
    result = trwbin.run(model, d, config)
    assert result.report.wta_reached
    chi = trwbin.wta_local_sets(model.graph, result.collection, d)
    cert = trwbin.build_certificate(
        model, result.collection, d, chi, True, result.report.bound_history[-1]
    )
    assert cert.ok()
    assert cert.has_dual
    assert cert.dual_value == pytest.approx(cert.bound, abs=1e-7)
    assert "statement dual-matches-bound PASS" in cert.text()


def test_persistency_round_trip():
    model = small_grid(seed=23)
    config = trwbin.SolverConfig()
    d = trwbin.build_decomposition(model.graph, config)
    result = trwbin.run(model, d, config)
    theta_hat = trwbin.combine(result.collection, d)
    partial = trwbin.fixed_vertices_by_threshold(theta_hat, model.graph)
    assert trwbin.verify_weak_persistency(model, partial)


def test_instance_file_round_trip(tmp_path):
    model = small_grid(seed=31)
    path = str(tmp_path / "instance.mrf")
    trwbin.write_instance(model, path)
    back = trwbin.read_instance(path)
    assert back.graph.vertex_count == model.graph.vertex_count
    for x in ([0] * 9, [1] * 9, [0, 1] * 4 + [0]):
        assert trwbin.evaluate_energy(back, x) == trwbin.evaluate_energy(model, x)


def test_tree_inference_matches_oracle():
    g = trwbin.Graph(4, [(0, 1), (1, 2), (1, 3)])
    p = trwbin.Parameters(g)
    p.set_node(0, 1, 1.5)
    p.set_node(2, 0, -0.5)
    p.set_edge(1, 0, 1, 2.0)
    p.set_edge(1, 1, 0, 2.0)
    model = trwbin.EnergyModel(g, p)
    d = trwbin.build_chain_decomposition(g)
    config = trwbin.SolverConfig()
    result = trwbin.run(model, d, config)
    oracle = trwbin.brute_solve(model)
    assert result.report.bound_history[-1] == pytest.approx(oracle.min_value, abs=1e-9)
    x = trwbin.strong_agreement(
        model, result.collection, d, trwbin.wta_local_sets(g, result.collection, d)
    )
    assert x is not None
    assert trwbin.evaluate_energy(model, x) == pytest.approx(oracle.min_value, abs=1e-9)


def test_run_trials_deterministic():
    cfg = trwbin.GeneratorConfig()
    cfg.size = 3
    cfg.seed = 5
    a = trwbin.run_trials(cfg, 3)
    b = trwbin.run_trials(cfg, 3)
    assert [r.bound for r in a] == [r.bound for r in b]
    assert [r.p_cor for r in a] == [r.p_cor for r in b]
    assert all(math.isfinite(r.bound) for r in a)
