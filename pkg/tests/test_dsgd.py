import numpy as np
import pytest

from finitemix.builders import base_graph, ring, torus
from finitemix.dsgd import (
    DSGDConfig, QuadraticProblem, communication_cost, dsgd_iterates, dsgd_run,
    gradient_descent, make_problem, topology_sweep,
)
from finitemix.errors import BadSpectrum, DimensionMismatch, FormatError
from finitemix.graph import consensus_error_rows
from oracles import central_diff_grad


class TestProblem:
    def test_homogeneous(self):
        p = make_problem(6, 3, zeta_scale=0.0, seed=1)
        assert p.zeta_hat == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(p.local_grads(np.tile(p.x_star, (6, 1))), 0, atol=1e-12)

    def test_heterogeneous_optimality(self):
        p = make_problem(4, 2, zeta_scale=1.0, seed=0)
        assert p.zeta_hat > 0
        g = p.local_grads(np.tile(p.x_star, (4, 1)))
        np.testing.assert_allclose(g.sum(axis=0), 0, atol=1e-10)
        np.testing.assert_allclose(p.minimizer(), p.x_star, atol=1e-10)

    def test_sigma_zero_is_exact(self):
        p = make_problem(5, 3, sigma=0.0, seed=2)
        y = np.random.default_rng(0).standard_normal((5, 3))
        np.testing.assert_array_equal(p.stochastic_grads(y, np.random.default_rng(9)), p.local_grads(y))

    def test_spectrum(self):
        p = make_problem(3, 4, mu=0.5, L_smooth=3.0, seed=4)
        for a in p.A:
            ev = np.linalg.eigvalsh(a)
            assert ev.min() >= 0.5 - 1e-10 and ev.max() <= 3.0 + 1e-10

    def test_bad_spectrum(self):
        with pytest.raises(BadSpectrum):
            make_problem(3, 2, mu=2.0, L_smooth=1.0)

    def test_gradients_match_finite_difference(self):
        p = make_problem(3, 4, zeta_scale=0.7, seed=5)
        x = np.random.default_rng(1).standard_normal(4)
        np.testing.assert_allclose(p.grad(x), central_diff_grad(p.value, x), atol=1e-6)
        for i in range(3):
            np.testing.assert_allclose(p.local_grad(i, x),
                                       central_diff_grad(lambda z: p.local_value(i, z), x), atol=1e-6)

    def test_noise_calibration(self):
        p = make_problem(4, 50, sigma=0.3, seed=0)
        y = np.zeros((4, 50))
        rng = np.random.default_rng(11)
        noise = np.stack([p.stochastic_grads(y, rng) - p.local_grads(y) for _ in range(400)])
        var = float(np.mean(np.sum(noise ** 2, axis=2)))
        assert var == pytest.approx(0.3 ** 2 * 50, rel=0.05)

    def test_roundtrip(self):
        p = make_problem(3, 2, zeta_scale=1.0, sigma=0.1, seed=7)
        q = QuadraticProblem.loads(p.dumps())
        np.testing.assert_array_equal(p.A, q.A)
        assert q.dumps() == p.dumps()

    def test_malformed(self):
        with pytest.raises(FormatError):
            QuadraticProblem.loads('{"n": 2}')


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(eta=0.0, rounds=1), dict(eta=0.1, rounds=0),
                                    dict(eta=0.1, rounds=1, momentum=1.0)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            DSGDConfig(**kw)


@pytest.mark.parametrize("seq_fn", [lambda: ring(9), lambda: torus(9), lambda: base_graph(9, 2)])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_mean_evolution_identity(seq_fn, seed):
    p = make_problem(9, 4, zeta_scale=1.0, sigma=0.5, seed=seed)
    cfg = DSGDConfig(0.05, 30, seed=seed)
    prev = None
    for _, y, g in dsgd_iterates(p, seq_fn(), cfg):
        if prev is not None:
            ybar, gbar = prev
            np.testing.assert_allclose(y.mean(axis=0), ybar - cfg.eta * gbar, atol=1e-10)
        if g is not None:
            prev = (y.mean(axis=0), g.mean(axis=0))


def test_homogeneous_run_matches_gradient_descent():
    p = make_problem(8, 5, seed=3, shared_curvature=True)
    eta = 1 / (2 * p.L_smooth)
    cfg = DSGDConfig(eta, 500)
    xbars = [y.mean(axis=0) for _, y, _ in dsgd_iterates(p, base_graph(8, 1), cfg)]
    np.testing.assert_allclose(np.asarray(xbars), gradient_descent(p, eta, 500), atol=1e-8)
    trace = dsgd_run(p, base_graph(8, 1), cfg)
    assert trace.grad_norm_sq[-1] < 1e-10


def test_pure_gossip_with_eta_zero():
    p = make_problem(12, 3, zeta_scale=1.0, seed=0)
    seq = base_graph(12, 1)
    x0 = np.random.default_rng(2).standard_normal((12, 3))
    cfg = DSGDConfig(0.1, len(seq))
    ys = [y for _, y, _ in dsgd_iterates(p, seq, cfg, eta=0.0, x0=x0)]
    np.testing.assert_allclose(ys[-1].mean(axis=0), x0.mean(axis=0), atol=1e-14)
    assert consensus_error_rows(ys[-1]) <= 1e-18 * consensus_error_rows(x0)


def test_reproducible():
    p = make_problem(9, 3, zeta_scale=1.0, sigma=0.2, seed=1)
    cfg = DSGDConfig(0.05, 40, momentum=0.5, seed=4)
    a, b = dsgd_run(p, ring(9), cfg), dsgd_run(p, ring(9), cfg)
    assert a.grad_norm_sq == b.grad_norm_sq and a.consensus_error == b.consensus_error


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        dsgd_run(make_problem(4, 2), ring(5), DSGDConfig(0.1, 2))


def test_homogeneous_topologies_agree():
    p = make_problem(16, 5, seed=2)
    cfg = DSGDConfig(0.05, 300)
    r = dsgd_run(p, ring(16), cfg).grad_norm_sq[-1]
    b = dsgd_run(p, base_graph(16, 1), cfg).grad_norm_sq[-1]
    assert max(r, b) <= 2 * min(r, b) + 1e-20


def test_heterogeneous_base_beats_ring():
    p = make_problem(25, 10, zeta_scale=1.0, seed=0)
    cfg = DSGDConfig(0.05, 300)
    assert (dsgd_run(p, base_graph(25, 1), cfg).mean_consensus_error
            < dsgd_run(p, ring(25), cfg).mean_consensus_error)


def test_k4_reaches_consensus_sooner():
    assert len(base_graph(27, 4)) < len(base_graph(27, 1))


def test_communication_cost():
    seq = base_graph(6, 1)
    per = [2 * len(g) for g in seq.graphs]
    assert communication_cost(seq, 6) == sum(per) + per[0] + per[1]


def test_sweep():
    p = make_problem(9, 3, zeta_scale=1.0, seed=0)
    rows = topology_sweep(p, ["ring", "base:k=2", "1peer-hypercube"], DSGDConfig(0.05, 50))
    assert rows[0].consensus_rounds is None
    assert rows[1].consensus_rounds == rows[1].length
    assert rows[2].error == "NonPowerOfTwo"
    assert rows == topology_sweep(p, ["ring", "base:k=2", "1peer-hypercube"],
                                  DSGDConfig(0.05, 50), threads=3)
