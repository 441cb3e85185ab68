import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from finitemix.builders import (
    STATIC_FAMILIES, base_graph, build, exponential, from_tag, grid_shape, hyper_hypercube,
    one_peer_exponential, one_peer_hypercube, parse_tag, ring, simple_base, torus,
)
from finitemix.consensus import sequence_product, verify_finite_time
from finitemix.errors import BadFamily, BadGrid, BadK, NonPowerOfTwo, RoughFactor
from finitemix.factorization import is_smooth, min_factorization
from finitemix.graph import validate_sequence
from finitemix.io import dumps
from oracles import dense_matrix, exact_uniform, log_bound, mixed_radix_cliques

GOLDEN = Path(__file__).parent / "golden"
HALF, THIRD = Fraction(1, 2), Fraction(1, 3)


def _edge_sets(seq):
    return [{(u, v) for u, v, _ in g.edges} for g in seq.graphs]


def _weights(g):
    return {w for _, _, w in g.edges}


@pytest.mark.parametrize("name,seq", [
    ("base_6_1", lambda: base_graph(6, 1)),
    ("simple_base_5_1", lambda: simple_base(5, 1)),
    ("hhc_12_2", lambda: hyper_hypercube(12, 2)),
    ("hhc_6_2", lambda: hyper_hypercube(6, 2)),
    ("simple_base_7_2", lambda: simple_base(7, 2)),
])
def test_golden_bytes(name, seq):
    assert dumps(seq()) == (GOLDEN / f"{name}.json").read_text()


class TestHyperHypercube:
    def test_n6_k2(self):
        seq = hyper_hypercube(6, 2)
        assert _edge_sets(seq) == [{(1, 2), (3, 4), (5, 6)},
                                   {(1, 3), (1, 5), (3, 5), (2, 4), (2, 6), (4, 6)}]
        assert [_weights(g) for g in seq.graphs] == [{HALF}, {THIRD}]

    def test_n4_k2_is_two_matchings(self):
        seq = hyper_hypercube(4, 2)
        assert len(seq) == 2
        assert all(len(g) == 2 and _weights(g) == {HALF} for g in seq.graphs)

    def test_n3_k2_triangle(self):
        seq = hyper_hypercube(3, 2)
        assert _edge_sets(seq) == [{(1, 2), (1, 3), (2, 3)}]

    def test_n12_weights(self):
        seq = hyper_hypercube(12, 2)
        assert [_weights(g) for g in seq.graphs] == [{HALF}, {HALF}, {THIRD}]

    def test_rough(self):
        with pytest.raises(RoughFactor):
            hyper_hypercube(10, 3)

    def test_bad_k(self):
        with pytest.raises(BadK):
            hyper_hypercube(4, 0)

    def test_single_node(self):
        assert len(hyper_hypercube(1, 3)) == 0

    @pytest.mark.parametrize("k", range(1, 7))
    def test_equals_mixed_radix_cliques(self, k):
        for n in range(2, 200):
            if not is_smooth(n, k + 1):
                continue
            seq = hyper_hypercube(n, k)
            factors = sorted(min_factorization(n, k).factors)
            assert _edge_sets(seq) == mixed_radix_cliques(n, factors)
            # length bound max{1, 2 log_{k+2} n} for smooth n
            assert len(seq) <= max(1, 2 * math.log(n) / math.log(k + 2)) + 1e-9

    def test_blockwise_averaging(self):
        seq = hyper_hypercube(12, 2)
        prod = np.eye(12)
        block = 1
        for g, nl in zip(seq.graphs, (2, 2, 3)):
            prod = prod @ dense_matrix(12, g.edges)
            block *= nl
            expected = np.kron(np.eye(12 // block), np.full((block, block), 1 / block))
            np.testing.assert_allclose(prod, expected, atol=1e-15)

    def test_permutation(self):
        seq = hyper_hypercube([3, 1, 2, 4], 1)
        assert _edge_sets(seq)[0] == {(1, 3), (2, 4)}


class TestSimpleBase:
    def test_n5_k1_layout(self):
        seq = simple_base(5, 1)
        assert len(seq) == 5
        third = {(u, v): w for u, v, w in seq.graphs[2].edges}
        assert third == {(1, 2): HALF, (4, 5): Fraction(4, 5)}
        assert _edge_sets(seq)[:2] == _edge_sets(seq)[3:]

    def test_n6_k1_length(self):
        assert len(simple_base(6, 1)) == 5

    def test_n7_k2(self):
        seq = simple_base(7, 2)
        assert len(seq) == 4
        joins = [(u, v, w) for u, v, w in seq.graphs[2].edges if v == 7]
        assert len(joins) == 2
        # each join carries 3/7, so node 7 keeps 1/7 of its own value
        assert sum(w for *_, w in joins) == Fraction(6, 7)

    def test_smooth_short_circuit(self):
        assert dumps(simple_base(8, 1)).replace("simple-base", "hhc") == dumps(hyper_hypercube(8, 1))
        assert len(simple_base(8, 1)) == 3


class TestBase:
    def test_n6_k1(self):
        seq = base_graph(6, 1)
        assert len(seq) == 4
        assert _edge_sets(seq)[-1] == {(1, 4), (2, 5), (3, 6)}
        assert _weights(seq.graphs[-1]) == {HALF}

    def test_n5_equals_simple(self):
        assert dumps(base_graph(5, 1)).replace("base:", "simple-base:", 1) == dumps(simple_base(5, 1))

    @pytest.mark.parametrize("n", [10, 14, 22, 30, 50])
    def test_min_of_composite_and_simple(self, n):
        assert len(base_graph(n, 1)) <= len(simple_base(n, 1))

    def test_bad_k(self):
        with pytest.raises(BadK):
            base_graph(5, 5)


@pytest.mark.parametrize("n", range(2, 65))
def test_grid_properties(n):
    for k in range(1, min(6, n - 1) + 1):
        for seq in (base_graph(n, k), simple_base(n, k)):
            assert validate_sequence(seq).ok
            assert seq.max_degree <= k
            prod = sequence_product(seq)
            np.testing.assert_allclose(prod, np.full((n, n), 1 / n), atol=1e-12)
            assert len(seq) <= math.ceil(log_bound(n, k))
        assert len(base_graph(n, k)) <= len(simple_base(n, k))


@pytest.mark.parametrize("n,k", [(5, 1), (6, 1), (7, 2), (10, 1), (11, 3), (13, 2)])
def test_exact_rational_product(n, k):
    for seq in (base_graph(n, k), simple_base(n, k)):
        assert exact_uniform(n, [g.edges for g in seq.graphs])


class TestBaselines:
    def test_ring4_circulant(self):
        w = ring(4).mixing_matrices[0].to_dense()
        c = np.array([1, 1, 0, 1]) / 3
        np.testing.assert_allclose(w, np.array([np.roll(c, i) for i in range(4)]))

    def test_ring_too_small(self):
        with pytest.raises(BadGrid):
            ring(2)

    def test_one_peer_hypercube_4(self):
        assert _edge_sets(one_peer_hypercube(4)) == [{(1, 2), (3, 4)}, {(1, 3), (2, 4)}]

    def test_one_peer_hypercube_rejects(self):
        with pytest.raises(NonPowerOfTwo):
            one_peer_hypercube(6)

    def test_one_peer_exp_8_uniform(self):
        seq = one_peer_exponential(8)
        assert len(seq) == 3
        np.testing.assert_allclose(sequence_product(seq), np.full((8, 8), 1 / 8), atol=1e-15)

    def test_one_peer_exp_not_finite_for_6(self):
        assert verify_finite_time(one_peer_exponential(6), cycles=3, exact=True) is None

    def test_exponential_degree(self):
        seq = exponential(10)
        assert seq.k == 4 and seq.max_degree == 4
        w = seq.mixing_matrices[0].to_dense()
        assert np.allclose(np.diag(w), 1 / 5)

    def test_torus_shape(self):
        assert grid_shape(5000) == (50, 100)
        assert grid_shape(12) == (3, 4)
        with pytest.raises(BadGrid):
            grid_shape(7)

    def test_torus_weights(self):
        w = torus(25).mixing_matrices[0].to_dense()
        assert np.allclose(np.diag(w), 0.2)
        assert np.allclose(w.sum(axis=0), 1) and np.allclose(w, w.T)

    def test_torus_two_wide(self):
        seq = torus(8, 2, 4)
        assert validate_sequence(seq).ok
        assert seq.max_degree == 3

    def test_torus_bad_grid(self):
        with pytest.raises(BadGrid):
            torus(12, 5, 3)

    @pytest.mark.parametrize("fam", STATIC_FAMILIES)
    def test_static_are_single_graph(self, fam):
        assert len(build(fam, 16)) == 1


class TestDispatch:
    def test_parse(self):
        assert parse_tag("base:k=3") == ("base", {"k": 3})
        assert parse_tag("torus:5x5") == ("torus", {"rows": 5, "cols": 5})
        assert parse_tag("ring") == ("ring", {})

    def test_bad_family(self):
        with pytest.raises(BadFamily):
            parse_tag("star")
        with pytest.raises(BadFamily):
            build("star", 4)

    def test_missing_k(self):
        with pytest.raises(BadK):
            build("base", 4)

    def test_from_tag(self):
        assert from_tag("base:k=2", 9).builder_tag == "base:k=2"


def test_deterministic():
    assert dumps(base_graph(37, 3)) == dumps(base_graph(37, 3))
