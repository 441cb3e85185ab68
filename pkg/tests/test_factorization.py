from math import prod

import pytest
from hypothesis import given
from hypothesis import strategies as st

from finitemix.errors import RoughFactor
from finitemix.factorization import base_digits, is_smooth, min_factorization, pq_split
from oracles import brute_min_length, brute_smooth_part


@pytest.mark.parametrize("n,k,expected", [
    (12, 2, (3, 2, 2)),
    (6, 2, (3, 2)),
    (1, 3, ()),
    (16, 3, (4, 4)),
])
def test_min_factorization_examples(n, k, expected):
    assert min_factorization(n, k).factors == expected


def test_rough_factor():
    with pytest.raises(RoughFactor):
        min_factorization(10, 3)


@pytest.mark.parametrize("n", range(1, 150))
@pytest.mark.parametrize("k", range(1, 7))
def test_min_factorization_matches_exhaustive(n, k):
    brute = brute_min_length(n, k)
    if brute is None:
        with pytest.raises(RoughFactor):
            min_factorization(n, k)
        return
    f = min_factorization(n, k).factors
    assert len(f) == brute
    assert prod(f) == n
    assert all(2 <= x <= k + 1 for x in f)
    assert list(f) == sorted(f, reverse=True)


@pytest.mark.parametrize("n,k,terms", [
    (5, 1, ((1, 2), (1, 0))),
    (7, 2, ((2, 1), (1, 0))),
    (8, 1, ((1, 3),)),
])
def test_base_digits_examples(n, k, terms):
    assert base_digits(n, k).terms == terms


@given(st.integers(1, 10**6), st.integers(1, 9))
def test_base_digits_reconstruct(n, k):
    terms = base_digits(n, k).terms
    assert sum(a * (k + 1) ** p for a, p in terms) == n
    exps = [p for _, p in terms]
    assert exps == sorted(set(exps), reverse=True)
    assert all(1 <= a <= k for a, _ in terms)


@pytest.mark.parametrize("n,k,p,q", [(6, 1, 2, 3), (8, 1, 8, 1), (35, 1, 1, 35)])
def test_pq_split_examples(n, k, p, q):
    s = pq_split(n, k)
    assert (s.p, s.q) == (p, q)


@given(st.integers(1, 600), st.integers(1, 6))
def test_pq_split_is_maximal_smooth_divisor(n, k):
    s = pq_split(n, k)
    assert s.p * s.q == n
    assert s.p == brute_smooth_part(n, k)
    assert all(s.q % m for m in range(2, k + 2)) or s.q == 1
    assert is_smooth(s.p, k + 1)
