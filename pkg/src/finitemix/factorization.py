"""Integer decompositions that drive the topology builders."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import RoughFactor


@dataclass(frozen=True)
class FactorDecomposition:
    n: int
    k: int
    factors: tuple[int, ...]  # descending, each in [2, k+1]

    @property
    def length(self) -> int:
        return len(self.factors)


@dataclass(frozen=True)
class BaseDigits:
    n: int
    k: int
    terms: tuple[tuple[int, int], ...]  # (coefficient, exponent), exponents decreasing


@dataclass(frozen=True)
class PQSplit:
    n: int
    k: int
    p: int
    q: int


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of ``n`` in increasing order."""
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def is_smooth(n: int, bound: int) -> bool:
    """True when every prime factor of ``n`` is at most ``bound``."""
    return all(f <= bound for f in prime_factors(n))


@lru_cache(maxsize=None)
def _best(m: int, cap: int) -> tuple[int, ...] | None:
    if m == 1:
        return ()
    best = None
    for f in range(min(cap, m), 1, -1):
        if m % f:
            continue
        rest = _best(m // f, cap)
        if rest is None:
            continue
        cand = tuple(sorted((f,) + rest, reverse=True))
        # shortest wins; among equals the lexicographically largest
        if best is None or len(cand) < len(best) or (len(cand) == len(best) and cand > best):
            best = cand
    return best


def min_factorization(n: int, k: int) -> FactorDecomposition:
    """Fewest factors in ``[2, k+1]`` whose product is ``n``.

    Dynamic programming over the divisors of ``n``. Ties between equally
    short factorizations go to the lexicographically largest descending list.

    Raises:
        RoughFactor: ``n`` has a prime factor above ``k + 1``.
    """
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if not is_smooth(n, k + 1):
        raise RoughFactor(f"n={n} has a prime factor larger than k+1={k + 1}")
    return FactorDecomposition(n, k, _best(n, k + 1))


def base_digits(n: int, k: int) -> BaseDigits:
    """Base-(k+1) positional expansion of ``n`` with the zero digits dropped."""
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    base = k + 1
    terms = []
    p = 0
    m = n
    while m:
        m, a = divmod(m, base)
        if a:
            terms.append((a, p))
        p += 1
    return BaseDigits(n, k, tuple(reversed(terms)))


def pq_split(n: int, k: int) -> PQSplit:
    """Split ``n = p * q`` into its (k+1)-smooth part ``p`` and the rest ``q``."""
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    p = 1
    q = n
    for f in range(2, k + 2):
        while q % f == 0:
            q //= f
            p *= f
    return PQSplit(n, k, p, q)
