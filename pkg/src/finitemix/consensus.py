"""Gossip averaging, finite-time convergence checks and consensus-rate estimation."""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .builders import parse_tag
from .errors import EmptySequence, FiniteMixError, NoConvergence
from .graph import GraphSequence, MixingMatrix, consensus_error_rows, mix_rows

FINITE_TIME_TOL = 1e-18
RATE_TOL = 1e-10
PROBE_DIM = 8
PROBE_SEED = 0


@dataclass(frozen=True)
class GossipTrace:
    errors: tuple[float, ...]  # errors[0] is the initial consensus error
    iterations: int
    seed: int


@dataclass(frozen=True)
class RateEstimate:
    beta: float
    iterations_used: int
    residual: float
    converged: bool = True


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary labels: sha256 of their '|'-joined reprs."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def run_gossip(seq: GraphSequence, d: int, iters: int, seed: int) -> GossipTrace:
    """Gossip from i.i.d. N(0, 1) parameters, cycling through the sequence.

    Step ``r`` (0-based) mixes with graph ``r mod m``.
    """
    if d < 1 or iters < 0:
        raise ValueError("need d >= 1 and iters >= 0")
    if len(seq) == 0 and iters > 0:
        raise EmptySequence("cannot gossip over an empty sequence")
    rng = np.random.default_rng(seed)
    y = np.ascontiguousarray(rng.standard_normal((d, seq.n)).T)
    mats = seq.mixing_matrices
    errors = [consensus_error_rows(y)]
    for r in range(iters):
        y = mix_rows(mats[r % len(mats)], y)
        errors.append(consensus_error_rows(y))
    return GossipTrace(tuple(errors), iters, seed)


def _exact_rows(seq: GraphSequence) -> list[list[list[tuple[int, Fraction]]]]:
    """For each graph, per node the exact (source, weight) pairs it receives."""
    out = []
    for g in seq.graphs:
        incoming: list[list[tuple[int, Fraction]]] = [[] for _ in range(g.n)]
        used = [Fraction(0)] * g.n
        for u, v, w in g.edges:
            w = Fraction(w)
            incoming[v - 1].append((u - 1, w))
            used[u - 1] += w
            if not g.directed:
                incoming[u - 1].append((v - 1, w))
                used[v - 1] += w
        for i in range(g.n):
            incoming[i].append((i, 1 - used[i]))
        out.append(incoming)
    return out


def verify_finite_time(seq: GraphSequence, tol: float = FINITE_TIME_TOL, *,
                       d: int = PROBE_DIM, seed: int = PROBE_SEED, cycles: int = 1,
                       exact: bool = False) -> int | None:
    """Shortest prefix after which a random probe sits at its mean, else ``None``.

    The float check mixes a seeded ``d x n`` Gaussian probe and stops once the
    squared consensus error drops to ``tol`` times its initial value. A random
    probe can only be fooled on a measure-zero set of inputs.

    With ``exact=True`` two random integer probes are mixed in rational
    arithmetic and the prefix must reach the mean exactly; ``tol`` is ignored.
    ``cycles`` repeats the sequence, which matters for static topologies.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    total = len(seq) * cycles
    if seq.n == 1:
        return 0
    rng = np.random.default_rng(seed)
    if exact:
        rows = _exact_rows(seq)
        probes = [[Fraction(int(x)) for x in rng.integers(-2**31, 2**31, seq.n)] for _ in range(2)]
        means = [sum(p) / seq.n for p in probes]
        if all(all(x == mu for x in p) for p, mu in zip(probes, means)):
            return 0
        for step in range(total):
            incoming = rows[step % len(rows)]
            probes = [[sum(w * p[j] for j, w in inc) for inc in incoming] for p in probes]
            if all(all(x == mu for x in p) for p, mu in zip(probes, means)):
                return step + 1
        return None
    y = np.ascontiguousarray(rng.standard_normal((d, seq.n)).T)
    start = consensus_error_rows(y)
    if start == 0.0:
        return 0
    mats = seq.mixing_matrices
    for step in range(total):
        y = mix_rows(mats[step % len(mats)], y)
        if consensus_error_rows(y) <= tol * start:
            return step + 1
    return None


def sequence_product(seq: GraphSequence, exact: bool = False):
    """Dense product ``W^(1) ... W^(m)``; Fractions in nested lists when ``exact``."""
    n = seq.n
    if not exact:
        prod = np.eye(n)
        for w in seq.mixing_matrices:
            prod = prod @ w.to_dense()
        return prod
    prod = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for incoming in _exact_rows(seq):
        # column v of W lists what node v receives; right-multiply by W
        prod = [[sum(w * row[j] for j, w in incoming[v]) for v in range(n)] for row in prod]
    return prod


def consensus_rate(w: MixingMatrix, tol: float = RATE_TOL, max_iters: int = 200_000,
                   seed: int = 0, strict: bool = True) -> RateEstimate:
    """Consensus rate: the norm of one mixing step on mean-free parameters.

    Power iteration on ``B W W^T B`` (``B`` removes the mean), applied
    sparsely; ``beta`` is the square root of its top eigenvalue. For a
    symmetric ``W`` this is ``max(|lambda_2|, |lambda_n|)``.

    Raises:
        NoConvergence: residual still above ``tol`` after ``max_iters``
            (only when ``strict``; otherwise the estimate is returned with
            ``converged=False``).
    """
    n = w.n
    if n == 1:
        return RateEstimate(0.0, 0, 0.0)
    t_indptr, t_indices, t_data = w.transposed_csr()
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, 1))
    v -= v.mean()
    v /= np.linalg.norm(v)
    lam = 0.0
    residual = math.inf
    it = 0
    for it in range(1, max_iters + 1):
        u = kernels.csr_mix(w.indptr, w.indices, w.data, v)  # W v
        u = kernels.csr_mix(t_indptr, t_indices, t_data, u)  # W^T W v
        u -= u.mean()
        lam = float(np.vdot(v, u))
        residual = float(np.linalg.norm(u - lam * v))
        if residual <= tol:
            break
        norm = float(np.linalg.norm(u))
        if norm == 0.0:
            lam, residual = 0.0, 0.0
            break
        v = u / norm
    est = RateEstimate(math.sqrt(max(lam, 0.0)), it, residual, residual <= tol)
    if not est.converged and strict:
        raise NoConvergence(f"residual {residual:.3e} > {tol:.1e} after {it} iterations", est)
    return est


# -- batch table ----------------------------------------------------------------

TABLE_HEADER = ("family", "n", "k", "length", "max_degree", "finite_time", "beta")


@dataclass(frozen=True)
class RateRow:
    family: str
    n: int
    k: int | None
    length: int | None = None
    max_degree: int | None = None
    finite_time: bool | None = None
    beta: float | None = None
    error: str | None = None

    def csv_fields(self) -> list[str]:
        from .io import fmt_float

        if self.error is not None:
            return [self.family, str(self.n), "" if self.k is None else str(self.k),
                    "", "", f"error:{self.error}", ""]
        return [
            self.family, str(self.n), str(self.k), str(self.length), str(self.max_degree),
            "true" if self.finite_time else "false",
            "" if self.beta is None else fmt_float(self.beta),
        ]


def _expand(families: Iterable[str], k_values: Sequence[int]) -> list[tuple[str, int | None]]:
    cells = []
    for fam in families:
        name, params = parse_tag(fam)
        if name in ("hhc", "simple-base", "base") and "k" not in params:
            cells.extend((f"{name}:k={k}", k) for k in k_values)
        else:
            cells.append((fam, params.get("k")))
    return cells


def _rate_row(tag: str, n: int, k: int | None, tol: float) -> RateRow:
    from .builders import from_tag

    try:
        seq = from_tag(tag, n)
        seed = derive_seed(tag, n, seq.k)
        m = verify_finite_time(seq, tol, seed=seed)
        beta = None
        if len(seq) == 1:
            beta = consensus_rate(seq.mixing_matrices[0], strict=False).beta
        return RateRow(seq.builder_tag, n, seq.k, len(seq), seq.max_degree, m is not None, beta)
    except FiniteMixError as exc:
        return RateRow(tag, n, k, error=exc.code)


def worker_count(threads: int | None = None) -> int:
    if threads is not None:
        return max(1, threads)
    try:
        return max(1, int(os.environ.get("FINITEMIX_THREADS", "1")))
    except ValueError:
        return 1


def sequence_rate_table(families: Sequence[str], n_values: Sequence[int],
                        k_values: Sequence[int] = (1,), tol: float = FINITE_TIME_TOL,
                        threads: int | None = None) -> list[RateRow]:
    """Evaluate every (family, n) cell; a failing cell becomes an error row.

    Families are builder tags; ``base``/``simple-base``/``hhc`` without an
    explicit ``:k=`` are expanded over ``k_values``. Each cell seeds its probe
    from ``derive_seed(tag, n, k)``, so results do not depend on scheduling.
    """
    for fam in families:
        parse_tag(fam)
    cells = [(tag, n, k) for tag, k in _expand(families, k_values) for n in n_values]
    with ThreadPoolExecutor(max_workers=worker_count(threads)) as pool:
        return list(pool.map(lambda c: _rate_row(c[0], c[1], c[2], tol), cells))


__all__ = [
    "GossipTrace", "RateEstimate", "RateRow", "TABLE_HEADER",
    "consensus_rate", "derive_seed", "run_gossip", "sequence_product",
    "sequence_rate_table", "verify_finite_time",
]
