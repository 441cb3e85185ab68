"""Topology builders: Hyper-hypercube, (Simple) Base-(k+1) and the usual baselines.

Every builder returns a :class:`~finitemix.graph.GraphSequence` whose weights
are exact :class:`~fractions.Fraction` values. Internally a round is a dict
``{(u, v): weight}`` keyed by node labels.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence, Union

from .errors import BadFamily, BadGrid, BadK, DegreeCapViolation, NonPowerOfTwo
from .factorization import base_digits, is_smooth, min_factorization, pq_split
from .graph import EdgeList, GraphSequence

Round = dict[tuple[int, int], Fraction]
Nodes = Union[int, Sequence[int]]

FAMILIES = ("ring", "torus", "exp", "1peer-exp", "1peer-hypercube", "hhc", "simple-base", "base")
STATIC_FAMILIES = ("ring", "torus", "exp")


def _resolve_nodes(arg: Nodes) -> list[int]:
    if isinstance(arg, int):
        if arg < 1:
            raise ValueError(f"need at least one node, got n={arg}")
        return list(range(1, arg + 1))
    nodes = [int(v) for v in arg]
    if sorted(nodes) != list(range(1, len(nodes) + 1)):
        raise ValueError("node ordering must be a permutation of 1..n")
    return nodes


def _add(rnd: Round, u: int, v: int, w: Fraction) -> None:
    key = (u, v) if u < v else (v, u)
    if key in rnd:
        raise AssertionError(f"edge {key} added twice in one round")
    rnd[key] = w


def _merge(target: Round, src: Round) -> None:
    for (u, v), w in src.items():
        _add(target, u, v, w)


def _finish(n: int, k: int, rounds: list[Round], tag: str, directed: bool = False) -> GraphSequence:
    graphs = tuple(
        EdgeList(n, tuple((u, v, w) for (u, v), w in sorted(r.items())), directed)
        for r in rounds
    )
    seq = GraphSequence(n, k, graphs, tag)
    for i, g in enumerate(graphs, start=1):
        if g.max_degree > k:
            raise DegreeCapViolation(f"{tag}: round {i} has degree {g.max_degree} > {k}")
    return seq


# -- k-peer Hyper-hypercube -----------------------------------------------------


def _hhc_rounds(nodes: list[int], k: int) -> list[Round]:
    n = len(nodes)
    if n == 1:
        return []
    # ascending factor order: smallest cliques first (2, 2, 3 for n=12)
    factors = sorted(min_factorization(n, k).factors)
    rounds = []
    stride = 1
    for nl in factors:
        budget = [0] * (n + 1)
        rnd: Round = {}
        w = Fraction(1, nl)
        for i in range(1, n + 1):
            for m in range(1, nl + 1):
                j = (i + m * stride - 1) % n + 1
                if budget[i] < nl - 1 and budget[j] < nl - 1:
                    _add(rnd, nodes[i - 1], nodes[j - 1], w)
                    budget[i] += 1
                    budget[j] += 1
        rounds.append(rnd)
        stride *= nl
    return rounds


def hyper_hypercube(nodes: Nodes, k: int) -> GraphSequence:
    """k-peer Hyper-hypercube graph over a (k+1)-smooth node count.

    Round ``l`` is a disjoint union of cliques of size ``n_l`` with weight
    ``1/n_l``; after rounds ``1..l`` every contiguous block of
    ``n_1 * ... * n_l`` nodes holds its own average.

    Raises:
        RoughFactor: ``n`` has a prime factor larger than ``k + 1``.
    """
    order = _resolve_nodes(nodes)
    if k < 1:
        raise BadK(f"k must be >= 1, got {k}")
    return _finish(len(order), k, _hhc_rounds(order, k), f"hhc:k={k}")


# -- Simple Base-(k+1) ----------------------------------------------------------


def _simple_rounds(nodes: list[int], k: int) -> list[Round]:
    n = len(nodes)
    if n == 1:
        return []
    if is_smooth(n, k + 1):
        return _hhc_rounds(nodes, k)

    terms = base_digits(n, k).terms
    L = len(terms)
    coef = [a for a, _ in terms]
    expo = [p for _, p in terms]
    groups: list[list[int]] = []
    subgroups: list[list[list[int]]] = []
    start = 0
    for a, p in terms:
        size = a * (k + 1) ** p
        block = nodes[start:start + size]
        groups.append(block)
        sub = (k + 1) ** p
        subgroups.append([block[i * sub:(i + 1) * sub] for i in range(a)])
        start += size

    h_group = [_hhc_rounds(g, k) for g in groups]
    h_sub = [[_hhc_rounds(s, k) for s in subs] for subs in subgroups]
    m1 = len(h_group[0])
    tail = [sum(len(g) for g in groups[t:]) for t in range(L)]

    rounds: list[Round] = []
    b = [0] * L
    m = 0
    while b[0] < len(h_sub[0][0]):
        m += 1
        rnd: Round = {}
        busy: set[int] = set()

        def take(src: Round) -> None:
            _merge(rnd, src)
            for u, v in src:
                busy.update((u, v))

        for l in range(L, 0, -1):
            li = l - 1
            if m <= m1:
                h = h_group[li]
                if h:
                    take(h[(m - 1) % len(h)])
            elif m < m1 + l:
                # every node of V_l pairs with one free node in each V_{t,a}
                ti = m - m1 - 1
                w = Fraction(len(groups[ti]), coef[ti] * tail[ti])
                for v in groups[li]:
                    for sub in subgroups[ti]:
                        u = next(x for x in reversed(sub) if x not in busy)
                        _add(rnd, v, u, w)
                        busy.update((u, v))
            elif m == m1 + l and l != L:
                while True:
                    free = [x for x in groups[li] if x not in busy]
                    if len(free) < 2:
                        break
                    clique = free[: min(k + 1, len(free))]
                    w = Fraction(1, len(clique))
                    for i, u in enumerate(clique):
                        for v in clique[i + 1:]:
                            _add(rnd, u, v, w)
                    busy.update(clique)
            else:
                b[li] += 1
                if expo[li] != 0:
                    for h in h_sub[li]:
                        take(h[(b[li] - 1) % len(h)])
                else:
                    h = h_group[li]
                    if h:
                        take(h[(b[li] - 1) % len(h)])
        rounds.append(rnd)
    return rounds


def _check_k(n: int, k: int) -> None:
    if n == 1:
        return
    if not 1 <= k <= n - 1:
        raise BadK(f"k must lie in [1, n-1] = [1, {n - 1}], got {k}")


def simple_base(nodes: Nodes, k: int) -> GraphSequence:
    """Simple Base-(k+1) graph: finite-time convergent for any ``n``."""
    order = _resolve_nodes(nodes)
    _check_k(len(order), k)
    return _finish(len(order), k, _simple_rounds(order, k), f"simple-base:k={k}")


# -- Base-(k+1) -----------------------------------------------------------------


def _base_rounds(nodes: list[int], k: int) -> list[Round]:
    n = len(nodes)
    if n == 1:
        return []
    split = pq_split(n, k)
    p, q = split.p, split.q
    parts = [nodes[i * q:(i + 1) * q] for i in range(p)]
    per_part = [_simple_rounds(part, k) for part in parts]
    composite: list[Round] = []
    for m in range(len(per_part[0])):
        rnd: Round = {}
        for seq in per_part:
            _merge(rnd, seq[m])
        composite.append(rnd)
    transversals = [[part[j] for part in parts] for j in range(q)]
    per_trans = [_hhc_rounds(u, k) for u in transversals]
    for m in range(len(per_trans[0])):
        rnd = {}
        for seq in per_trans:
            _merge(rnd, seq[m])
        composite.append(rnd)
    simple = _simple_rounds(nodes, k)
    return simple if len(simple) < len(composite) else composite


def base_graph(nodes: Nodes, k: int) -> GraphSequence:
    """Base-(k+1) graph: the shorter of the p x q composite and Simple Base-(k+1)."""
    order = _resolve_nodes(nodes)
    _check_k(len(order), k)
    return _finish(len(order), k, _base_rounds(order, k), f"base:k={k}")


# -- baselines ------------------------------------------------------------------


def ring(n: int) -> GraphSequence:
    """Static ring, weight 1/3 on both neighbours and on the self-loop."""
    if n < 3:
        raise BadGrid(f"ring needs n >= 3, got {n}")
    w = Fraction(1, 3)
    rnd: Round = {}
    for i in range(1, n + 1):
        _add(rnd, i, i % n + 1, w)
    return _finish(n, 2, [rnd], "ring")


def grid_shape(n: int) -> tuple[int, int]:
    """Factor pair ``rows <= cols`` with both >= 2 and the smallest difference."""
    best = None
    r = 2
    while r * r <= n:
        if n % r == 0:
            best = (r, n // r)
        r += 1
    if best is None:
        raise BadGrid(f"n={n} has no factorization rows x cols with rows, cols >= 2")
    return best


def torus(n: int, rows: int | None = None, cols: int | None = None) -> GraphSequence:
    """Static 2-D torus, 4-neighbour wraparound, uniform weight 1/5.

    When a side has length 2 the two wraparound neighbours coincide; the
    edge is kept once, so those nodes carry a heavier self-loop.
    """
    if rows is None and cols is None:
        rows, cols = grid_shape(n)
    elif rows is None or cols is None:
        raise BadGrid("give both rows and cols, or neither")
    if rows < 2 or cols < 2 or rows * cols != n:
        raise BadGrid(f"grid {rows}x{cols} does not tile n={n} with sides >= 2")
    w = Fraction(1, 5)
    rnd: Round = {}
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c + 1
            for v in (r * cols + (c + 1) % cols + 1, ((r + 1) % rows) * cols + c + 1):
                key = (min(u, v), max(u, v))
                if key not in rnd:
                    rnd[key] = w
    return _finish(n, 4, [rnd], f"torus:{rows}x{cols}")


def _log2_ceil(n: int) -> int:
    return (n - 1).bit_length()


def _directed(n: int, k: int, rounds: list[dict], tag: str) -> GraphSequence:
    graphs = tuple(
        EdgeList(n, tuple((u, v, w) for (u, v), w in sorted(r.items())), True) for r in rounds
    )
    return GraphSequence(n, k, graphs, tag)


def exponential(n: int) -> GraphSequence:
    """Static exponential graph: node i sends to i + 2^j for j < ceil(log2 n)."""
    if n < 2:
        raise BadGrid(f"exponential graph needs n >= 2, got {n}")
    tau = _log2_ceil(n)
    w = Fraction(1, tau + 1)
    rnd = {}
    for i in range(1, n + 1):
        for j in range(tau):
            rnd[(i, (i - 1 + 2 ** j) % n + 1)] = w
    return _directed(n, tau, [rnd], "exp")


def one_peer_exponential(n: int) -> GraphSequence:
    """ceil(log2 n) rounds; round t sends i -> i + 2^t with weight 1/2."""
    if n < 2:
        raise BadGrid(f"1-peer exponential graph needs n >= 2, got {n}")
    half = Fraction(1, 2)
    rounds = [
        {(i, (i - 1 + 2 ** t) % n + 1): half for i in range(1, n + 1)}
        for t in range(_log2_ceil(n))
    ]
    return _directed(n, 1, rounds, "1peer-exp")


def one_peer_hypercube(n: int) -> GraphSequence:
    """log2 n perfect matchings along the hypercube dimensions, weight 1/2."""
    if n < 1 or n & (n - 1):
        raise NonPowerOfTwo(f"1-peer hypercube needs a power of two, got n={n}")
    half = Fraction(1, 2)
    rounds = []
    for t in range(n.bit_length() - 1):
        rnd: Round = {}
        for i in range(n):
            j = i ^ (1 << t)
            if i < j:
                rnd[(i + 1, j + 1)] = half
        rounds.append(rnd)
    return _finish(n, 1, rounds, "1peer-hypercube")


# -- dispatch -------------------------------------------------------------------

_TAG = re.compile(r"^(?P<family>[a-z0-9-]+)(?::(?:k=(?P<k>\d+)|(?P<rows>\d+)x(?P<cols>\d+)))?$")


def build(family: str, n: int, k: int | None = None,
          rows: int | None = None, cols: int | None = None) -> GraphSequence:
    """Build a sequence by family name (``base``, ``ring``, ...)."""
    if family in ("hhc", "simple-base", "base"):
        if k is None:
            raise BadK(f"family {family!r} needs k")
        return {"hhc": hyper_hypercube, "simple-base": simple_base, "base": base_graph}[family](n, k)
    if family == "ring":
        return ring(n)
    if family == "torus":
        return torus(n, rows, cols)
    if family == "exp":
        return exponential(n)
    if family == "1peer-exp":
        return one_peer_exponential(n)
    if family == "1peer-hypercube":
        return one_peer_hypercube(n)
    raise BadFamily(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")


def parse_tag(tag: str) -> tuple[str, dict]:
    """Split a builder tag such as ``base:k=3`` or ``torus:5x5`` into (family, params)."""
    m = _TAG.match(tag.strip())
    if not m or m.group("family") not in FAMILIES:
        raise BadFamily(f"unrecognised family tag {tag!r}")
    params = {}
    if m.group("k"):
        params["k"] = int(m.group("k"))
    if m.group("rows"):
        params["rows"] = int(m.group("rows"))
        params["cols"] = int(m.group("cols"))
    return m.group("family"), params


def from_tag(tag: str, n: int) -> GraphSequence:
    family, params = parse_tag(tag)
    return build(family, n, **params)
