"""Core data model: weighted graph sequences, mixing matrices, mixing primitives.

Node indices are 1-based everywhere in the public data model. Parameters of
``n`` nodes are held in a ``d x n`` array ``X`` whose column ``i`` belongs to
node ``i + 1``; one gossip step is the right-multiplication ``X @ W``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterator, Sequence, Union

import numpy as np

from . import kernels
from .errors import DimensionMismatch, DirectedImbalance, IncidentWeightOverflow

Weight = Union[Fraction, float]
Edge = tuple[int, int, Weight]

TOL = 1e-12


@dataclass(frozen=True)
class EdgeList:
    """One communication round. Self-loops are implicit and never stored.

    Construction does not validate; use :func:`validate_sequence` to list
    problems, or :func:`to_mixing_matrix`, which raises on the fatal ones.
    """

    n: int
    edges: tuple[Edge, ...]
    directed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    def __len__(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        """Per-node degree, index 0 is node 1.

        Undirected: incident edge count. Directed: max(in-degree, out-degree),
        so a node that sends to one peer and receives from another is 1-peer.
        """
        if not self.directed:
            deg = [0] * self.n
            for u, v, _ in self.edges:
                deg[u - 1] += 1
                deg[v - 1] += 1
            return deg
        out = [0] * self.n
        inc = [0] * self.n
        for u, v, _ in self.edges:
            out[u - 1] += 1
            inc[v - 1] += 1
        return [max(a, b) for a, b in zip(out, inc)]

    @property
    def max_degree(self) -> int:
        return max(self.degrees(), default=0)


@dataclass(frozen=True)
class GraphSequence:
    """Ordered rounds ``G^(1), ..., G^(m)`` over the node set ``1..n``."""

    n: int
    k: int
    graphs: tuple[EdgeList, ...]
    builder_tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))

    def __len__(self) -> int:
        return len(self.graphs)

    def __iter__(self) -> Iterator[EdgeList]:
        return iter(self.graphs)

    def __getitem__(self, i) -> EdgeList:
        return self.graphs[i]

    @property
    def max_degree(self) -> int:
        return max((g.max_degree for g in self.graphs), default=0)

    @cached_property
    def mixing_matrices(self) -> tuple["MixingMatrix", ...]:
        return tuple(to_mixing_matrix(g) for g in self.graphs)


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Sparse doubly stochastic ``n x n`` matrix in CSR form.

    Each row stores its diagonal entry, even when it is zero, so no row is
    empty. Column indices are 0-based and sorted within a row.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    _transpose: list = field(default_factory=list, repr=False)

    @classmethod
    def from_dense(cls, w) -> "MixingMatrix":
        w = np.asarray(w, dtype=np.float64)
        n = w.shape[0]
        indptr, indices, data = [0], [], []
        for i in range(n):
            for j in range(n):
                if w[i, j] != 0.0 or i == j:
                    indices.append(j)
                    data.append(w[i, j])
            indptr.append(len(indices))
        return cls(n, np.asarray(indptr, np.int64), np.asarray(indices, np.int64),
                   np.asarray(data, np.float64))

    def to_dense(self) -> np.ndarray:
        w = np.zeros((self.n, self.n))
        for i in range(self.n):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            w[i, self.indices[lo:hi]] = self.data[lo:hi]
        return w

    @property
    def offdiag_nnz(self) -> int:
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        return int(np.count_nonzero((rows != self.indices) & (self.data != 0.0)))

    def row_sums(self) -> np.ndarray:
        return np.add.reduceat(self.data, self.indptr[:-1]) if self.n else np.zeros(0)

    def col_sums(self) -> np.ndarray:
        return np.bincount(self.indices, weights=self.data, minlength=self.n)

    def transposed_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR arrays of ``W^T``: row ``i`` lists the weights node ``i`` receives."""
        if not self._transpose:
            rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
            order = np.lexsort((rows, self.indices))
            counts = np.bincount(self.indices, minlength=self.n)
            indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
            self._transpose.append(
                (indptr, np.ascontiguousarray(rows[order]),
                 np.ascontiguousarray(self.data[order]))
            )
        return self._transpose[0]


def _as_fraction(w: Weight):
    if isinstance(w, Rational):
        return Fraction(w)
    return float(w)


def to_mixing_matrix(g: EdgeList) -> MixingMatrix:
    """Build the doubly stochastic matrix of ``g``; self-loops absorb the slack.

    Off-diagonal entry ``(u, v)`` equals the weight of edge ``(u, v)``; for
    undirected graphs ``(v, u)`` gets the same value. A directed edge
    ``(u, v)`` means ``u`` sends to ``v``, i.e. ``W[u, v] > 0`` and node
    ``v``'s new value includes ``W[u, v] * x_u``.
    """
    n = g.n
    rows: list[dict[int, Weight]] = [dict() for _ in range(n)]
    out_sum: list = [0] * n
    in_sum: list = [0] * n
    for u, v, w in g.edges:
        w = _as_fraction(w)
        i, j = u - 1, v - 1
        rows[i][j] = rows[i].get(j, 0) + w
        out_sum[i] += w
        in_sum[j] += w
        if not g.directed:
            rows[j][i] = rows[j].get(i, 0) + w
            out_sum[j] += w
            in_sum[i] += w

    for i in range(n):
        if g.directed:
            if abs(float(out_sum[i] - in_sum[i])) > TOL:
                raise DirectedImbalance(
                    f"node {i + 1}: out-weight {out_sum[i]} != in-weight {in_sum[i]}"
                )
            if float(out_sum[i]) > 1 + TOL:
                raise DirectedImbalance(
                    f"node {i + 1}: weight sum {out_sum[i]} exceeds 1"
                )
        elif float(out_sum[i]) > 1 + TOL:
            raise IncidentWeightOverflow(
                f"node {i + 1}: incident weight {out_sum[i]} exceeds 1"
            )

    indptr, indices, data = [0], [], []
    for i in range(n):
        diag = float(1 - out_sum[i])
        entries = {j: float(w) for j, w in rows[i].items()}
        entries[i] = max(diag, 0.0)
        for j in sorted(entries):
            indices.append(j)
            data.append(entries[j])
        indptr.append(len(indices))
    return MixingMatrix(n, np.asarray(indptr, np.int64), np.asarray(indices, np.int64),
                        np.asarray(data, np.float64))


def mix_rows(w: MixingMatrix, y: np.ndarray) -> np.ndarray:
    """Node-major mixing: ``y`` is ``n x d``; returns ``(Y^T W)^T = W^T Y``."""
    indptr, indices, data = w.transposed_csr()
    return kernels.csr_mix(indptr, indices, data, np.ascontiguousarray(y, dtype=np.float64))


def apply_mix(w: MixingMatrix, x: np.ndarray) -> np.ndarray:
    """Return ``X W`` for a ``d x n`` parameter matrix ``X``.

    Column ``i`` of the result is ``sum_j W[j, i] * x_j``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != w.n:
        raise DimensionMismatch(f"X has shape {x.shape}, W is {w.n}x{w.n}")
    return np.ascontiguousarray(mix_rows(w, x.T).T)


def consensus_error(x: np.ndarray) -> float:
    """``(1/n) * sum_i ||x_i - mean||^2`` over the columns of a ``d x n`` matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    return float(kernels.consensus_error(np.ascontiguousarray(x.T)))


def consensus_error_rows(y: np.ndarray) -> float:
    return float(kernels.consensus_error(y))


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    graph: int  # 0-based position in the sequence
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def kinds(self) -> Counter:
        return Counter(v.kind for v in self.violations)

    def lines(self) -> list[str]:
        return [f"graph {v.graph + 1}: {v.kind}: {v.detail}" for v in self.violations]


def _structural_violations(idx: int, g: EdgeList, n: int, k: int) -> list[Violation]:
    found = []
    if g.n != n:
        found.append(Violation(idx, "NodeCount", f"graph has n={g.n}, sequence n={n}"))
        return found
    seen = set()
    for u, v, w in g.edges:
        if not (1 <= u <= n and 1 <= v <= n):
            found.append(Violation(idx, "NodeRange", f"edge ({u},{v}) outside 1..{n}"))
            continue
        if u == v:
            found.append(Violation(idx, "SelfLoop", f"explicit self-loop on node {u}"))
            continue
        if not g.directed and u > v:
            found.append(Violation(idx, "EdgeOrder", f"undirected edge ({u},{v}) not stored with u < v"))
        key = (u, v) if g.directed else (min(u, v), max(u, v))
        if key in seen:
            found.append(Violation(idx, "DuplicateEdge", f"edge {key} repeated"))
        seen.add(key)
        if not (0 < w <= 1):
            found.append(Violation(idx, "WeightRange", f"edge ({u},{v}) weight {w} not in (0,1]"))
    if found:
        return found
    for node, deg in enumerate(g.degrees(), start=1):
        if deg > k:
            found.append(Violation(idx, "DegreeViolation", f"node {node} has degree {deg} > k={k}"))
    return found


def validate_sequence(seq: GraphSequence) -> ValidationReport:
    """List every invariant violation in ``seq``; an empty report means valid.

    The doubly-stochastic check runs only on graphs without structural
    problems, so a single bad weight yields a single entry.
    """
    report = ValidationReport()
    for idx, g in enumerate(seq.graphs):
        structural = _structural_violations(idx, g, seq.n, seq.k)
        report.violations.extend(structural)
        if any(v.kind != "DegreeViolation" for v in structural):
            continue
        try:
            w = to_mixing_matrix(g)
        except (IncidentWeightOverflow, DirectedImbalance) as exc:
            report.violations.append(Violation(idx, "StochasticityResidual", str(exc)))
            continue
        worst = max(
            np.max(np.abs(w.row_sums() - 1.0), initial=0.0),
            np.max(np.abs(w.col_sums() - 1.0), initial=0.0),
        )
        if worst > TOL:
            report.violations.append(
                Violation(idx, "StochasticityResidual", f"max |row/col sum - 1| = {worst:.3e}")
            )
    return report


def graph_from_edges(n: int, edges: Sequence[Edge], directed: bool = False) -> EdgeList:
    """Canonical EdgeList: undirected pairs ordered ``u < v``, edges sorted."""
    if directed:
        canon = sorted((u, v, w) for u, v, w in edges)
    else:
        canon = sorted((min(u, v), max(u, v), w) for u, v, w in edges)
    return EdgeList(n, tuple(canon), directed)
