"""Decentralized SGD over a graph sequence, on synthetic strongly convex quadratics.

Node ``i`` holds ``f_i(x) = 0.5 x^T A_i x - b_i^T x``. Each round every node
takes a noisy local gradient step and then mixes with the round's matrix:

    x_i <- sum_j W_ji (x_j - eta * g_j),    g_j = grad f_j(x_j) + sigma * xi_j

which is ``X <- (X - eta G) W`` in the ``d x n`` column convention.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .builders import from_tag
from .consensus import verify_finite_time, worker_count
from .errors import BadSpectrum, DimensionMismatch, EmptySequence, FiniteMixError, FormatError
from .graph import GraphSequence, consensus_error_rows, mix_rows


@dataclass(frozen=True, eq=False)
class QuadraticProblem:
    n: int
    d: int
    A: np.ndarray  # (n, d, d), each symmetric with spectrum in [mu, L_smooth]
    b: np.ndarray  # (n, d)
    sigma: float
    seed: int
    mu: float
    L_smooth: float
    zeta_scale: float
    x_star: np.ndarray
    zeta_hat: float  # max_i ||grad f_i(x*)||

    @property
    def A_mean(self) -> np.ndarray:
        return self.A.mean(axis=0)

    @property
    def b_mean(self) -> np.ndarray:
        return self.b.mean(axis=0)

    def local_grads(self, y: np.ndarray) -> np.ndarray:
        """Exact gradients, node-major: row ``i`` is ``grad f_i(y_i)``."""
        return np.einsum("ijk,ik->ij", self.A, y) - self.b

    def local_grad(self, i: int, x: np.ndarray) -> np.ndarray:
        return self.A[i] @ x - self.b[i]

    def local_value(self, i: int, x: np.ndarray) -> float:
        return float(0.5 * x @ self.A[i] @ x - self.b[i] @ x)

    def value(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.A_mean @ x - self.b_mean @ x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.A_mean @ x - self.b_mean

    def minimizer(self) -> np.ndarray:
        """Closed-form minimiser of the average objective."""
        return np.linalg.solve(self.A_mean, self.b_mean)

    @property
    def f_star(self) -> float:
        return self.value(self.x_star)

    def stochastic_grads(self, y: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.local_grads(y) + self.sigma * rng.standard_normal(y.shape)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "d": self.d, "sigma": self.sigma, "seed": self.seed,
            "mu": self.mu, "L_smooth": self.L_smooth, "zeta_scale": self.zeta_scale,
            "zeta_hat": self.zeta_hat, "x_star": self.x_star.tolist(),
            "A": self.A.tolist(), "b": self.b.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "QuadraticProblem":
        try:
            A = np.asarray(obj["A"], dtype=np.float64)
            b = np.asarray(obj["b"], dtype=np.float64)
            n, d = int(obj["n"]), int(obj["d"])
            if A.shape != (n, d, d) or b.shape != (n, d):
                raise FormatError(f"A/b shapes {A.shape}/{b.shape} do not match n={n}, d={d}")
            return cls(n, d, A, b, float(obj["sigma"]), int(obj["seed"]), float(obj["mu"]),
                       float(obj["L_smooth"]), float(obj["zeta_scale"]),
                       np.asarray(obj["x_star"], dtype=np.float64), float(obj["zeta_hat"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad problem file: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    @classmethod
    def loads(cls, text: str) -> "QuadraticProblem":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc


def _random_spd(rng: np.random.Generator, d: int, mu: float, L: float) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eig = rng.uniform(mu, L, d)
    if d >= 2:
        eig[0], eig[-1] = mu, L
    a = (q * eig) @ q.T
    return 0.5 * (a + a.T)


def make_problem(n: int, d: int, zeta_scale: float = 0.0, sigma: float = 0.0,
                 mu: float = 1.0, L_smooth: float = 10.0, seed: int = 0,
                 shared_curvature: bool = False) -> QuadraticProblem:
    """Random quadratic problem with a known optimum ``x*``.

    Local optima sit at ``x* + zeta_scale * h_i`` where the shifts satisfy
    ``sum_i A_i h_i = 0``; that keeps ``x*`` the exact global minimiser and
    makes ``sum_i grad f_i(x*) = 0``. With ``shared_curvature`` every node
    gets the same ``A``, so ``zeta_scale=0`` gives identical local objectives.

    Raises:
        BadSpectrum: unless ``0 < mu <= L_smooth``.
    """
    if not (0 < mu <= L_smooth):
        raise BadSpectrum(f"need 0 < mu <= L_smooth, got mu={mu}, L_smooth={L_smooth}")
    if zeta_scale < 0 or sigma < 0:
        raise ValueError("zeta_scale and sigma must be non-negative")
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    rng = np.random.default_rng(seed)
    if shared_curvature:
        a0 = _random_spd(rng, d, mu, L_smooth)
        A = np.repeat(a0[None], n, axis=0)
    else:
        A = np.stack([_random_spd(rng, d, mu, L_smooth) for _ in range(n)])
    x_star = rng.standard_normal(d)
    raw = rng.standard_normal((n, d))
    drift = np.einsum("ijk,ik->j", A, raw) / n
    h = raw - np.linalg.solve(A, np.broadcast_to(drift, (n, d))[..., None])[..., 0]
    b = np.einsum("ijk,ik->ij", A, x_star + zeta_scale * h)
    grads_at_opt = np.einsum("ijk,k->ij", A, x_star) - b
    zeta_hat = float(np.max(np.linalg.norm(grads_at_opt, axis=1)))
    return QuadraticProblem(n, d, A, b, float(sigma), int(seed), float(mu), float(L_smooth),
                            float(zeta_scale), x_star, zeta_hat)


@dataclass(frozen=True)
class DSGDConfig:
    eta: float
    rounds: int
    momentum: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if not 0 <= self.momentum < 1:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")


@dataclass
class TrainingTrace:
    grad_norm_sq: list[float] = field(default_factory=list)
    consensus_error: list[float] = field(default_factory=list)
    suboptimality: list[float] = field(default_factory=list)
    zeta_traj: float = 0.0  # max_r max_i ||grad f_i(xbar_r) - grad f(xbar_r)||
    zeta_hat: float = 0.0

    @property
    def mean_consensus_error(self) -> float:
        return float(np.mean(self.consensus_error))


def dsgd_iterates(problem: QuadraticProblem, seq: GraphSequence, cfg: DSGDConfig,
                  eta: float | None = None, x0: np.ndarray | None = None,
                  ) -> Iterator[tuple[int, np.ndarray, np.ndarray | None]]:
    """Yield ``(r, Y_r, G_r)``: node-major iterates and the noisy gradients used
    to leave them (``None`` for the final iterate).

    ``eta`` overrides ``cfg.eta``, which is how a pure-gossip run (eta=0)
    is expressed. ``x0`` (``n x d``) replaces the all-zero start.
    """
    if problem.n != seq.n:
        raise DimensionMismatch(f"problem has n={problem.n}, sequence has n={seq.n}")
    mats = seq.mixing_matrices
    if not mats and seq.n > 1:
        raise EmptySequence("cannot run DSGD over an empty sequence")
    step = cfg.eta if eta is None else eta
    rng = np.random.default_rng(cfg.seed)
    y = np.zeros((problem.n, problem.d)) if x0 is None else np.array(x0, dtype=np.float64)
    if y.shape != (problem.n, problem.d):
        raise DimensionMismatch(f"x0 has shape {y.shape}, expected {(problem.n, problem.d)}")
    buf = np.zeros_like(y)
    for r in range(cfg.rounds):
        g = problem.stochastic_grads(y, rng)
        yield r, y, g
        if cfg.momentum:
            buf = cfg.momentum * buf + g
            z = y - step * buf
        else:
            z = y - step * g
        y = mix_rows(mats[r % len(mats)], z) if mats else z
    yield cfg.rounds, y, None


def dsgd_run(problem: QuadraticProblem, seq: GraphSequence, cfg: DSGDConfig) -> TrainingTrace:
    """Run DSGD from ``x = 0`` at every node; all trace fields are taken at the average."""
    trace = TrainingTrace(zeta_hat=problem.zeta_hat)
    f_star = problem.f_star
    for r, y, _ in dsgd_iterates(problem, seq, cfg):
        xbar = y.mean(axis=0)
        g = problem.grad(xbar)
        trace.grad_norm_sq.append(float(g @ g))
        trace.consensus_error.append(consensus_error_rows(y))
        trace.suboptimality.append(problem.value(xbar) - f_star)
        spread = problem.local_grads(np.broadcast_to(xbar, y.shape)) - g
        trace.zeta_traj = max(trace.zeta_traj, float(np.max(np.linalg.norm(spread, axis=1))))
    return trace


def gradient_descent(problem: QuadraticProblem, eta: float, rounds: int) -> np.ndarray:
    """Centralised full-gradient descent on the average objective from 0."""
    x = np.zeros(problem.d)
    path = [x.copy()]
    for _ in range(rounds):
        x = x - eta * problem.grad(x)
        path.append(x.copy())
    return np.asarray(path)


# -- sweeps -----------------------------------------------------------------------

SWEEP_HEADER = ("family", "length", "consensus_rounds", "final_grad_norm_sq",
                "mean_consensus_error", "final_suboptimality", "comm_cost")


@dataclass(frozen=True)
class SweepRow:
    family: str
    length: int | None = None
    consensus_rounds: int | None = None
    final_grad_norm_sq: float | None = None
    mean_consensus_error: float | None = None
    final_suboptimality: float | None = None
    comm_cost: int | None = None
    error: str | None = None

    def csv_fields(self) -> list[str]:
        from .io import fmt_float

        if self.error is not None:
            return [self.family, "", "", "", "", "", f"error:{self.error}"]
        return [
            self.family, str(self.length),
            "" if self.consensus_rounds is None else str(self.consensus_rounds),
            fmt_float(self.final_grad_norm_sq), fmt_float(self.mean_consensus_error),
            fmt_float(self.final_suboptimality), str(self.comm_cost),
        ]


def communication_cost(seq: GraphSequence, rounds: int) -> int:
    """Messages sent over ``rounds`` rounds: two per undirected edge, one per arc."""
    if not len(seq):
        return 0
    per = [len(g) * (1 if g.directed else 2) for g in seq.graphs]
    return sum(per[r % len(per)] for r in range(rounds))


def _sweep_row(problem: QuadraticProblem, tag: str, cfg: DSGDConfig) -> SweepRow:
    try:
        seq = from_tag(tag, problem.n)
        trace = dsgd_run(problem, seq, cfg)
        return SweepRow(seq.builder_tag, len(seq), verify_finite_time(seq),
                        trace.grad_norm_sq[-1], trace.mean_consensus_error,
                        trace.suboptimality[-1], communication_cost(seq, cfg.rounds))
    except FiniteMixError as exc:
        return SweepRow(tag, error=exc.code)


def topology_sweep(problem: QuadraticProblem, families: Sequence[str], cfg: DSGDConfig,
                   threads: int | None = None) -> list[SweepRow]:
    """One DSGD run per family, all sharing ``cfg.seed`` (common random numbers)."""
    with ThreadPoolExecutor(max_workers=worker_count(threads)) as pool:
        return list(pool.map(lambda tag: _sweep_row(problem, tag, cfg), families))
