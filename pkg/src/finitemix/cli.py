"""Command-line entry point.

Exit codes: 0 success, 1 property failure (e.g. not finite-time), 2 usage or
parameter error. Errors are reported as a single ``error: <Code>: <message>``
line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .builders import FAMILIES, build
from .consensus import (
    FINITE_TIME_TOL, RATE_TOL, TABLE_HEADER, consensus_rate, run_gossip,
    sequence_rate_table, verify_finite_time,
)
from .dsgd import (
    SWEEP_HEADER, DSGDConfig, QuadraticProblem, dsgd_run, make_problem, topology_sweep,
)
from .errors import FiniteMixError, FormatError
from .graph import validate_sequence
from .io import atomic_write, dumps, export_dot, fmt_float, load

BASE_FAMILIES = ("hhc", "simple-base", "base")


class UsageError(FiniteMixError):
    code = "UsageError"


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _add_family_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--family", choices=FAMILIES, required=required)
    p.add_argument("--n", type=int, required=required)
    p.add_argument("--k", type=int)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)


def _build_from_args(args):
    return build(args.family, args.n, k=args.k, rows=args.rows, cols=args.cols)


def _sequence_from_args(args):
    if getattr(args, "seq", None):
        if args.family:
            raise UsageError("give either a sequence file or --family, not both")
        return load(args.seq)
    if not args.family or args.n is None:
        raise UsageError("need --family and --n (or a sequence file)")
    return _build_from_args(args)


def length_bound(n: int, k: int) -> float:
    """Upper bound ``2 log_{k+1}(n) + 2`` on the Base-(k+1) sequence length."""
    return 2 * math.log(n) / math.log(k + 1) + 2


# -- subcommands ------------------------------------------------------------------


def cmd_build(args) -> int:
    seq = _build_from_args(args)
    _emit(dumps(seq), args.out)
    info = f"length={len(seq)} max_degree={seq.max_degree}"
    if args.family in ("simple-base", "base") and seq.n > 1:
        info += f" bound={fmt_float(length_bound(seq.n, seq.k))}"
    print(info, file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_verify(args) -> int:
    seq = load(args.seq)
    report = validate_sequence(seq)
    for line in report.lines():
        print(line)
    m = None
    if report.ok:
        m = verify_finite_time(seq, args.tol, cycles=args.cycles, exact=args.exact)
    print(f"valid={'true' if report.ok else 'false'} length={len(seq)} "
          f"finite_time={'true' if m is not None else 'false'}"
          + (f" m={m}" if m is not None else ""))
    return 0 if report.ok and m is not None else 1


def cmd_rate(args) -> int:
    seq = _sequence_from_args(args)
    for i, w in enumerate(seq.mixing_matrices, start=1):
        est = consensus_rate(w, tol=args.tol, strict=False)
        prefix = "" if len(seq) == 1 else f"graph={i} "
        flag = "" if est.converged else " converged=false"
        print(f"{prefix}beta={fmt_float(est.beta)} iterations={est.iterations_used}{flag}")
    return 0


def cmd_gossip(args) -> int:
    seq = _sequence_from_args(args)
    trace = run_gossip(seq, args.d, args.iters, args.seed)
    rows = [[str(i), fmt_float(e)] for i, e in enumerate(trace.errors)]
    _emit(_csv_text(("iter", "error"), rows), args.out)
    return 0


def _problem_from_args(args) -> QuadraticProblem:
    if args.problem:
        try:
            text = Path(args.problem).read_text(encoding="utf-8")
        except OSError as exc:
            raise FormatError(f"cannot read {args.problem}: {exc}") from exc
        return QuadraticProblem.loads(text)
    if args.n is None:
        raise UsageError("need --problem or --n")
    return make_problem(args.n, args.d, args.zeta_scale, args.sigma, args.mu,
                        args.L_smooth, args.problem_seed)


def cmd_dsgd(args) -> int:
    problem = _problem_from_args(args)
    if args.save_problem:
        atomic_write(args.save_problem, problem.dumps())
    seq = build(args.family, problem.n, k=args.k, rows=args.rows, cols=args.cols)
    cfg = DSGDConfig(args.eta, args.rounds, args.momentum, args.seed)
    trace = dsgd_run(problem, seq, cfg)
    rows = [
        [str(r), fmt_float(g), fmt_float(c), fmt_float(s)]
        for r, (g, c, s) in enumerate(zip(trace.grad_norm_sq, trace.consensus_error,
                                          trace.suboptimality))
    ]
    _emit(_csv_text(("round", "grad_norm_sq", "consensus_error", "suboptimality"), rows),
          args.out)
    print(f"zeta_hat={fmt_float(trace.zeta_hat)} zeta_traj={fmt_float(trace.zeta_traj)}",
          file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(config, dict):
        raise FormatError("sweep config must be a JSON object")
    mode = config.get("mode", "table")
    try:
        if mode == "table":
            rows = sequence_rate_table(config["families"], config["n_values"],
                                       config.get("k_values", [1]),
                                       config.get("tol", FINITE_TIME_TOL), args.threads)
            text = _csv_text(TABLE_HEADER, [r.csv_fields() for r in rows])
        elif mode == "dsgd":
            p = config.get("problem", {})
            if "path" in p:
                problem = QuadraticProblem.loads(Path(p["path"]).read_text(encoding="utf-8"))
            else:
                problem = make_problem(p["n"], p.get("d", 10), p.get("zeta_scale", 0.0),
                                       p.get("sigma", 0.0), p.get("mu", 1.0),
                                       p.get("L_smooth", 10.0), p.get("seed", 0))
            c = config["dsgd"]
            cfg = DSGDConfig(c["eta"], c["rounds"], c.get("momentum", 0.0), c.get("seed", 0))
            rows = topology_sweep(problem, config["families"], cfg, args.threads)
            text = _csv_text(SWEEP_HEADER, [r.csv_fields() for r in rows])
        else:
            raise FormatError(f"unknown sweep mode {mode!r}; use 'table' or 'dsgd'")
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad sweep config: {exc!r}") from exc
    _emit(text, args.out)
    return 0


def cmd_export_dot(args) -> int:
    seq = load(args.seq)
    for p in export_dot(seq, args.outdir):
        print(p)
    return 0


# -- parser -------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finitemix",
        description="Finite-time convergent gossip topologies: build, verify, simulate.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct a topology and write canonical JSON")
    _add_family_args(p)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="validate a sequence file and check finite-time convergence")
    p.add_argument("seq")
    p.add_argument("--tol", type=float, default=FINITE_TIME_TOL)
    p.add_argument("--cycles", type=int, default=1)
    p.add_argument("--exact", action="store_true", help="rational-arithmetic probe")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rate", help="consensus rate of each mixing matrix")
    p.add_argument("seq", nargs="?")
    _add_family_args(p, required=False)
    p.add_argument("--tol", type=float, default=RATE_TOL)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("gossip", help="gossip averaging trace as CSV")
    p.add_argument("seq", nargs="?")
    _add_family_args(p, required=False)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gossip)

    p = sub.add_parser("dsgd", help="decentralized SGD on a synthetic quadratic problem")
    p.add_argument("--problem", help="problem JSON (otherwise generated from the flags below)")
    p.add_argument("--save-problem")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--zeta-scale", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--L-smooth", type=float, default=10.0)
    p.add_argument("--problem-seed", type=int, default=0)
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dsgd)

    p = sub.add_parser("sweep", help="batch table or DSGD topology sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int, help="worker threads (default: $FINITEMIX_THREADS or 1)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-dot", help="write one DOT file per graph")
    p.add_argument("seq")
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except FiniteMixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: ValueError: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
