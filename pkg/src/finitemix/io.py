"""Canonical JSON and DOT serialisation of graph sequences, plus atomic writes."""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from .errors import FormatError
from .graph import EdgeList, GraphSequence


def _weight_str(w) -> str:
    f = Fraction(w)
    return f"{f.numerator}/{f.denominator}"


def _parse_weight(s) -> Fraction:
    if not isinstance(s, str):
        raise FormatError(f"weight must be a 'num/den' string, got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad weight {s!r}") from exc


def sequence_to_dict(seq: GraphSequence) -> dict:
    return {
        "n": seq.n,
        "k": seq.k,
        "builder": seq.builder_tag,
        "graphs": [
            {"directed": g.directed, "edges": [[u, v, _weight_str(w)] for u, v, w in g.edges]}
            for g in seq.graphs
        ],
    }


def dumps(seq: GraphSequence) -> str:
    return json.dumps(sequence_to_dict(seq), separators=(",", ":")) + "\n"


def sequence_from_dict(obj) -> GraphSequence:
    try:
        n = obj["n"]
        k = obj["k"]
        builder = obj.get("builder", "")
        raw_graphs = obj["graphs"]
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"missing field: {exc}") from exc
    if not isinstance(n, int) or not isinstance(k, int) or n < 1:
        raise FormatError("n and k must be integers, n >= 1")
    graphs = []
    for gi, g in enumerate(raw_graphs):
        try:
            directed = bool(g["directed"])
            edges = tuple((int(u), int(v), _parse_weight(w)) for u, v, w in g["edges"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"graph {gi + 1}: {exc}") from exc
        graphs.append(EdgeList(n, edges, directed))
    return GraphSequence(n, k, tuple(graphs), str(builder))


def loads(text: str) -> GraphSequence:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return sequence_from_dict(obj)


def load(path) -> GraphSequence:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def to_dot(g: EdgeList, name: str = "G") -> str:
    """Graphviz source for one round; edge labels carry the exact weight."""
    kind, arrow = ("digraph", "->") if g.directed else ("graph", "--")
    lines = [f"{kind} {name} {{"]
    lines.extend(f"  {i};" for i in range(1, g.n + 1))
    lines.extend(f'  {u} {arrow} {v} [label="{_weight_str(w)}"];' for u, v, w in g.edges)
    lines.append("}")
    return "\n".join(lines) + "\n"


def atomic_write(path, data: str | bytes) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def save(seq: GraphSequence, path) -> None:
    atomic_write(path, dumps(seq))


def export_dot(seq: GraphSequence, outdir) -> list[Path]:
    outdir = Path(outdir)
    width = max(2, len(str(len(seq))))
    paths = []
    for i, g in enumerate(seq.graphs, start=1):
        p = outdir / f"graph_{i:0{width}d}.dot"
        atomic_write(p, to_dot(g, name=f"G{i}"))
        paths.append(p)
    return paths


def fmt_float(x: float) -> str:
    """17 significant digits, '.' decimal, locale independent."""
    return format(float(x), ".17g")
