"""Plain-text persistence: edge lists, matrices and sample sets."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParameterError
from .estimator import SymmetricMatrixEstimate
from .gff import SampleSet
from .graph import WeightedGraph


def _fmt(x: float) -> str:
    return repr(float(x))


def write_edgelist(g: WeightedGraph, path, comments: list[str] | None = None) -> None:
    lines = [f"d={g.d}"]
    lines += [f"# {c}" for c in comments or ()]
    lines += [f"{i} {j} {_fmt(w)}" for i, j, w in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edgelist(path) -> WeightedGraph:
    d = None
    edges = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if d is None:
            if not line.startswith("d="):
                raise ParameterError(f"{path}: first line must be 'd=<int>', got {line!r}")
            d = int(line[2:])
            continue
        i, j, w = line.split()
        edges.append((int(i), int(j), float(w)))
    if d is None:
        raise ParameterError(f"{path}: missing 'd=<int>' header")
    return WeightedGraph(d, tuple(edges))


def write_matrix(M, path) -> None:
    """Matrix CSV, one row per line. Estimates get a ``# kind=...`` header."""
    lines = []
    if isinstance(M, SymmetricMatrixEstimate):
        scale = ("U", M.U) if M.kind == "Covariance" else ("eta", M.eta)
        meta = [("kind", M.kind), scale, ("n", M.n), ("seed", M.seed)]
        lines.append("# " + ", ".join(f"{k}={'NA' if v is None else v}" for k, v in meta))
        M = M.entries
    lines += [",".join(_fmt(x) for x in row) for row in np.asarray(M, dtype=float)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path):
    """Inverse of write_matrix; returns an estimate when a header is present."""
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            for item in line[1:].split(","):
                k, v = item.strip().split("=", 1)
                meta[k] = v
        elif line.strip():
            rows.append([float(x) for x in line.split(",")])
    M = np.array(rows, dtype=float)
    if not meta:
        return M

    def num(key, cast):
        v = meta.get(key, "NA")
        return None if v == "NA" else cast(v)

    return SymmetricMatrixEstimate(M, meta["kind"], eta=num("eta", float), U=num("U", float), n=num("n", int), seed=num("seed", int))


def write_sampleset(s: SampleSet, path) -> None:
    """Header ``n,d,eta,seed``, its values, then one ``x_1..x_d,y_1..y_d`` row per sample."""
    seed = "NA" if s.seed is None else str(s.seed)
    lines = ["n,d,eta,seed", f"{s.n},{s.d},{_fmt(s.eta)},{seed}"]
    lines += [",".join(_fmt(v) for v in row) for row in np.hstack([s.X, s.Y])]
    Path(path).write_text("\n".join(lines) + "\n")


def read_sampleset(path) -> SampleSet:
    lines = Path(path).read_text().splitlines()
    if lines[0].strip() != "n,d,eta,seed":
        raise ParameterError(f"{path}: expected header 'n,d,eta,seed'")
    n, d, eta, seed = lines[1].split(",")
    n, d = int(n), int(d)
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:2 + n]], dtype=float).reshape(n, 2 * d)
    return SampleSet(data[:, :d], data[:, d:], float(eta), None if seed == "NA" else int(seed))
