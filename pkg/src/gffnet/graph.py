"""Weighted graphs, their Laplacians and a few standard families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParameterError

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph on vertices ``0..d-1`` with positive edge weights.

    Edges are normalized to ``i < j`` and kept sorted, so two graphs with the
    same edge multiset compare equal.
    """

    d: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ParameterError(f"vertex count must be a positive integer, got {self.d}")
        norm = []
        for i, j, w in self.edges:
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise ParameterError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            if i < 0 or j >= self.d:
                raise ParameterError(f"edge ({i}, {j}) out of range for d={self.d}")
            if not (w > 0 and np.isfinite(w)):
                raise ParameterError(f"edge ({i}, {j}) has non-positive weight {w}")
            norm.append((i, j, w))
        norm.sort()
        for a, b in zip(norm, norm[1:]):
            if a[:2] == b[:2]:
                raise ParameterError(f"duplicate edge {a[:2]}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((i, j) for i, j, _ in self.edges)

    def is_unit_weight(self) -> bool:
        return all(w == 1.0 for _, _, w in self.edges)

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.d, self.d))
        for i, j, w in self.edges:
            A[i, j] = A[j, i] = w
        return A

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def relabel(self, perm: Iterable[int]) -> "WeightedGraph":
        """Vertex ``v`` of ``self`` becomes vertex ``perm[v]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.d)):
            raise ParameterError("perm must be a permutation of range(d)")
        return WeightedGraph(self.d, tuple((perm[i], perm[j], w) for i, j, w in self.edges))


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Dense combinatorial Laplacian ``D - A``."""
    A = g.adjacency()
    return np.diag(A.sum(axis=1)) - A


def sample_erdos_renyi(d: int, p: float, rng: np.random.Generator | int | None = None) -> WeightedGraph:
    """G(d, p) with unit weights; each unordered pair kept independently."""
    if not (0.0 < p <= 1.0):
        raise ParameterError(f"edge probability must lie in (0, 1], got {p}")
    rng = np.random.default_rng(rng)
    iu, ju = np.triu_indices(d, k=1)
    keep = rng.random(iu.size) < p
    return WeightedGraph(d, tuple((int(i), int(j), 1.0) for i, j in zip(iu[keep], ju[keep])))


def path_graph(d: int) -> WeightedGraph:
    return WeightedGraph(d, tuple((i, i + 1, 1.0) for i in range(d - 1)))


def cycle_graph(d: int) -> WeightedGraph:
    if d < 3:
        raise ParameterError("a cycle needs at least 3 vertices")
    return WeightedGraph(d, tuple((i, (i + 1) % d, 1.0) for i in range(d)))


def complete_graph(d: int) -> WeightedGraph:
    return WeightedGraph(d, tuple((i, j, 1.0) for i in range(d) for j in range(i + 1, d)))


def star_graph(d: int) -> WeightedGraph:
    """Vertex 0 is the hub."""
    return WeightedGraph(d, tuple((0, j, 1.0) for j in range(1, d)))


FAMILIES = {
    "path": path_graph,
    "cycle": cycle_graph,
    "complete": complete_graph,
    "star": star_graph,
}


def connectivity_threshold(d: int) -> float:
    """``log(d)/d``; G(d, p) is connected w.h.p. above it."""
    return float(np.log(d) / d) if d > 1 else 0.0
