"""Undirected graphs in CSR form, random generators and the two sparse kernels
that both graph fitness functions reduce to."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from numba import njit

from evotypes.errors import DuplicateEdge, FormatError, InvalidAttachment, LengthMismatch, SelfLoop, VertexOutOfRange


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable CSR graph. ``neighbors[offsets[i]:offsets[i+1]]`` is the sorted
    adjacency list of vertex ``i``; every edge is stored in both directions."""

    n: int
    offsets: np.ndarray
    neighbors: np.ndarray

    def __post_init__(self):
        self.offsets.setflags(write=False)
        self.neighbors.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return len(self.neighbors) // 2

    def adjacency(self, i: int) -> np.ndarray:
        return self.neighbors[self.offsets[i]:self.offsets[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def edges(self) -> list[tuple[int, int]]:
        """Each undirected edge once, as ``(u, v)`` with ``u < v``, in CSR order."""
        src = np.repeat(np.arange(self.n), self.degrees())
        keep = src < self.neighbors
        return list(zip(src[keep].tolist(), self.neighbors[keep].tolist()))

    def dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        src = np.repeat(np.arange(self.n), self.degrees())
        a[src, self.neighbors] = 1
        return a

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.neighbors, other.neighbors))

    def __hash__(self):
        return hash((self.n, self.neighbors.tobytes()))


def from_edge_list(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if n < 0:
        raise VertexOutOfRange(f"vertex count must be non-negative, got {n}")
    if pairs.size:
        bad = (pairs < 0) | (pairs >= n)
        if bad.any():
            u, v = pairs[bad.any(axis=1)][0]
            raise VertexOutOfRange(f"edge ({u}, {v}) has an endpoint outside [0, {n - 1}]")
        loops = pairs[:, 0] == pairs[:, 1]
        if loops.any():
            raise SelfLoop(f"self-loop at vertex {pairs[loops][0, 0]}")
        canon = np.sort(pairs, axis=1)
        uniq, counts = np.unique(canon, axis=0, return_counts=True)
        if (counts > 1).any():
            u, v = uniq[counts > 1][0]
            raise DuplicateEdge(f"edge ({u}, {v}) listed more than once")
    both = np.concatenate([pairs, pairs[:, ::-1]])
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(both[:, 0], minlength=n), out=offsets[1:])
    return Graph(n, offsets, np.ascontiguousarray(both[:, 1]))


def _check_length(g: Graph, x: np.ndarray) -> None:
    if len(x) != g.n:
        raise LengthMismatch(f"bit string has length {len(x)}, graph has {g.n} vertices")


@njit(cache=True)
def _internal_edges(offsets, neighbors, x):
    twice = 0
    for i in range(len(x)):
        if x[i]:
            for p in range(offsets[i], offsets[i + 1]):
                if x[neighbors[p]]:
                    twice += 1
    return twice // 2


@njit(cache=True)
def _cut_value(offsets, neighbors, x):
    cut = 0
    for i in range(len(x)):
        if x[i]:
            for p in range(offsets[i], offsets[i + 1]):
                if not x[neighbors[p]]:
                    cut += 1
    return cut


def internal_edges(g: Graph, x: np.ndarray) -> int:
    """Number of edges with both endpoints selected, ``x^T A x / 2``."""
    _check_length(g, x)
    return int(_internal_edges(g.offsets, g.neighbors, np.asarray(x, dtype=np.uint8)))


def cut_value(g: Graph, x: np.ndarray) -> int:
    """Number of edges with exactly one selected endpoint, ``(1 - x)^T A x``."""
    _check_length(g, x)
    return int(_cut_value(g.offsets, g.neighbors, np.asarray(x, dtype=np.uint8)))


def gen_er(n: int, p: float, seed) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return from_edge_list(n, np.column_stack([iu[keep], ju[keep]]))


def gen_ba(n: int, m: int, seed) -> Graph:
    """Preferential attachment grown from an ``m``-vertex path.

    Each new vertex links to ``m`` distinct existing vertices drawn with
    probability proportional to their current degree, so the result is
    connected and has exactly ``(m - 1) + (n - m) * m`` edges.
    """
    if m < 1 or m >= n:
        raise InvalidAttachment(f"attachment degree must satisfy 1 <= m < n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    degree = np.zeros(n, dtype=np.float64)
    edges = [(i, i + 1) for i in range(m - 1)]
    degree[:m - 1] += 1
    degree[1:m] += 1
    for v in range(m, n):
        weights = degree[:v]
        total = weights.sum()
        if v == m:
            targets = np.arange(m)
        else:
            targets = rng.choice(v, size=m, replace=False, p=weights / total if total > 0 else None)
        for t in targets:
            edges.append((int(t), v))
        degree[targets] += 1
        degree[v] += m
    return from_edge_list(n, edges)


def write_edge_list(g: Graph, path) -> None:
    lines = [f"n {g.n} m {g.num_edges}"]
    lines += [f"{u} {v}" for u, v in g.edges()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_edge_list(path) -> Graph:
    header = None
    edges = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 4 or fields[0] != "n" or fields[2] != "m":
                raise FormatError(f"{path}:{lineno}: expected header 'n <count> m <count>'")
            try:
                header = int(fields[1]), int(fields[3])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer count in header") from None
            continue
        if len(fields) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'u v', got {line!r}")
        try:
            edges.append((int(fields[0]), int(fields[1])))
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-integer vertex in {line!r}") from None
    if header is None:
        raise FormatError(f"{path}: missing header line")
    n, m = header
    if len(edges) != m:
        raise FormatError(f"{path}: header declares {m} edges, found {len(edges)}")
    return from_edge_list(n, edges)
