"""Maximum Independent Set and Maximum Cut as EA problems.

Both expose ``evaluate`` and ``local_search`` for direct use, and a ``kind``
code plus ``kernel_args`` so the compiled EA loop can dispatch without Python
callbacks.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from evotypes.errors import LengthMismatch, VertexOutOfRange
from evotypes.graph import Graph, _cut_value, _internal_edges

MIS = 0
MC = 1
DLB = 2


@njit(cache=True)
def _mis_fitness(offsets, neighbors, x):
    e = _internal_edges(offsets, neighbors, x)
    if e > 0:
        return -float(e)
    return float(np.sum(x))


@njit(cache=True)
def _mis_repair(offsets, neighbors, x, rng, trace):
    """Deselect a max-violation vertex until independent; ``x`` is updated in place.

    Returns ``(steps, scored)`` where ``scored`` counts violation counts inspected.
    Removed vertices are written to ``trace`` while it has room.
    """
    n = len(x)
    viol = np.zeros(n, dtype=np.int64)
    for i in range(n):
        if x[i]:
            for p in range(offsets[i], offsets[i + 1]):
                if x[neighbors[p]]:
                    viol[i] += 1
    cand = np.empty(n, dtype=np.int64)
    steps = 0
    scored = 0
    while True:
        best = 0
        cnt = 0
        for i in range(n):
            c = viol[i]
            if c > best:
                best = c
                cand[0] = i
                cnt = 1
            elif c == best and c > 0:
                cand[cnt] = i
                cnt += 1
        scored += n
        if best == 0:
            break
        v = cand[0] if cnt == 1 else cand[rng.integers(0, cnt)]
        x[v] = 0
        viol[v] = 0
        if steps < len(trace):
            trace[steps] = v
        steps += 1
        for p in range(offsets[v], offsets[v + 1]):
            u = neighbors[p]
            if x[u]:
                viol[u] -= 1
    return steps, scored


@njit(cache=True)
def _flip_gains(offsets, neighbors, x):
    n = len(x)
    gain = np.zeros(n, dtype=np.int64)
    for i in range(n):
        g = 0
        for p in range(offsets[i], offsets[i + 1]):
            if x[neighbors[p]] == x[i]:
                g += 1
            else:
                g -= 1
        gain[i] = g
    return gain


@njit(cache=True)
def _mc_local_search(offsets, neighbors, x, rng, trace):
    """Steepest-ascent single-flip search for max cut; ``x`` is updated in place.

    The gain of a vertex is (same-side neighbours) - (opposite-side neighbours),
    i.e. the cut increase its flip would produce. Only vertices with positive
    gain are kept in the active list; stale entries are dropped during the scan.
    Flipped vertices are written to ``trace`` while it has room.
    """
    n = len(x)
    gain = _flip_gains(offsets, neighbors, x)
    active = np.empty(n, dtype=np.int64)
    listed = np.zeros(n, dtype=np.bool_)
    na = 0
    for i in range(n):
        if gain[i] > 0:
            active[na] = i
            listed[i] = True
            na += 1
    cand = np.empty(n, dtype=np.int64)
    steps = 0
    scored = n
    while True:
        w = 0
        best = 0
        cnt = 0
        for a in range(na):
            i = active[a]
            g = gain[i]
            if g > 0:
                active[w] = i
                w += 1
                if g > best:
                    best = g
                    cand[0] = i
                    cnt = 1
                elif g == best:
                    cand[cnt] = i
                    cnt += 1
            else:
                listed[i] = False
        na = w
        scored += w
        if cnt == 0:
            break
        v = cand[0] if cnt == 1 else cand[rng.integers(0, cnt)]
        x[v] = 1 - x[v]
        gain[v] = -gain[v]
        if steps < len(trace):
            trace[steps] = v
        steps += 1
        for p in range(offsets[v], offsets[v + 1]):
            j = neighbors[p]
            if x[j] == x[v]:
                gain[j] += 2
            else:
                gain[j] -= 2
            if gain[j] > 0 and not listed[j]:
                active[na] = j
                listed[j] = True
                na += 1
    return steps, scored


_NO_TRACE = np.empty(0, dtype=np.int64)


def _bits(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (n,):
        raise LengthMismatch(f"bit string has shape {x.shape}, expected ({n},)")
    return x


class _GraphProblem:
    kind = -1

    def __init__(self, graph: Graph):
        self.graph = graph

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def kernel_args(self):
        return self.graph.offsets, self.graph.neighbors, 0

    def __repr__(self):
        return f"{type(self).__name__}(n={self.graph.n}, edges={self.graph.num_edges})"


class MisProblem(_GraphProblem):
    """Penalised MIS: set size when independent, minus the internal edge count otherwise."""

    kind = MIS
    name = "mis"

    def evaluate(self, x) -> float:
        x = _bits(x, self.n)
        return float(_mis_fitness(self.graph.offsets, self.graph.neighbors, x))

    def violation_count(self, x, i: int) -> int:
        x = _bits(x, self.n)
        if not 0 <= i < self.n:
            raise VertexOutOfRange(f"vertex {i} outside [0, {self.n - 1}]")
        if not x[i]:
            return 0
        return int(x[self.graph.adjacency(i)].sum())

    def local_search(self, x, rng) -> tuple[np.ndarray, int]:
        y, steps, _ = self.traced_local_search(x, rng, trace=_NO_TRACE)
        return y, steps

    def traced_local_search(self, x, rng, trace=None):
        """Like ``local_search`` but also returns the removed vertices in order."""
        y = _bits(x, self.n).copy()
        if trace is None:
            trace = np.empty(self.n, dtype=np.int64)
        steps, _ = _mis_repair(self.graph.offsets, self.graph.neighbors, y, rng, trace)
        return y, int(steps), trace[:steps].copy()


class McProblem(_GraphProblem):
    kind = MC
    name = "mc"

    def evaluate(self, x) -> float:
        x = _bits(x, self.n)
        return float(_cut_value(self.graph.offsets, self.graph.neighbors, x))

    def flip_gains(self, x) -> np.ndarray:
        return _flip_gains(self.graph.offsets, self.graph.neighbors, _bits(x, self.n))

    def local_search(self, x, rng) -> tuple[np.ndarray, int]:
        y, steps, _ = self.traced_local_search(x, rng, trace=_NO_TRACE)
        return y, steps

    def traced_local_search(self, x, rng, trace=None):
        """Like ``local_search`` but also returns the flipped vertices in order."""
        y = _bits(x, self.n).copy()
        if trace is None:
            trace = np.empty(max(self.graph.num_edges, 1), dtype=np.int64)
        steps, _ = _mc_local_search(self.graph.offsets, self.graph.neighbors, y, rng, trace)
        return y, int(steps), trace[:min(steps, len(trace))].copy()


def mis_evaluate(p: MisProblem, x) -> float:
    return p.evaluate(x)


def violation_count(p: MisProblem, x, i: int) -> int:
    return p.violation_count(x, i)


def mis_repair(p: MisProblem, x, rng) -> tuple[np.ndarray, int]:
    return p.local_search(x, rng)


def mc_local_search(p: McProblem, x, rng) -> tuple[np.ndarray, int]:
    return p.local_search(x, rng)


def make_problem(name: str, graph: Graph):
    name = name.lower()
    if name == "mis":
        return MisProblem(graph)
    if name in ("mc", "maxcut"):
        return McProblem(graph)
    raise ValueError(f"unknown problem {name!r}; expected 'mis' or 'mc'")
