"""DeceptiveLeadingBlocks_k and the best-improvement hillclimber on it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from evotypes.errors import LengthMismatch

DLB_KIND = 2


@dataclass(frozen=True)
class DlbProblem:
    n: int
    k: int

    kind = DLB_KIND
    name = "dlb"

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"block length must be at least 2, got k={self.k}")
        if self.n < self.k or self.n % self.k:
            raise ValueError(f"n={self.n} is not a positive multiple of k={self.k}")

    @property
    def blocks(self) -> int:
        return self.n // self.k

    @property
    def kernel_args(self):
        empty = np.zeros(1, dtype=np.int64)
        return empty, empty, self.k

    def evaluate(self, x) -> float:
        return float(dlb_value(self, x))

    def local_search(self, x, rng=None) -> tuple[np.ndarray, int]:
        res = hillclimb_blocks(self, x)
        return res.result, res.ls_iterations


@dataclass(frozen=True)
class LsResult:
    result: np.ndarray
    ls_iterations: int
    neighbor_evals: int


def _bits(p: DlbProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (p.n,):
        raise LengthMismatch(f"bit string has shape {x.shape}, expected ({p.n},)")
    return x


@njit(cache=True)
def _block_ones(x, k, b):
    s = 0
    for i in range(b * k, b * k + k):
        s += x[i]
    return s


@njit(cache=True)
def _critical_from(x, k, start):
    """First 0-based block at or after ``start`` that is not all ones; ``n // k`` if none."""
    nb = len(x) // k
    b = start
    while b < nb and _block_ones(x, k, b) == k:
        b += 1
    return b


@njit(cache=True)
def _value_at(x, k, c):
    nb = len(x) // k
    if c == nb:
        return len(x)
    return k * c + k - 1 - _block_ones(x, k, c)


@njit(cache=True)
def _dlb_value(x, k):
    return _value_at(x, k, _critical_from(x, k, 0))


@njit(cache=True)
def _hillclimb_blocks(x, k):
    """Best-improvement hillclimb on DLB_k, in place; returns the move count.

    From the critical block with ``o`` ones: if ``o == k - 1`` the unique best
    neighbour completes the block (its value is at least ``k * c`` against
    ``v + 1`` for dropping a one); if ``0 < o < k - 1`` every best neighbour drops
    one of its ones; if ``o == 0`` nothing improves. Flips outside the critical
    block never improve. The end point is therefore independent of tie-breaking.
    """
    nb = len(x) // k
    c = _critical_from(x, k, 0)
    moves = 0
    while c < nb:
        ones = _block_ones(x, k, c)
        if ones == k - 1:
            for i in range(c * k, c * k + k):
                x[i] = 1
            moves += 1
            c = _critical_from(x, k, c + 1)
        else:
            for i in range(c * k, c * k + k):
                x[i] = 0
            moves += ones
            break
    return moves


def critical_block(p: DlbProblem, x) -> int | None:
    """1-based index of the first block that is not all ones, or None at 1^n."""
    x = _bits(p, x)
    c = int(_critical_from(x, p.k, 0))
    return None if c == p.blocks else c + 1


def dlb_value(p: DlbProblem, x) -> int:
    x = _bits(p, x)
    return int(_dlb_value(x, p.k))


def dlb_values(p: DlbProblem, xs: np.ndarray) -> np.ndarray:
    """Vectorised ``dlb_value`` over the rows of ``xs``."""
    xs = np.asarray(xs, dtype=np.int64)
    ones = xs.reshape(len(xs), p.blocks, p.k).sum(axis=2)
    full = ones == p.k
    c = np.where(full.all(axis=1), p.blocks, np.argmin(full, axis=1))
    crit = ones[np.arange(len(xs)), np.minimum(c, p.blocks - 1)]
    return np.where(c == p.blocks, p.n, p.k * c + p.k - 1 - crit)


def hillclimb(p: DlbProblem, x, rng) -> LsResult:
    """Best-improvement hillclimber evaluating all ``n`` Hamming neighbours per step.

    Moves to a uniformly random best neighbour while it is strictly better.
    """
    x = _bits(p, x).copy()
    flips = np.eye(p.n, dtype=np.uint8)
    current = dlb_value(p, x)
    moves = 0
    evals = 0
    while True:
        values = dlb_values(p, x ^ flips)
        evals += p.n
        best = values.max()
        if best <= current:
            break
        ties = np.flatnonzero(values == best)
        i = ties[0] if len(ties) == 1 else ties[rng.integers(len(ties))]
        x[i] ^= 1
        current = int(best)
        moves += 1
    return LsResult(x, moves, evals)


def hillclimb_blocks(p: DlbProblem, x) -> LsResult:
    """Same end point and move count as ``hillclimb``, computed from the block structure.

    ``neighbor_evals`` reports the cost the full-scan climber would incur.
    """
    y = _bits(p, x).copy()
    moves = int(_hillclimb_blocks(y, p.k))
    return LsResult(y, moves, p.n * (moves + 1))


def baldwin_value(p: DlbProblem, x, rng) -> tuple[int, LsResult]:
    res = hillclimb(p, x, rng)
    return dlb_value(p, res.result), res
