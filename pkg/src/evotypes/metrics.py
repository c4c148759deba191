from __future__ import annotations

import numpy as np


def population_diversity(genotypes) -> float:
    """Mean Hamming distance over all unordered pairs of rows.

    Uses the per-column identity sum_j ones_j * (m - ones_j), which counts every
    disagreeing pair once, so the cost is O(m * n) rather than O(m^2 * n).
    """
    g = np.asarray(genotypes)
    m = len(g)
    if m < 2:
        return 0.0
    ones = g.sum(axis=0, dtype=np.int64)
    return float((ones * (m - ones)).sum()) / (m * (m - 1) / 2)


def hamming(a, b) -> int:
    pa = np.packbits(np.asarray(a, dtype=np.uint8))
    pb = np.packbits(np.asarray(b, dtype=np.uint8))
    return int(np.bitwise_count(pa ^ pb).sum())


class UniqueOptimaTracker:
    """Distinct genotypes attaining the best fitness seen so far.

    The set is emptied whenever the best fitness strictly improves.
    """

    def __init__(self):
        self.best = -np.inf
        self._seen: set[bytes] = set()

    def update(self, genotype, fitness: float) -> None:
        if fitness < self.best:
            return
        if fitness > self.best:
            self.best = fitness
            self._seen.clear()
        self._seen.add(np.packbits(np.asarray(genotype, dtype=np.uint8)).tobytes())

    def update_many(self, genotypes, fitness) -> None:
        fitness = np.asarray(fitness)
        # rows below the current best cannot change anything
        for i in np.flatnonzero(fitness >= min(self.best, fitness.max())):
            self.update(genotypes[i], fitness[i])

    @property
    def count(self) -> int:
        return len(self._seen)
