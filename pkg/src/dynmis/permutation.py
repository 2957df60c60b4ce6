"""Random total order over a fixed vertex set and rank/level arithmetic.

The order is drawn once per structure lifetime from a seeded PRNG and is
immutable afterwards. Every other module derives its notion of "level"
from the rank arithmetic defined here: rank p >= 2 sits at the level k
with 2**k < p <= 2**(k+1), and rank 1 gets the sentinel level -1.

Reproducibility contract: the permutation is produced by
``numpy.random.default_rng(seed).permutation(n)`` (PCG64), so a given
(n, seed) pair yields the same order on every platform and run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def level_of_rank(p: int, n: int) -> int:
    """Level index of rank ``p``: -1 for p == 1, else largest k with 2**k < p."""
    if not 1 <= p <= n:
        raise ValueError(f"rank {p} outside [1, {n}]")
    return (p - 1).bit_length() - 1


def num_levels(n: int) -> int:
    """Number of non-sentinel levels: ceil(log2 n); 0 when n == 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (n - 1).bit_length()


@dataclass(frozen=True)
class Permutation:
    """A seeded random bijection between vertices [0, n) and ranks [1, n].

    ``rank[v]`` is the rank of vertex v; ``inv[r - 1]`` is the vertex with
    rank r. Immutable after construction and safe to share across threads.
    """

    n: int
    seed: int
    rank: list[int] = field(repr=False)
    inv: list[int] = field(repr=False)

    @staticmethod
    def generate(n: int, seed: int) -> "Permutation":
        """Draw a uniformly random order over [0, n) from the given seed."""
        if n < 1:
            raise ValueError("n must be >= 1")
        order = np.random.default_rng(seed).permutation(n)
        rank = [0] * n
        inv = [0] * n
        for pos, v in enumerate(order.tolist()):
            rank[v] = pos + 1
            inv[pos] = v
        return Permutation(n=n, seed=seed, rank=rank, inv=inv)

    @property
    def levels(self) -> int:
        """Number of levels L = ceil(log2 n); level indices run 0..L-1."""
        return num_levels(self.n)

    def rank_of(self, v: int) -> int:
        return self.rank[v]

    def vertex_at(self, r: int) -> int:
        if not 1 <= r <= self.n:
            raise ValueError(f"rank {r} outside [1, {self.n}]")
        return self.inv[r - 1]

    def level_of(self, p: int) -> int:
        return level_of_rank(p, self.n)

    def rank_range(self, i: int, j: int) -> list[int]:
        """Vertices with ranks in [i, j], ascending by rank."""
        if not (1 <= i <= j <= self.n):
            raise ValueError(f"invalid rank range [{i}, {j}] for n={self.n}")
        return self.inv[i - 1 : j]

    def rank_array(self) -> np.ndarray:
        """Ranks as an int64 array indexed by vertex (copy)."""
        return np.asarray(self.rank, dtype=np.int64)
