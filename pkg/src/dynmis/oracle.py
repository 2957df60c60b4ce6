"""Brute-force reference implementations used as ground truth.

Everything here recomputes from first principles: the static greedy
independent set in rank order, the inductive closure of vertices an edge
update can affect, residual vertex sets at a rank threshold, and exact
conditional expectations of affected-set sizes by enumerating every
permutation of a small vertex set. The dynamic structure is tested
against these, never the other way around.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .permutation import Permutation


@dataclass(frozen=True)
class StaticGraph:
    """An immutable simple graph on vertices [0, n)."""

    n: int
    edges: frozenset[tuple[int, int]]
    adj: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_edges(n: int, edges) -> "StaticGraph":
        if n < 1:
            raise ValueError("n must be >= 1")
        seen: set[tuple[int, int]] = set()
        lists: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            lists[u].append(v)
            lists[v].append(u)
        return StaticGraph(n=n, edges=frozenset(seen),
                           adj=tuple(tuple(sorted(l)) for l in lists))

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edges

    def with_edge(self, u: int, v: int) -> "StaticGraph":
        return StaticGraph.from_edges(self.n, self.edges | {(min(u, v), max(u, v))})

    def without_edge(self, u: int, v: int) -> "StaticGraph":
        key = (min(u, v), max(u, v))
        if key not in self.edges:
            raise ValueError(f"edge {key} not present")
        return StaticGraph.from_edges(self.n, self.edges - {key})

    def adjacency_masks(self) -> np.ndarray:
        """Per-vertex neighbor bitmasks (int64); requires n <= 62."""
        if self.n > 62:
            raise ValueError("bitmask adjacency limited to n <= 62")
        masks = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            masks[u] |= np.int64(1) << v
            masks[v] |= np.int64(1) << u
        return masks


def greedy_mis(g: StaticGraph, perm: Permutation) -> set[int]:
    """The unique greedy MIS: scan in rank order, add whatever is undominated."""
    mis: set[int] = set()
    dominated = [False] * g.n
    for r in range(1, g.n + 1):
        v = perm.vertex_at(r)
        if not dominated[v]:
            mis.add(v)
            dominated[v] = True
            for w in g.adj[v]:
                dominated[w] = True
    return mis


def greedy_mis_fast(n: int, us: np.ndarray, vs: np.ndarray,
                    perm: Permutation) -> np.ndarray:
    """Array form of :func:`greedy_mis` for the hot verification loops."""
    indptr, indices = kernels.build_csr(n, us, vs)
    order = np.asarray(perm.inv, dtype=np.int64)
    return kernels.greedy_mis_csr(n, indptr, indices, order)


def predecessors_in(g: StaticGraph, perm: Permutation, v: int,
                    members: set[int]) -> set[int]:
    """Neighbors of v that are in ``members`` and have smaller rank."""
    rv = perm.rank_of(v)
    return {w for w in g.adj[v] if w in members and perm.rank_of(w) < rv}


def violates_greedy_constraint(g_after: StaticGraph, perm: Permutation,
                               mis_old: set[int], v: int) -> bool:
    """Whether v's greedy-constraint status is wrong on the updated graph.

    A member must have no smaller-rank member neighbor; a non-member must
    have at least one.
    """
    preds = predecessors_in(g_after, perm, v, mis_old)
    if v in mis_old:
        return bool(preds)
    return not preds


def influenced_set_bruteforce(g_after: StaticGraph, perm: Permutation,
                              mis_old: set[int], u: int, v: int) -> set[int]:
    """Definitional affected set of v for an edge update between u and v.

    ``g_after`` is the graph with the update already applied; ``mis_old``
    is the greedy MIS of the graph before it. Returns the empty set when v
    still satisfies the greedy constraint, otherwise iterates the layer
    recurrence to its fixpoint: a member joins a layer when the previous
    layer contains one of its smaller-rank neighbors; a non-member joins
    when every one of its smaller-rank member neighbors is already
    accumulated.
    """
    if perm.rank_of(v) < perm.rank_of(u):
        return set()
    if not violates_greedy_constraint(g_after, perm, mis_old, v):
        return set()
    prev = {v}
    union = {v}
    for _ in range(g_after.n + 1):
        cur: set[int] = set()
        for w in range(g_after.n):
            rw = perm.rank_of(w)
            if w in mis_old:
                if any(x in prev for x in g_after.adj[w] if perm.rank_of(x) < rw):
                    cur.add(w)
            else:
                if predecessors_in(g_after, perm, w, mis_old) <= union:
                    cur.add(w)
        if cur <= union:
            break
        union |= cur
        prev = cur
    return union


def residual_vertices(g: StaticGraph, perm: Permutation, k: int) -> set[int]:
    """Vertices not dominated by MIS members of rank <= k, from scratch."""
    if not 1 <= k <= g.n:
        raise ValueError(f"threshold {k} outside [1, {g.n}]")
    mis = greedy_mis(g, perm)
    low = {w for w in mis if perm.rank_of(w) <= k}
    out = set(range(g.n))
    for w in low:
        out.discard(w)
        out.difference_update(g.adj[w])
    return out


def max_degree_induced(g: StaticGraph, subset: set[int]) -> int:
    """Maximum degree of the subgraph induced by ``subset``."""
    best = 0
    for v in subset:
        d = sum(1 for w in g.adj[v] if w in subset)
        if d > best:
            best = d
    return best


# ---------------------------------------------------------------------------
# Exhaustive permutation enumeration


@dataclass(frozen=True)
class RankCensus:
    """Affected-set size totals bucketed by the rank pair of (u, v).

    ``sums[i, j]`` holds the total of |S| over all permutations placing u
    at rank i and v at rank j; each cell covers exactly (n-2)! of them.
    """

    n: int
    sums: np.ndarray
    per_cell: int

    def expectation(self, cells: list[tuple[int, int]]) -> Fraction:
        if not cells:
            raise ValueError("condition selects no permutations")
        total = sum(int(self.sums[i, j]) for i, j in cells)
        return Fraction(total, self.per_cell * len(cells))


def influence_rank_census(g_before: StaticGraph, u: int, v: int,
                          is_insert: bool) -> RankCensus:
    """Enumerate all n! permutations for one edge update between u and v."""
    n = g_before.n
    if u == v:
        raise ValueError("endpoints must differ")
    if n > 9:
        raise ValueError("full enumeration limited to n <= 9")
    if is_insert and g_before.has_edge(u, v):
        raise ValueError("cannot insert an existing edge")
    if not is_insert and not g_before.has_edge(u, v):
        raise ValueError("cannot delete a missing edge")
    masks = g_before.adjacency_masks()
    sums = kernels.influence_census(n, masks, u, v, is_insert)
    per_cell = 1
    for x in range(1, n - 1):
        per_cell *= x
    return RankCensus(n=n, sums=np.asarray(sums), per_cell=per_cell)


def _condition_cells(n: int, condition) -> list[tuple[int, int]]:
    kind = condition[0]
    if kind == "cab":
        _, c, a, b = condition
        if not (1 <= c <= a < b <= n):
            raise ValueError(f"unsatisfiable condition C={c}, A={a}, B={b}")
        return [(c, j) for j in range(a + 1, b + 1)]
    if kind == "ab":
        _, a, b = condition
        if not (1 <= a < b <= n) or b - a < 2:
            raise ValueError(f"unsatisfiable condition A={a}, B={b}")
        return [(i, j) for i in range(a + 1, b + 1) for j in range(i + 1, b + 1)]
    raise ValueError(f"unknown condition kind {kind!r}")


def exhaustive_expected_S(g_before: StaticGraph, u: int, v: int,
                          is_insert: bool, condition) -> Fraction:
    """Exact E[|S_v|] conditioned on ranks of u and v.

    ``condition`` is ``("cab", C, A, B)`` for {rank(u)=C, rank(v) in
    (A, B]} or ``("ab", A, B)`` for {A < rank(u) < rank(v) <= B}. The
    average is an exact rational over the permutations satisfying it.
    """
    census = influence_rank_census(g_before, u, v, is_insert)
    return census.expectation(_condition_cells(g_before.n, condition))
