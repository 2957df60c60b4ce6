"""Maintained dynamic state: graph, MIS membership, leveled residual hierarchy.

Instead of materializing one residual subgraph per level, the structure
keeps a single source of truth per vertex: its domination rank, the
smallest rank r such that the members of rank <= r dominate it (own rank
for members, minimum member-neighbor rank otherwise). A vertex belongs to
residual level i exactly when its domination rank exceeds 2**i, so every
level membership is an O(1) predicate. Adjacency is bucketed by edge
level, the largest level at which both endpoints still survive, which
makes "neighbors within level k" a suffix scan over buckets and keeps
relocation cost proportional to the entries that actually move.
"""

from __future__ import annotations

from bisect import bisect_left, insort

import numpy as np

from . import kernels
from .errors import StructuralIntegrityError
from .permutation import Permutation
from . import oracle as _oracle


class DynGraphState:
    """Mutable dynamic-graph state bound to one immutable permutation.

    Single writer: one update runs at a time; concurrent reads are safe
    only while no update is in flight.
    """

    def __init__(self, perm: Permutation):
        n = perm.n
        self.perm = perm
        self.n = n
        self.levels = perm.levels
        self.inf_rank = n + 1  # domination sentinel, unreachable in a settled state
        self.in_mis: list[bool] = [False] * n
        self.mis_nbr_ranks: list[list[int]] = [[] for _ in range(n)]
        self.dom_rank: list[int] = [self.inf_rank] * n
        # slot index = level + 1; levels run -1 .. L-1
        self.adj: list[list[set[int]]] = [
            [set() for _ in range(self.levels + 1)] for _ in range(n)
        ]
        self.edge_level: dict[tuple[int, int], int] = {}
        self.touched = 0
        self.debug_checks = False
        cap = self.levels - 1
        self._lvl_list = [min((r - 1).bit_length() - 1, cap) for r in range(n + 2)]
        self._lvl_np = np.asarray(self._lvl_list, dtype=np.int64)
        self._rank_np = perm.rank_array()

    # -- construction -------------------------------------------------------

    @staticmethod
    def build(perm: Permutation, initial_edges) -> "DynGraphState":
        """Run the static greedy pass in rank order and derive all state."""
        state = DynGraphState(perm)
        n = perm.n
        seen: set[tuple[int, int]] = set()
        for u, v in initial_edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        us, vs = kernels.edge_arrays(seen)
        mis = kernels.greedy_mis_csr(
            n, *kernels.build_csr(n, us, vs), np.asarray(perm.inv, dtype=np.int64)
        )
        dom = kernels.dom_ranks(n, us, vs, state._rank_np, mis, state.inf_rank)
        state.in_mis = [bool(x) for x in mis]
        state.dom_rank = [int(x) for x in dom]
        rank = perm.rank
        for u, v in seen:
            if state.in_mis[u]:
                insort(state.mis_nbr_ranks[v], rank[u])
            if state.in_mis[v]:
                insort(state.mis_nbr_ranks[u], rank[v])
            lvl = min(state._lvl_list[state.dom_rank[u]],
                      state._lvl_list[state.dom_rank[v]])
            state.adj[u][lvl + 1].add(v)
            state.adj[v][lvl + 1].add(u)
            state.edge_level[(u, v)] = lvl
        return state

    # -- basic queries -------------------------------------------------------

    def is_in_mis(self, v: int) -> bool:
        return self.in_mis[v]

    def mis_vertices(self) -> set[int]:
        return {v for v in range(self.n) if self.in_mis[v]}

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edge_level

    def edge_count(self) -> int:
        return len(self.edge_level)

    def vertex_level(self, v: int) -> int:
        """Largest level whose residual set still contains v (-1 if none)."""
        return self._lvl_list[self.dom_rank[v]]

    def neighbors_all(self, v: int) -> list[int]:
        return [w for slot in self.adj[v] for w in slot]

    def neighbors_in_level(self, v: int, k: int):
        """Neighbors of v inside residual level k (suffix scan of buckets).

        Precondition: v itself is in level k. Each yielded entry counts as
        one touched adjacency entry.
        """
        if self.debug_checks and self.dom_rank[v] <= (1 << k):
            raise StructuralIntegrityError(
                f"vertex {v} queried at level {k} but dom_rank={self.dom_rank[v]}"
            )
        slots = self.adj[v]
        for lvl in range(k, self.levels):
            for w in slots[lvl + 1]:
                self.touched += 1
                yield w

    def reset_touched(self) -> None:
        self.touched = 0

    # -- bucket maintenance ---------------------------------------------------

    def _move_entry(self, v: int, w: int, old_lvl: int, new_lvl: int) -> None:
        self.adj[v][old_lvl + 1].discard(w)
        self.adj[w][old_lvl + 1].discard(v)
        self.adj[v][new_lvl + 1].add(w)
        self.adj[w][new_lvl + 1].add(v)
        self.edge_level[(v, w) if v < w else (w, v)] = new_lvl

    def assign_dom_rank(self, v: int, new_dom: int) -> None:
        """Set v's domination rank and relocate incident entries that move."""
        old_dom = self.dom_rank[v]
        if new_dom == old_dom:
            return
        self.dom_rank[v] = new_dom
        g_old = self._lvl_list[old_dom]
        g_new = self._lvl_list[new_dom]
        if g_new == g_old:
            return
        slots = self.adj[v]
        if g_new < g_old:
            # every entry above the new vertex level sinks onto it
            for lvl in range(g_new + 1, g_old + 1):
                bucket = slots[lvl + 1]
                if not bucket:
                    continue
                for w in list(bucket):
                    self.touched += 1
                    self._move_entry(v, w, lvl, g_new)
        else:
            # only entries pinned at the old vertex level can rise
            for w in list(slots[g_old + 1]):
                self.touched += 1
                lw = self._lvl_list[self.dom_rank[w]]
                tgt = min(g_new, lw)
                if tgt != g_old:
                    self._move_entry(v, w, g_old, tgt)

    def _recomputed_dom(self, v: int) -> int:
        if self.in_mis[v]:
            return self.perm.rank[v]
        ranks = self.mis_nbr_ranks[v]
        return ranks[0] if ranks else self.inf_rank

    def _add_mis_rank(self, v: int, r: int) -> None:
        insort(self.mis_nbr_ranks[v], r)
        if not self.in_mis[v] and r < self.dom_rank[v]:
            self.assign_dom_rank(v, r)

    def _remove_mis_rank(self, v: int, r: int) -> None:
        ranks = self.mis_nbr_ranks[v]
        i = bisect_left(ranks, r)
        if i >= len(ranks) or ranks[i] != r:
            raise StructuralIntegrityError(
                f"rank {r} missing from member-neighbor set of {v}"
            )
        del ranks[i]
        if not self.in_mis[v] and self.dom_rank[v] == r:
            self.assign_dom_rank(v, ranks[0] if ranks else self.inf_rank)

    # -- raw edge operations ---------------------------------------------------

    def insert_edge_raw(self, u: int, v: int) -> int:
        """Add the edge, bucket it, and propagate member-neighbor bookkeeping.

        Membership flags are never touched; the edge lands at the level
        implied by current domination ranks and the non-member endpoint's
        rank list (and hence domination rank) absorbs a member endpoint.
        Returns the bucket level used.
        """
        if u == v:
            raise ValueError(f"self-loop at {u}")
        key = (u, v) if u < v else (v, u)
        if key in self.edge_level:
            raise ValueError(f"edge {key} already present")
        lvl = min(self._lvl_list[self.dom_rank[u]], self._lvl_list[self.dom_rank[v]])
        self.adj[u][lvl + 1].add(v)
        self.adj[v][lvl + 1].add(u)
        self.edge_level[key] = lvl
        self.touched += 1
        if self.in_mis[u]:
            self._add_mis_rank(v, self.perm.rank[u])
        if self.in_mis[v]:
            self._add_mis_rank(u, self.perm.rank[v])
        return self.edge_level[key]

    def delete_edge_raw(self, u: int, v: int) -> int:
        """Remove the edge and propagate member-neighbor bookkeeping."""
        if u == v:
            raise ValueError(f"self-loop at {u}")
        key = (u, v) if u < v else (v, u)
        lvl = self.edge_level.pop(key, None)
        if lvl is None:
            raise ValueError(f"edge {key} not present")
        self.adj[u][lvl + 1].discard(v)
        self.adj[v][lvl + 1].discard(u)
        self.touched += 1
        if self.in_mis[u]:
            self._remove_mis_rank(v, self.perm.rank[u])
        if self.in_mis[v]:
            self._remove_mis_rank(u, self.perm.rank[v])
        return lvl

    # -- membership flips --------------------------------------------------------

    def set_mis_status(self, v: int, status: bool, *,
                       strict: bool = True) -> list[tuple[int, int, int]]:
        """Flip v's membership and repair every neighbor's derived state.

        Returns (neighbor, old_dom, new_dom) for neighbors whose domination
        rank changed. With ``strict`` the flip refuses to create two
        adjacent members; the update pipeline disables that check because
        its ascending-rank repair order makes such states transient.
        """
        if self.in_mis[v] == status:
            return []
        if status and strict and self.mis_nbr_ranks[v]:
            raise StructuralIntegrityError(
                f"vertex {v} would join while adjacent to a member"
            )
        rv = self.perm.rank[v]
        nbrs = self.neighbors_all(v)
        self.in_mis[v] = status
        changed: list[tuple[int, int, int]] = []
        if status:
            for w in nbrs:
                old = self.dom_rank[w]
                self._add_mis_rank(w, rv)
                if self.dom_rank[w] != old:
                    changed.append((w, old, self.dom_rank[w]))
            self.assign_dom_rank(v, rv)
        else:
            for w in nbrs:
                old = self.dom_rank[w]
                self._remove_mis_rank(w, rv)
                if self.dom_rank[w] != old:
                    changed.append((w, old, self.dom_rank[w]))
            self.assign_dom_rank(v, self._recomputed_dom(v))
        return changed

    # -- verification ---------------------------------------------------------

    def validate_full(self, deep: bool = False) -> list[str]:
        """Check the whole structure against from-scratch recomputation.

        Returns a list of human-readable violations (empty when consistent).
        ``deep`` additionally cross-checks the rank lists, bucket sets and
        the per-level residual sets against the definitional oracle.
        """
        violations: list[str] = []
        n = self.n
        items = list(self.edge_level.items())
        us, vs = kernels.edge_arrays([k for k, _ in items])
        mis_ref = kernels.greedy_mis_csr(
            n, *kernels.build_csr(n, us, vs),
            np.asarray(self.perm.inv, dtype=np.int64),
        )
        mis_cur = np.asarray(self.in_mis, dtype=np.uint8)
        if not np.array_equal(mis_cur, mis_ref):
            bad = np.nonzero(mis_cur != mis_ref)[0]
            violations.append(f"membership differs from static greedy at {bad.tolist()}")
        dom_ref = kernels.dom_ranks(n, us, vs, self._rank_np, mis_ref, self.inf_rank)
        dom_cur = np.asarray(self.dom_rank, dtype=np.int64)
        if not np.array_equal(dom_cur, dom_ref):
            bad = np.nonzero(dom_cur != dom_ref)[0]
            violations.append(f"domination rank differs at {bad.tolist()}")
        if us.shape[0]:
            both = mis_cur[us].astype(bool) & mis_cur[vs].astype(bool)
            if both.any():
                e = int(np.nonzero(both)[0][0])
                violations.append(
                    f"independence violated by edge ({int(us[e])}, {int(vs[e])})"
                )
        non = ~mis_cur.astype(bool)
        if bool((dom_cur[non] >= self.inf_rank).any()):
            bad = np.nonzero(non & (dom_cur >= self.inf_rank))[0]
            violations.append(f"maximality violated at {bad.tolist()}")
        greedy_bad = non & (dom_cur >= self._rank_np)
        if bool(greedy_bad.any()):
            violations.append(
                f"greedy constraint violated at {np.nonzero(greedy_bad)[0].tolist()}"
            )
        if bool((dom_cur > self._rank_np).any()):
            bad = np.nonzero(dom_cur > self._rank_np)[0]
            violations.append(f"dom_rank above own rank at {bad.tolist()}")
        if items:
            stored = np.asarray([lvl for _, lvl in items], dtype=np.int64)
            expect = np.minimum(self._lvl_np[dom_cur[us]], self._lvl_np[dom_cur[vs]])
            if not np.array_equal(stored, expect):
                e = int(np.nonzero(stored != expect)[0][0])
                violations.append(
                    f"bucket level wrong for edge {items[e][0]}: "
                    f"stored {items[e][1]}, expected {int(expect[e])}"
                )
        if deep:
            violations.extend(self._validate_deep(mis_ref))
        return violations

    def _validate_deep(self, mis_ref: np.ndarray) -> list[str]:
        violations: list[str] = []
        rank = self.perm.rank
        ref_lists: list[list[int]] = [[] for _ in range(self.n)]
        for (u, v), lvl in self.edge_level.items():
            if mis_ref[u]:
                ref_lists[v].append(rank[u])
            if mis_ref[v]:
                ref_lists[u].append(rank[v])
            if v not in self.adj[u][lvl + 1] or u not in self.adj[v][lvl + 1]:
                violations.append(f"edge ({u}, {v}) missing from bucket {lvl}")
        for v in range(self.n):
            if sorted(ref_lists[v]) != self.mis_nbr_ranks[v]:
                violations.append(f"member-neighbor ranks wrong at {v}")
        total = sum(len(slot) for slots in self.adj for slot in slots)
        if total != 2 * len(self.edge_level):
            violations.append(
                f"bucket entry count {total} != twice edge count {len(self.edge_level)}"
            )
        g = _oracle.StaticGraph.from_edges(self.n, self.edge_level.keys())
        for i in range(self.levels):
            ref = _oracle.residual_vertices(g, self.perm, 1 << i)
            cur = {v for v in range(self.n) if self.dom_rank[v] > (1 << i)}
            if cur != ref:
                violations.append(f"residual set at level {i} differs: "
                                  f"extra {sorted(cur - ref)}, missing {sorted(ref - cur)}")
        return violations

    # -- serialization -------------------------------------------------------

    def snapshot_dump(self) -> str:
        """Deterministic text snapshot: header, sorted edges, per-vertex rows."""
        lines = [f"n {self.n}", f"seed {self.perm.seed}"]
        for u, v in sorted(self.edge_level):
            lines.append(f"{u} {v}")
        for v in range(self.n):
            lines.append(
                f"{v} {self.perm.rank[v]} {int(self.in_mis[v])} {self.dom_rank[v]}"
            )
        return "\n".join(lines) + "\n"
