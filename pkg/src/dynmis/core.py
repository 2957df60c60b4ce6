"""The update pipeline: easy-case dispatch, affected-set search, repair.

An edge update between endpoints of ranks r_u < r_v either leaves the
greedy MIS untouched (the easy cases, where only bucket bookkeeping moves)
or invalidates the lower-priority endpoint v. The hard path finds the set
of vertices whose membership can change by expanding a min-rank frontier,
reruns the greedy rule inside that set, and then repairs the residual
hierarchy in ascending rank order.
"""

from __future__ import annotations

import heapq
import time
from bisect import bisect_left
from dataclasses import dataclass, field

from .dyngraph import DynGraphState
from .errors import StructuralIntegrityError, VerificationError

EASY_NONE = "none"
EASY_I = "i"
EASY_II = "ii"
EASY_III = "iii"
HARD = "hard"


@dataclass
class ChangeSet:
    """Vertices that entered or left the MIS in one update."""

    entered: set[int] = field(default_factory=set)
    left: set[int] = field(default_factory=set)
    influenced: set[int] = field(default_factory=set)
    easy_case: str = EASY_NONE


@dataclass
class UpdateMetrics:
    """Per-update counters; elapsed_ns is the only non-deterministic field."""

    s_size: int = 0
    t0_size: int = 0
    t1_size: int = 0
    t1_moved: int = 0
    touched_adj: int = 0
    changes: int = 0
    easy_case: str = EASY_NONE
    level_a: int = -1
    level_b: int = -1
    elapsed_ns: int = 0


@dataclass
class InfluenceWorkspace:
    """Frontier state of the affected-set search.

    Extraction order is strictly increasing in rank; ``t0_log`` records
    every vertex that was ever enqueued.
    """

    heap: list[tuple[int, int]] = field(default_factory=list)
    found: set[int] = field(default_factory=set)
    t0_log: set[int] = field(default_factory=set)

    def push(self, rank: int, v: int) -> None:
        if v not in self.t0_log:
            self.t0_log.add(v)
            heapq.heappush(self.heap, (rank, v))

    def pop(self) -> tuple[int, int]:
        return heapq.heappop(self.heap)


def classify_update(state: DynGraphState, u: int, v: int, is_insert: bool) -> str:
    """Easy-case tag for an update between u and v with rank(u) < rank(v).

    Reads the pre-update state: the deletion tests consider u, still a
    neighbor of v, as one of v's smaller-rank member neighbors.
    """
    if not state.in_mis[u]:
        return EASY_I
    if is_insert:
        return HARD if state.in_mis[v] else EASY_III
    if state.in_mis[v]:
        raise StructuralIntegrityError(
            f"deleting edge ({u}, {v}) between two members"
        )
    preds = bisect_left(state.mis_nbr_ranks[v], state.perm.rank[v])
    return EASY_II if preds >= 2 else HARD


def find_influenced_set(state: DynGraphState, u: int, v: int,
                        b: int) -> tuple[set[int], set[int]]:
    """Expand from v to every vertex whose membership this update can change.

    Requires the raw edge change already applied and membership flags still
    pre-update. Member candidates spread through their own level's residual
    neighborhood toward larger ranks; non-member candidates are admitted
    once all their smaller-rank member neighbors inside level b are already
    admitted. Returns (affected set, set of all vertices ever enqueued).
    """
    perm = state.perm
    rank = perm.rank
    ws = InfluenceWorkspace()
    ws.push(rank[v], v)
    last_rank = 0
    while ws.heap:
        rz, z = ws.pop()
        if rz <= last_rank:
            raise StructuralIntegrityError("frontier ranks not increasing")
        last_rank = rz
        if state.in_mis[z]:
            # hard-case candidates all have rank >= rank(v) >= 2, so k >= 0
            k = perm.level_of(rz)
            if state.dom_rank[z] <= (1 << k):
                raise StructuralIntegrityError(
                    f"member {z} missing from its own level {k}"
                )
            ws.found.add(z)
            for w in state.neighbors_in_level(z, k):
                if rank[w] > rz:
                    ws.push(rank[w], w)
        else:
            admissible = True
            successors: list[tuple[int, int]] = []
            for w in state.neighbors_in_level(z, b):
                if not state.in_mis[w]:
                    continue
                rw = rank[w]
                if rw < rz:
                    if w not in ws.found:
                        admissible = False
                        break
                else:
                    successors.append((rw, w))
            if admissible:
                ws.found.add(z)
                for rw, w in successors:
                    ws.push(rw, w)
    return ws.found, ws.t0_log


def rebuild_mis_on_influenced(state: DynGraphState, affected: set[int], v: int,
                              is_insert: bool) -> ChangeSet:
    """Rerun the greedy rule inside the affected set and report the deltas.

    Decides only; membership flips are applied by :func:`fix_subgraphs`.
    For an insertion v is excluded (it is forced out by its new
    smaller-rank member neighbor); for a deletion v participates and, as
    the minimum rank present, always rejoins.
    """
    perm = state.perm
    target = [w for w in affected if w != v] if is_insert else list(affected)
    target.sort(key=lambda w: perm.rank[w])
    joined: list[int] = []
    entered: set[int] = set()
    left: set[int] = set()
    for w in target:
        blocked = False
        for x in joined:
            state.touched += 1
            if state.has_edge(w, x):
                blocked = True
                break
        was = state.in_mis[w]
        if not blocked:
            joined.append(w)
            if not was:
                entered.add(w)
                for r in state.mis_nbr_ranks[w]:
                    if perm.inv[r - 1] not in affected:
                        raise StructuralIntegrityError(
                            f"joining {w} conflicts with member outside the affected set"
                        )
        elif was:
            left.add(w)
    if is_insert:
        left.add(v)
    return ChangeSet(entered=entered, left=left, influenced=set(affected),
                     easy_case=EASY_NONE)


def fix_subgraphs(state: DynGraphState, changed: list[tuple[int, bool]],
                  b: int, snapshots: dict[int, list[int]] | None = None) -> \
        tuple[set[int], set[int]]:
    """Apply membership flips in ascending rank order and repair the levels.

    ``changed`` pairs each status-changing vertex with its new membership,
    sorted ascending by rank. Neighbor lists of every vertex that leaves
    are snapshotted at its own level before any flip, so later repairs
    cannot hide the neighborhood the leaver must fix; a caller that
    already adjusted a leaver's own level passes its earlier snapshot in.
    Returns (vertices whose membership was recomputed, subset that
    actually moved levels).
    """
    perm = state.perm
    lvl = state._lvl_list
    snapshots = dict(snapshots) if snapshots else {}
    for z, joins in changed:
        if not joins and z not in snapshots:
            k = perm.level_of(perm.rank[z])
            snapshots[z] = list(state.neighbors_in_level(z, k))
    examined: set[int] = set()
    moved: set[int] = set()
    for z, joins in changed:
        if joins:
            k = perm.level_of(perm.rank[z])
            scan = list(state.neighbors_in_level(z, k))
        else:
            scan = snapshots[z]
        deltas = state.set_mis_status(z, joins, strict=False)
        examined.update(scan)
        moved.update(w for w, old, new in deltas if lvl[old] != lvl[new])
    return examined, moved


def update(state: DynGraphState, u: int, v: int, is_insert: bool, *,
           verify: bool = False) -> tuple[ChangeSet, UpdateMetrics]:
    """Apply one edge insertion or deletion and restore all invariants.

    Returns the membership deltas and the per-update counters. With
    ``verify`` the full structure is validated against the from-scratch
    oracles afterwards (slow; meant for verification runs).
    """
    t_start = time.perf_counter_ns()
    perm = state.perm
    if u == v:
        raise ValueError(f"self-loop at {u}")
    if not (0 <= u < state.n and 0 <= v < state.n):
        raise ValueError(f"endpoints ({u}, {v}) out of range")
    if is_insert and state.has_edge(u, v):
        raise ValueError(f"edge ({u}, {v}) already present")
    if not is_insert and not state.has_edge(u, v):
        raise ValueError(f"edge ({u}, {v}) not present")
    if perm.rank[u] > perm.rank[v]:
        u, v = v, u
    a = perm.level_of(perm.rank[u])
    b = perm.level_of(perm.rank[v])
    state.reset_touched()
    tag = classify_update(state, u, v, is_insert)
    if is_insert:
        state.insert_edge_raw(u, v)
    else:
        state.delete_edge_raw(u, v)
    if tag != HARD:
        cs = ChangeSet(easy_case=tag)
        metrics = UpdateMetrics(easy_case=tag, level_a=a, level_b=b,
                                touched_adj=state.touched,
                                elapsed_ns=time.perf_counter_ns() - t_start)
        _post_verify(state, verify)
        return cs, metrics
    affected, enqueued = find_influenced_set(state, u, v, b)
    if min(enqueued, key=lambda w: perm.rank[w]) != v:
        raise StructuralIntegrityError("update endpoint is not the frontier minimum")
    snapshots: dict[int, list[int]] = {}
    if is_insert:
        # v is forced out; grab its pre-update level-b neighborhood before
        # its own membership adjustment relocates the entries
        snapshots[v] = list(state.neighbors_in_level(v, b))
        state.assign_dom_rank(v, min(state.dom_rank[v], perm.rank[u]))
    cs = rebuild_mis_on_influenced(state, affected, v, is_insert)
    changed = sorted(
        [(z, True) for z in cs.entered] + [(z, False) for z in cs.left],
        key=lambda t: perm.rank[t[0]],
    )
    examined, moved = fix_subgraphs(state, changed, b, snapshots)
    metrics = UpdateMetrics(
        s_size=len(affected),
        t0_size=len(enqueued),
        t1_size=len(examined),
        t1_moved=len(moved),
        touched_adj=state.touched,
        changes=len(cs.entered) + len(cs.left),
        easy_case=EASY_NONE,
        level_a=a,
        level_b=b,
        elapsed_ns=time.perf_counter_ns() - t_start,
    )
    _post_verify(state, verify)
    return cs, metrics


def _post_verify(state: DynGraphState, verify: bool) -> None:
    if not verify:
        return
    violations = state.validate_full()
    if violations:
        raise VerificationError(
            "post-update validation failed: " + "; ".join(violations),
            perm_seed=state.perm.seed,
            violations=violations,
        )
