"""Workload generation, instrumented trace replay, and statistical suites.

Traces are generated from a seed stream that never reads the maintained
structure, so the update sequence is fixed independently of the random
vertex order (the obliviousness contract). Replay applies events through
the update pipeline, emits one metrics row per event, and can cross-check
the structure and the affected-set search against the brute-force oracles
at a configurable cadence.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels, oracle
from .core import EASY_NONE, update
from .dyngraph import DynGraphState
from .errors import TraceFormatError, VerificationError
from .permutation import Permutation

log = logging.getLogger(__name__)

INSERT = "insert"
DELETE = "delete"
QUERY = "query"

METRICS_COLUMNS = [
    "event_index", "kind", "u", "v", "easy_case", "level_a", "level_b",
    "s_size", "t0_size", "t1_size", "touched_adj", "changes", "elapsed_ns",
]


@dataclass(frozen=True)
class TraceEvent:
    kind: str
    u: int
    v: int = -1


@dataclass
class MetricsRow:
    event_index: int
    kind: str
    u: int
    v: int
    easy_case: str
    level_a: int
    level_b: int
    s_size: int
    t0_size: int
    t1_size: int
    touched_adj: int
    changes: int
    elapsed_ns: int

    def as_list(self) -> list:
        return [getattr(self, c) for c in METRICS_COLUMNS]


@dataclass
class BadEventRecord:
    """One (seed, level) cell of the degree-reduction sweep."""

    seed_index: int
    level: int
    threshold_rank: int
    observed: int
    bound: float
    exceeded: bool


# ---------------------------------------------------------------------------
# Random graph sampling


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def decode_pair_indices(n: int, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices over the upper triangle to (u, v) with u < v."""
    t = idx.astype(np.int64)
    b = 2 * n - 1
    u = ((b - np.sqrt(b * b - 8.0 * t)) / 2).astype(np.int64)
    u = np.clip(u, 0, n - 2)
    # float guess can be off by one near row boundaries
    for _ in range(3):
        off = u * n - u * (u + 1) // 2
        too_high = off > t
        u = np.where(too_high, u - 1, u)
        off = u * n - u * (u + 1) // 2
        nxt = (u + 1) * n - (u + 1) * (u + 2) // 2
        too_low = (u < n - 2) & (nxt <= t)
        if not (too_high.any() or too_low.any()):
            break
        u = np.where(too_low, u + 1, u)
    off = u * n - u * (u + 1) // 2
    v = t - off + u + 1
    return u, v


def sample_exact_edges(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Draw m distinct edges uniformly from the n-vertex complete graph."""
    total = pair_count(n)
    if m > total:
        raise ValueError(f"cannot place {m} edges on {n} vertices")
    if m == 0:
        return []
    idx = rng.choice(total, size=m, replace=False)
    idx.sort()
    us, vs = decode_pair_indices(n, idx)
    return list(zip(us.tolist(), vs.tolist()))


def sample_gnp_edges(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Sample an Erdos-Renyi G(n, p) edge set."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    m = int(rng.binomial(pair_count(n), p))
    return sample_exact_edges(n, m, rng)


# ---------------------------------------------------------------------------
# Trace generation


class _EdgePool:
    """Edge set with O(1) uniform deletion and rejection-sampled insertion."""

    def __init__(self, n: int, initial: list[tuple[int, int]], rng: np.random.Generator):
        self.n = n
        self.rng = rng
        self.order: list[tuple[int, int]] = []
        self.index: dict[tuple[int, int], int] = {}
        for e in initial:
            self.add((min(e), max(e)))

    def __len__(self) -> int:
        return len(self.order)

    def add(self, key: tuple[int, int]) -> None:
        self.index[key] = len(self.order)
        self.order.append(key)

    def remove(self, key: tuple[int, int]) -> None:
        i = self.index.pop(key)
        last = self.order.pop()
        if i < len(self.order):
            self.order[i] = last
            self.index[last] = i

    def random_absent(self) -> tuple[int, int]:
        while True:
            u = int(self.rng.integers(0, self.n))
            v = int(self.rng.integers(0, self.n))
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            if key not in self.index:
                return key

    def random_present(self) -> tuple[int, int]:
        i = int(self.rng.integers(0, len(self.order)))
        return self.order[i]


def gen_trace(model: str, n: int, count: int, density: float = 0.1,
              seed: int = 0, window: int | None = None,
              initial_edges: list[tuple[int, int]] | None = None,
              target_edges: int | None = None,
              path: str | None = None) -> list[TraceEvent]:
    """Generate a deterministic event stream.

    uniform-mix keeps the live edge count at a target (insert when below,
    delete when above, fair coin at the target); sliding-window inserts a
    random stream and retires the oldest edge once the window is full;
    scripted loads an existing trace file. ``initial_edges`` seeds the
    simulated edge set so the stream stays legal against a prebuilt graph.
    """
    if n < 2:
        raise ValueError("n must be >= 2 to form edges")
    if count < 0:
        raise ValueError("count must be >= 0")
    if model == "scripted":
        if path is None:
            raise ValueError("scripted model needs a trace file path")
        file_n, events = load_trace(path)
        if file_n != n:
            raise ValueError(f"trace file is for n={file_n}, expected {n}")
        return events
    rng = np.random.default_rng(seed)
    total = pair_count(n)
    events: list[TraceEvent] = []
    if model == "uniform-mix":
        if target_edges is None:
            if not 0.0 < density < 1.0:
                raise ValueError(f"density {density} infeasible, need (0, 1)")
            target_edges = round(density * total)
        pool = _EdgePool(n, initial_edges or [], rng)
        for _ in range(count):
            live = len(pool)
            if live < target_edges:
                do_insert = True
            elif live > target_edges:
                do_insert = False
            else:
                do_insert = bool(rng.integers(0, 2))
            if do_insert and live == total:
                do_insert = False
            if not do_insert and live == 0:
                do_insert = True
            if do_insert:
                key = pool.random_absent()
                pool.add(key)
                events.append(TraceEvent(INSERT, key[0], key[1]))
            else:
                key = pool.random_present()
                pool.remove(key)
                events.append(TraceEvent(DELETE, key[0], key[1]))
        return events
    if model == "sliding-window":
        if window is None:
            if not 0.0 < density < 1.0:
                raise ValueError(f"density {density} infeasible, need (0, 1)")
            window = max(1, round(density * total))
        if window < 1:
            raise ValueError("window must be >= 1")
        window = min(window, total)
        pool = _EdgePool(n, initial_edges or [], rng)
        fifo: list[tuple[int, int]] = sorted(pool.index)
        head = 0
        for _ in range(count):
            if len(pool) < window:
                key = pool.random_absent()
                pool.add(key)
                fifo.append(key)
                events.append(TraceEvent(INSERT, key[0], key[1]))
            else:
                key = fifo[head]
                head += 1
                pool.remove(key)
                events.append(TraceEvent(DELETE, key[0], key[1]))
        return events
    raise ValueError(f"unknown trace model {model!r}")


# ---------------------------------------------------------------------------
# Trace file format


def serialize_trace(n: int, events: list[TraceEvent]) -> str:
    lines = [f"n {n}"]
    for e in events:
        if e.kind == INSERT:
            lines.append(f"+ {e.u} {e.v}")
        elif e.kind == DELETE:
            lines.append(f"- {e.u} {e.v}")
        elif e.kind == QUERY:
            lines.append(f"? {e.u}")
        else:
            raise ValueError(f"unknown event kind {e.kind!r}")
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> tuple[int, list[TraceEvent]]:
    n: int | None = None
    events: list[TraceEvent] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise TraceFormatError(f"expected header 'n <n>', got {line!r}", lineno)
            try:
                n = int(parts[1])
            except ValueError:
                raise TraceFormatError(f"bad vertex count {parts[1]!r}", lineno) from None
            if n < 1:
                raise TraceFormatError(f"vertex count must be >= 1, got {n}", lineno)
            continue
        op = parts[0]
        try:
            if op in ("+", "-"):
                if len(parts) != 3:
                    raise TraceFormatError(f"expected '{op} u v'", lineno)
                u, v = int(parts[1]), int(parts[2])
                kind = INSERT if op == "+" else DELETE
                ev = TraceEvent(kind, u, v)
            elif op == "?":
                if len(parts) != 2:
                    raise TraceFormatError("expected '? v'", lineno)
                ev = TraceEvent(QUERY, int(parts[1]))
            else:
                raise TraceFormatError(f"unknown operation {op!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, TraceFormatError):
                raise
            raise TraceFormatError(f"bad vertex id in {line!r}", lineno) from None
        for x in (ev.u, ev.v) if ev.kind != QUERY else (ev.u,):
            if not 0 <= x < n:
                raise TraceFormatError(f"vertex {x} outside [0, {n})", lineno)
        events.append(ev)
    if n is None:
        raise TraceFormatError("empty trace: missing 'n <n>' header", 1)
    return n, events


def save_trace(path: str, n: int, events: list[TraceEvent]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize_trace(n, events))


def load_trace(path: str) -> tuple[int, list[TraceEvent]]:
    with open(path, "r", encoding="ascii") as fh:
        return parse_trace(fh.read())


def write_metrics_csv(fh, rows: list[MetricsRow]) -> None:
    writer = csv.writer(fh)
    writer.writerow(METRICS_COLUMNS)
    for row in rows:
        writer.writerow(row.as_list())


# ---------------------------------------------------------------------------
# Trace replay


def run_trace(state: DynGraphState, trace: list[TraceEvent], check_every: int = 0,
              *, oracle_influence: bool = True, skip_illegal: bool = False,
              trace_seed: int | None = None) -> list[MetricsRow]:
    """Apply a trace through the update pipeline, one metrics row per event.

    With ``check_every`` > 0, every check_every-th event is followed by a
    full structure validation and (for edge events) a comparison of the
    affected set against the definitional brute-force recurrence; any
    disagreement raises :class:`VerificationError` carrying the event
    index. Illegal events raise ``ValueError`` unless ``skip_illegal``.
    """
    rows: list[MetricsRow] = []
    perm = state.perm
    for i, ev in enumerate(trace):
        check = check_every > 0 and (i + 1) % check_every == 0
        if ev.kind == QUERY:
            t0 = time.perf_counter_ns()
            state.is_in_mis(ev.u)
            lvl = perm.level_of(perm.rank[ev.u])
            rows.append(MetricsRow(i, QUERY, ev.u, -1, EASY_NONE, lvl, lvl,
                                   0, 0, 0, 0, 0, time.perf_counter_ns() - t0))
            continue
        is_insert = ev.kind == INSERT
        mis_before = state.mis_vertices() if check else None
        try:
            cs, m = update(state, ev.u, ev.v, is_insert)
        except ValueError as exc:
            if skip_illegal:
                log.warning("skipping illegal event %d (%s %d %d): %s",
                            i, ev.kind, ev.u, ev.v, exc)
                continue
            raise ValueError(f"event {i}: {exc}") from exc
        rows.append(MetricsRow(i, ev.kind, ev.u, ev.v, m.easy_case,
                               m.level_a, m.level_b, m.s_size, m.t0_size,
                               m.t1_size, m.touched_adj, m.changes, m.elapsed_ns))
        if check:
            _check_event(state, mis_before, ev.u, ev.v, cs, i, trace_seed,
                         oracle_influence)
    return rows


def _check_event(state: DynGraphState, mis_before: set[int], u: int, v: int,
                 cs, index: int, trace_seed: int | None,
                 oracle_influence: bool) -> None:
    violations = state.validate_full()
    if violations:
        raise VerificationError(
            f"event {index}: structure validation failed: " + "; ".join(violations),
            perm_seed=state.perm.seed, trace_seed=trace_seed,
            event_index=index, violations=violations,
        )
    if not oracle_influence:
        return
    perm = state.perm
    if perm.rank[u] > perm.rank[v]:
        u, v = v, u
    g_after = oracle.StaticGraph.from_edges(state.n, state.edge_level.keys())
    brute = oracle.influenced_set_bruteforce(g_after, perm, mis_before, u, v)
    if cs.easy_case != EASY_NONE:
        if brute:
            raise VerificationError(
                f"event {index}: easy case {cs.easy_case} but oracle set {sorted(brute)}",
                perm_seed=perm.seed, trace_seed=trace_seed, event_index=index,
            )
    elif brute != cs.influenced:
        raise VerificationError(
            f"event {index}: affected set {sorted(cs.influenced)} != "
            f"oracle {sorted(brute)}",
            perm_seed=perm.seed, trace_seed=trace_seed, event_index=index,
        )


# ---------------------------------------------------------------------------
# Degree-reduction sweep


def degree_reduction_suite(n: int, p: float, seeds: int, c: float = 8.0,
                           perm_seed_base: int = 10_000,
                           graph_seed_base: int = 50_000) -> list[BadEventRecord]:
    """Measure residual max degrees against c * n * ln(n) / k per level.

    For each seed: sample G(n, p), draw a fresh order, and for every level
    index i compute the maximum degree induced by the vertices whose
    domination rank exceeds 2**i.
    """
    if n < 16:
        raise ValueError("degree sweep needs n >= 16")
    if c <= 0:
        raise ValueError("threshold constant c must be positive")
    records: list[BadEventRecord] = []
    levels = (n - 1).bit_length()
    for s in range(seeds):
        rng = np.random.default_rng(graph_seed_base + s)
        edges = sample_gnp_edges(n, p, rng)
        perm = Permutation.generate(n, perm_seed_base + s)
        us, vs = kernels.edge_arrays(edges)
        rank = perm.rank_array()
        mis = kernels.greedy_mis_csr(
            n, *kernels.build_csr(n, us, vs), np.asarray(perm.inv, dtype=np.int64)
        )
        dom = kernels.dom_ranks(n, us, vs, rank, mis, n + 1)
        for i in range(levels):
            k = 1 << i
            keep = dom > k
            observed = int(kernels.max_degree_masked(n, us, vs, keep))
            bound = c * n * math.log(n) / k
            records.append(BadEventRecord(
                seed_index=s, level=i, threshold_rank=k,
                observed=observed, bound=bound, exceeded=observed > bound,
            ))
    return records


def exceedance_by_level(records: list[BadEventRecord]) -> dict[int, tuple[int, int]]:
    """Per level: (number of seeds exceeding the bound, total seeds)."""
    out: dict[int, list[int]] = {}
    for r in records:
        cell = out.setdefault(r.level, [0, 0])
        cell[0] += int(r.exceeded)
        cell[1] += 1
    return {lvl: (bad, tot) for lvl, (bad, tot) in sorted(out.items())}


# ---------------------------------------------------------------------------
# Expected affected-set size suites


@dataclass
class ExhaustiveCheck:
    graph_name: str
    n: int
    kind: str
    u: int
    v: int
    conditions: int
    worst_margin: float  # max over conditions of E / bound; < 1 means all strict
    ok: bool


def _catalog_graphs(n: int) -> list[tuple[str, oracle.StaticGraph]]:
    rng = np.random.default_rng(900 + n)
    path = [(i, i + 1) for i in range(n - 1)]
    cycle = path + [(n - 1, 0)]
    complete = [(i, j) for i in range(n) for j in range(i + 1, n)]
    star = [(0, i) for i in range(1, n)]
    rand1 = sample_gnp_edges(n, 0.45, rng)
    rand2 = sample_gnp_edges(n, 0.3, rng)
    return [
        ("edgeless", oracle.StaticGraph.from_edges(n, [])),
        ("path", oracle.StaticGraph.from_edges(n, path)),
        ("cycle", oracle.StaticGraph.from_edges(n, cycle)),
        ("complete", oracle.StaticGraph.from_edges(n, complete)),
        ("star", oracle.StaticGraph.from_edges(n, star)),
        ("random-a", oracle.StaticGraph.from_edges(n, rand1)),
        ("random-b", oracle.StaticGraph.from_edges(n, rand2)),
    ]


def _catalog_instances(g: oracle.StaticGraph) -> list[tuple[str, int, int]]:
    """One insertion (first absent pair) and one deletion (first present)."""
    out: list[tuple[str, int, int]] = []
    absent = next(((u, v) for u in range(g.n) for v in range(u + 1, g.n)
                   if not g.has_edge(u, v)), None)
    if absent:
        out.append((INSERT, *absent))
    if g.edges:
        out.append((DELETE, *min(g.edges)))
    return out


def exhaustive_condition_suite(sizes: tuple[int, ...] = (5, 6, 7)) -> list[ExhaustiveCheck]:
    """Exact conditional expectations versus their strict bounds.

    For every catalog graph and update instance, enumerates all n!
    permutations once and then checks every satisfiable rank condition:
    fixing rank(u) and a rank window for v must keep E[|S|] strictly below
    n/(B-A); a shared window for both endpoints strictly below 2n/(B-A).
    """
    checks: list[ExhaustiveCheck] = []
    for n in sizes:
        for name, g in _catalog_graphs(n):
            for kind, u, v in _catalog_instances(g):
                census = oracle.influence_rank_census(g, u, v, kind == INSERT)
                worst = 0.0
                count = 0
                ok = True
                for a in range(1, n):
                    for b_hi in range(a + 1, n + 1):
                        for c in range(1, a + 1):
                            e = census.expectation(
                                [(c, j) for j in range(a + 1, b_hi + 1)])
                            margin = e * (b_hi - a) / n
                            count += 1
                            worst = max(worst, float(margin))
                            ok = ok and margin < 1
                        if b_hi - a >= 2:
                            cells = [(i, j) for i in range(a + 1, b_hi + 1)
                                     for j in range(i + 1, b_hi + 1)]
                            e = census.expectation(cells)
                            margin = e * (b_hi - a) / (2 * n)
                            count += 1
                            worst = max(worst, float(margin))
                            ok = ok and margin < 1
                checks.append(ExhaustiveCheck(name, n, kind, u, v, count, worst, ok))
    return checks


@dataclass
class MonteCarloCell:
    n: int
    level_b: int
    samples: int
    mean_size: float
    scale: float  # n / 2**b
    ratio: float


def conditional_size_montecarlo(ns: tuple[int, ...] = (64, 128), seeds: int = 5,
                                events: int = 400, density: float = 0.1,
                                perm_seed_base: int = 3_000,
                                trace_seed_base: int = 7_000) -> list[MonteCarloCell]:
    """Sampled mean affected-set size per endpoint level, with its n/2**b scale."""
    cells: dict[tuple[int, int], list[int]] = {}
    for n in ns:
        for s in range(seeds):
            rng = np.random.default_rng(trace_seed_base + s)
            initial = sample_gnp_edges(n, density, rng)
            perm = Permutation.generate(n, perm_seed_base + s)
            state = DynGraphState.build(perm, initial)
            trace = gen_trace("uniform-mix", n, events, density=density,
                              seed=trace_seed_base + 500 + s, initial_edges=initial)
            for row in run_trace(state, trace, check_every=0):
                if row.easy_case == EASY_NONE and row.kind != QUERY:
                    cells.setdefault((n, row.level_b), []).append(row.s_size)
    out = []
    for (n, b), sizes in sorted(cells.items()):
        mean = float(np.mean(sizes))
        scale = n / (1 << b)
        out.append(MonteCarloCell(n, b, len(sizes), mean, scale, mean / scale))
    return out


# ---------------------------------------------------------------------------
# Scaling sweep


@dataclass
class ScalingCell:
    n: int
    seeds: int
    events: int
    mean_touched: float
    p99_touched: float
    mean_work_bound: float
    p99_work_bound: float
    mean_changes: float
    hard_fraction: float


@dataclass
class ScalingReport:
    cells: list[ScalingCell]
    ratios: list[dict[str, float]] = field(default_factory=list)

    def format_text(self) -> str:
        out = io.StringIO()
        out.write("n        mean_touched  p99_touched  mean_work  p99_work  "
                  "mean_changes  hard_frac\n")
        for c in self.cells:
            out.write(f"{c.n:<8d} {c.mean_touched:>12.2f} {c.p99_touched:>12.1f} "
                      f"{c.mean_work_bound:>9.1f} {c.p99_work_bound:>9.1f} "
                      f"{c.mean_changes:>13.3f} {c.hard_fraction:>9.4f}\n")
        for r in self.ratios:
            out.write(f"ratio {r['n_from']} -> {r['n_to']}: "
                      f"touched x{r['touched']:.2f}, work x{r['work']:.2f}, "
                      f"changes x{r['changes']:.2f}\n")
        return out.getvalue()


def _level_max_degrees(state: DynGraphState) -> list[int]:
    us, vs = kernels.edge_arrays(state.edge_level.keys())
    dom = np.asarray(state.dom_rank, dtype=np.int64)
    return [
        int(kernels.max_degree_masked(state.n, us, vs, dom > (1 << i)))
        for i in range(state.levels)
    ]


def scaling_suite(n_list: list[int], updates_per_n: int, seeds: int,
                  avg_degree: int = 16, degree_refresh: int = 250,
                  perm_seed_base: int = 21_000,
                  trace_seed_base: int = 42_000) -> ScalingReport:
    """Growth of per-update work across sizes, verification disabled.

    The workload keeps a constant average degree so the trend isolates
    size effects. The combinatorial work bound per update multiplies the
    event level's residual max degree (refreshed every ``degree_refresh``
    events; an exact per-event recompute would dwarf the measured work) by
    the number of frontier plus repaired vertices.
    """
    for n in n_list:
        if n & (n - 1):
            raise ValueError(f"n_list entries must be powers of two, got {n}")
    cells: list[ScalingCell] = []
    for n in n_list:
        target = min(avg_degree * n // 2, pair_count(n))
        touched: list[int] = []
        work: list[int] = []
        changes: list[int] = []
        hard = 0
        total = 0
        for s in range(seeds):
            rng = np.random.default_rng(trace_seed_base + s)
            initial = sample_exact_edges(n, target, rng)
            perm = Permutation.generate(n, perm_seed_base + s)
            state = DynGraphState.build(perm, initial)
            trace = gen_trace("uniform-mix", n, updates_per_n,
                              seed=trace_seed_base + 1000 + s,
                              initial_edges=initial, target_edges=target)
            deltas = _level_max_degrees(state)
            for i, ev in enumerate(trace):
                if i and i % degree_refresh == 0:
                    deltas = _level_max_degrees(state)
                _, m = update(state, ev.u, ev.v, ev.kind == INSERT)
                touched.append(m.touched_adj)
                changes.append(m.changes)
                work.append(deltas[m.level_b] * (m.t0_size + m.t1_size)
                            if m.level_b >= 0 else 0)
                if m.easy_case == EASY_NONE:
                    hard += 1
                total += 1
        cells.append(ScalingCell(
            n=n, seeds=seeds, events=total,
            mean_touched=float(np.mean(touched)),
            p99_touched=float(np.percentile(touched, 99)),
            mean_work_bound=float(np.mean(work)),
            p99_work_bound=float(np.percentile(work, 99)),
            mean_changes=float(np.mean(changes)),
            hard_fraction=hard / total if total else 0.0,
        ))
    ratios = []
    for prev, cur in zip(cells, cells[1:]):
        ratios.append({
            "n_from": prev.n, "n_to": cur.n,
            "touched": cur.mean_touched / prev.mean_touched if prev.mean_touched else 0.0,
            "work": cur.mean_work_bound / prev.mean_work_bound if prev.mean_work_bound else 0.0,
            "changes": cur.mean_changes / prev.mean_changes if prev.mean_changes else 0.0,
        })
    return ScalingReport(cells=cells, ratios=ratios)
