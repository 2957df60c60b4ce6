"""Command-line frontend: trace generation, replay, verification, benchmarks.

Exit codes are a stable contract for CI: 0 success, 1 usage or parse
error, 2 I/O failure, 3 verification failure. All randomness flows from
the two seed flags; there are no hidden entropy sources.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import harness, kernels, oracle
from .dyngraph import DynGraphState
from .errors import TraceFormatError, VerificationError
from .harness import (
    degree_reduction_suite,
    exceedance_by_level,
    exhaustive_condition_suite,
    gen_trace,
    load_trace,
    run_trace,
    sample_gnp_edges,
    scaling_suite,
    serialize_trace,
    write_metrics_csv,
)
from .permutation import Permutation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VERIFY = 3


@dataclass
class RunConfig:
    n: int
    perm_seed: int
    trace_seed: int
    verify: bool
    check_every: int
    metrics_path: str | None
    dump_path: str | None


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we pin 1
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dynmis", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a trace file", parents=[])
    p.add_argument("--model", default="uniform-mix",
                   choices=["uniform-mix", "sliding-window", "scripted"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--density", type=float, default=0.1)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--trace-seed", "--seed", dest="trace_seed", type=int, default=0)
    p.add_argument("--in", dest="source", default=None,
                   help="source trace for the scripted model")
    p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("run", help="replay a trace and emit metrics")
    p.add_argument("trace", help="trace file path")
    p.add_argument("--n", type=int, default=None,
                   help="expected vertex count (checked against the header)")
    p.add_argument("--perm-seed", type=int, default=0)
    p.add_argument("--trace-seed", type=int, default=None,
                   help="recorded in failure bundles only")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--check-every", type=int, default=1)
    p.add_argument("--metrics", default=None, help="metrics CSV path (default stdout)")
    p.add_argument("--dump", default=None, help="final snapshot path (default stdout)")

    p = sub.add_parser("verify", help="run an oracle verification suite")
    p.add_argument("suite", choices=["structure", "influenced", "exhaustive", "degree"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--events", type=int, default=2000)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--c", type=float, default=8.0)
    p.add_argument("--check-every", type=int, default=1)
    p.add_argument("--perm-seed", type=int, default=1000)
    p.add_argument("--trace-seed", type=int, default=2000)

    p = sub.add_parser("bench", help="scaling sweep with verification disabled")
    p.add_argument("--n-list", default="1024,4096,16384",
                   help="comma-separated powers of two")
    p.add_argument("--count", type=int, default=2000, help="updates per size")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--avg-degree", type=int, default=16)
    p.add_argument("--perm-seed", type=int, default=21000)
    p.add_argument("--trace-seed", type=int, default=42000)
    p.add_argument("--metrics", default=None, help="per-size CSV output path")

    p = sub.add_parser("bench-kernels",
                       help="time the compiled kernels against the fallback path")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--density", type=float, default=0.01)
    p.add_argument("--repeat", type=int, default=5)
    return parser


def cmd_gen(args) -> int:
    try:
        events = gen_trace(args.model, args.n, args.count, density=args.density,
                           seed=args.trace_seed, window=args.window,
                           path=args.source)
    except ValueError as exc:
        print(f"dynmis gen: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = serialize_trace(args.n, events)
    try:
        if args.out:
            with open(args.out, "w", encoding="ascii") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"dynmis gen: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"trace seed: {args.trace_seed}", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        n, events = load_trace(args.trace)
    except OSError as exc:
        print(f"dynmis run: cannot read {args.trace}: {exc}", file=sys.stderr)
        return EXIT_IO
    except TraceFormatError as exc:
        print(f"dynmis run: {args.trace}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.n is not None and args.n != n:
        print(f"dynmis run: trace header n={n} does not match --n {args.n}",
              file=sys.stderr)
        return EXIT_USAGE
    cfg = RunConfig(n=n, perm_seed=args.perm_seed,
                    trace_seed=args.trace_seed if args.trace_seed is not None else -1,
                    verify=args.verify, check_every=args.check_every,
                    metrics_path=args.metrics, dump_path=args.dump)
    if cfg.verify and cfg.check_every < 1:
        print("dynmis run: --check-every must be >= 1 when verifying",
              file=sys.stderr)
        return EXIT_USAGE
    perm = Permutation.generate(n, cfg.perm_seed)
    state = DynGraphState.build(perm, [])
    check = cfg.check_every if cfg.verify else 0
    try:
        rows = run_trace(state, events, check_every=check,
                         trace_seed=args.trace_seed)
    except VerificationError as exc:
        bundle = args.trace + ".repro"
        try:
            with open(bundle, "w", encoding="ascii") as fh:
                fh.write(f"# perm seed {cfg.perm_seed}\n")
                if args.trace_seed is not None:
                    fh.write(f"# trace seed {args.trace_seed}\n")
                upto = exc.event_index + 1 if exc.event_index is not None else len(events)
                fh.write(serialize_trace(n, events[:upto]))
        except OSError:
            bundle = "(bundle write failed)"
        print(f"dynmis run: verification failed: {exc}", file=sys.stderr)
        print(f"reproduction bundle: {bundle}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as exc:
        print(f"dynmis run: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if cfg.metrics_path:
            with open(cfg.metrics_path, "w", encoding="ascii", newline="") as fh:
                write_metrics_csv(fh, rows)
        else:
            write_metrics_csv(sys.stdout, rows)
        dump = state.snapshot_dump()
        if cfg.dump_path:
            with open(cfg.dump_path, "w", encoding="ascii") as fh:
                fh.write(dump)
        else:
            sys.stdout.write(dump)
    except OSError as exc:
        print(f"dynmis run: output failed: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _verify_replay(args, n: int, density: float, oracle_influence: bool) -> int:
    failures = 0
    for s in range(args.seeds):
        perm_seed = args.perm_seed + s
        trace_seed = args.trace_seed + s
        rng = np.random.default_rng(trace_seed)
        initial = sample_gnp_edges(n, density, rng)
        perm = Permutation.generate(n, perm_seed)
        state = DynGraphState.build(perm, initial)
        trace = gen_trace("uniform-mix", n, args.events, density=density,
                          seed=trace_seed + 100000, initial_edges=initial)
        try:
            run_trace(state, trace, check_every=args.check_every,
                      oracle_influence=oracle_influence, trace_seed=trace_seed)
            print(f"seed pair ({perm_seed}, {trace_seed}): ok "
                  f"({len(trace)} events)")
        except VerificationError as exc:
            failures += 1
            print(f"seed pair ({perm_seed}, {trace_seed}): FAIL: {exc}")
    print(f"{args.seeds - failures}/{args.seeds} seed pairs clean")
    return EXIT_VERIFY if failures else EXIT_OK


def cmd_verify(args) -> int:
    if args.suite == "structure":
        n = args.n if args.n is not None else 128
        density = args.density if args.density is not None else 0.1
        return _verify_replay(args, n, density, oracle_influence=False)
    if args.suite == "influenced":
        n = args.n if args.n is not None else 24
        density = args.density if args.density is not None else 0.2
        return _verify_replay(args, n, density, oracle_influence=True)
    if args.suite == "exhaustive":
        checks = exhaustive_condition_suite()
        bad = 0
        for c in checks:
            status = "ok" if c.ok else "FAIL"
            print(f"{status} {c.graph_name} n={c.n} {c.kind} ({c.u},{c.v}): "
                  f"{c.conditions} conditions, worst margin {c.worst_margin:.4f}")
            bad += 0 if c.ok else 1
        print(f"{len(checks) - bad}/{len(checks)} instances within strict bounds")
        return EXIT_VERIFY if bad else EXIT_OK
    # degree
    n = args.n if args.n is not None else 4096
    density = args.density if args.density is not None else 0.01
    records = degree_reduction_suite(n, density, args.seeds, c=args.c)
    table = exceedance_by_level(records)
    bad = 0
    for lvl, (exceed, total) in table.items():
        k = 1 << lvl
        flag = ""
        if k >= 16 and exceed > 0.05 * total:
            flag = "  <-- above 5% exceedance"
            bad += 1
        print(f"level {lvl:2d} (rank threshold {k:5d}): "
              f"{exceed}/{total} seeds exceeded{flag}")
    return EXIT_VERIFY if bad else EXIT_OK


def cmd_bench(args) -> int:
    try:
        n_list = [int(x) for x in args.n_list.split(",") if x]
    except ValueError:
        print(f"dynmis bench: bad --n-list {args.n_list!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = scaling_suite(n_list, args.count, args.seeds,
                               avg_degree=args.avg_degree,
                               perm_seed_base=args.perm_seed,
                               trace_seed_base=args.trace_seed)
    except ValueError as exc:
        print(f"dynmis bench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(report.format_text())
    if args.metrics:
        import csv as _csv

        try:
            with open(args.metrics, "w", encoding="ascii", newline="") as fh:
                w = _csv.writer(fh)
                w.writerow(["n", "seeds", "events", "mean_touched", "p99_touched",
                            "mean_work_bound", "p99_work_bound", "mean_changes",
                            "hard_fraction"])
                for c in report.cells:
                    w.writerow([c.n, c.seeds, c.events, c.mean_touched,
                                c.p99_touched, c.mean_work_bound,
                                c.p99_work_bound, c.mean_changes, c.hard_fraction])
        except OSError as exc:
            print(f"dynmis bench: cannot write {args.metrics}: {exc}",
                  file=sys.stderr)
            return EXIT_IO
    return EXIT_OK


def _time_call(fn, *fn_args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*fn_args)
        best = min(best, time.perf_counter() - t0)
    return best


def cmd_bench_kernels(args) -> int:
    n = args.n
    rng = np.random.default_rng(7)
    edges = sample_gnp_edges(n, args.density, rng)
    us, vs = kernels.edge_arrays(edges)
    perm = Permutation.generate(n, 7)
    order = np.asarray(perm.inv, dtype=np.int64)
    rank = perm.rank_array()
    print(f"active backend: {kernels.backend_name()} "
          f"(numba available: {kernels.HAS_NUMBA})")
    print(f"n={n}, edges={len(edges)}, repeat={args.repeat}")
    cases = []
    indptr, indices = kernels.ACTIVE_KERNELS["build_csr"](n, us, vs)
    mis = kernels.ACTIVE_KERNELS["greedy_mis_csr"](n, indptr, indices, order)
    dom = kernels.ACTIVE_KERNELS["dom_ranks"](n, us, vs, rank, mis, n + 1)
    keep = dom > 16
    cases.append(("build_csr", (n, us, vs)))
    cases.append(("greedy_mis_csr", (n, indptr, indices, order)))
    cases.append(("dom_ranks", (n, us, vs, rank, mis, n + 1)))
    cases.append(("max_degree_masked", (n, us, vs, keep)))
    g7 = oracle.StaticGraph.from_edges(7, [(i, i + 1) for i in range(6)])
    cases.append(("influence_census", (7, g7.adjacency_masks(), 0, 6, True)))
    print(f"{'kernel':<20} {'active (s)':>12} {'fallback (s)':>12} {'speedup':>9}")
    for name, call_args in cases:
        active = kernels.ACTIVE_KERNELS[name]
        fallback = kernels.PY_KERNELS[name]
        active(*call_args)  # warm the JIT outside the timed region
        t_active = _time_call(active, *call_args, repeat=args.repeat)
        t_fallback = _time_call(fallback, *call_args, repeat=args.repeat)
        speedup = t_fallback / t_active if t_active > 0 else float("inf")
        print(f"{name:<20} {t_active:>12.6f} {t_fallback:>12.6f} {speedup:>8.1f}x")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handlers = {
        "gen": cmd_gen,
        "run": cmd_run,
        "verify": cmd_verify,
        "bench": cmd_bench,
        "bench-kernels": cmd_bench_kernels,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
