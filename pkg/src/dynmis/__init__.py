"""Fully dynamic random-greedy maximal independent set.

Maintains the greedy MIS of a fixed vertex set under edge insertions and
deletions with respect to a seeded random vertex order, keeping a leveled
residual hierarchy so updates touch only polylogarithmically many
adjacency entries in expectation. Ships with brute-force oracles, a
verification harness for the probabilistic degree and affected-set size
claims, and a benchmarking CLI.
"""

from .core import ChangeSet, InfluenceWorkspace, UpdateMetrics, update
from .dyngraph import DynGraphState
from .errors import StructuralIntegrityError, TraceFormatError, VerificationError
from .harness import TraceEvent, gen_trace, load_trace, run_trace, save_trace
from .oracle import (
    StaticGraph,
    exhaustive_expected_S,
    greedy_mis,
    influenced_set_bruteforce,
    max_degree_induced,
    residual_vertices,
)
from .permutation import Permutation, level_of_rank

__version__ = "0.1.0"

__all__ = [
    "ChangeSet",
    "DynGraphState",
    "InfluenceWorkspace",
    "Permutation",
    "StaticGraph",
    "StructuralIntegrityError",
    "TraceEvent",
    "TraceFormatError",
    "UpdateMetrics",
    "VerificationError",
    "exhaustive_expected_S",
    "gen_trace",
    "greedy_mis",
    "influenced_set_bruteforce",
    "level_of_rank",
    "load_trace",
    "max_degree_induced",
    "residual_vertices",
    "run_trace",
    "save_trace",
    "update",
]
