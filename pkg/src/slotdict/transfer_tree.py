"""Tree over meta-operations and the two per-node probe tallies.

A level-l node covers ``widths[l]`` consecutive leaves (one leaf per
meta-operation). ``cost(u)`` counts touches whose previous touch of the same
address falls in a different child of ``u`` (u is their lowest common
ancestor); ``probe(u)`` counts all touches inside u's interval.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .mathkit import iter_log, log_star

Node = tuple[int, int]  # (level, index)


class TreeSpecError(ValueError):
    pass


@dataclass(frozen=True)
class TreeSpec:
    n_leaves: int
    widths: tuple[int, ...]  # widths[0] == 1, widths[h] == n_leaves
    k: int = 0
    c: float = 1.0
    fallback: bool = False

    def __post_init__(self):
        w = self.widths
        if not w or w[0] != 1 or w[-1] != self.n_leaves:
            raise TreeSpecError(f"widths must run from 1 to {self.n_leaves}, got {w}")
        for l in range(1, len(w)):
            if w[l] <= w[l - 1] or w[l] % w[l - 1]:
                raise TreeSpecError(f"level {l}: width {w[l]} is not a proper multiple of {w[l - 1]}")

    @property
    def height(self) -> int:
        return len(self.widths) - 1

    @property
    def branchings(self) -> tuple[int, ...]:
        return tuple(self.widths[l] // self.widths[l - 1] for l in range(1, len(self.widths)))

    def nodes_at(self, level: int) -> int:
        return self.n_leaves // self.widths[level]

    def interval(self, node: Node) -> tuple[int, int]:
        level, idx = node
        w = self.widths[level]
        return idx * w, (idx + 1) * w

    def lca(self, t1: int, t2: int) -> Node:
        for level, w in enumerate(self.widths):
            if t1 // w == t2 // w:
                return level, t1 // w
        raise AssertionError("root covers every leaf")


def build_uniform_spec(n: int, branching: int) -> TreeSpec:
    """Constant-branching tree; ``n`` must be a power of ``branching``.

    Also the stand-in for the fixed-branching tree of the sublinear-redundancy
    analysis, at a desk-scale branching factor.
    """
    if branching < 2:
        raise TreeSpecError("branching must be at least 2")
    widths = [1]
    while widths[-1] < n:
        widths.append(widths[-1] * branching)
    if widths[-1] != n:
        raise TreeSpecError(f"{n} is not a power of {branching}")
    return TreeSpec(n, tuple(widths), fallback=True)


def _largest_divisor_at_most(m: int, bound: float) -> int:
    best = 1
    for d in range(1, math.isqrt(m) + 1):
        if m % d == 0:
            for q in (d, m // d):
                if best < q <= bound:
                    best = q
    return best


def build_spec(n: int, k: int, c: float = 1.0) -> TreeSpec:
    """Widths ``c * n * log^(k) n / log^(l) n`` rounded down onto a divisor chain of n.

    Height is the first level whose iterated log drops to ``c * log^(k) n``. When
    rounding collapses a level and n is a power of two, a binary tree is used.
    """
    if n < 2:
        raise TreeSpecError("need at least 2 leaves")
    if not 1 <= k <= log_star(n):
        raise TreeSpecError(f"k must lie in [1, log*({n}) = {log_star(n)}], got {k}")
    if c <= 0:
        raise TreeSpecError("c must be positive")
    target = c * iter_log(n, k)
    h = next(l for l in range(0, log_star(n) + 2) if iter_log(n, l) <= target)
    if h == 0:
        raise TreeSpecError(f"height is 0: n = {n} <= c * log^({k}) n = {target:.4g}; lower c")
    widths = [0] * (h + 1)
    widths[0], widths[h] = 1, n
    for l in range(h - 1, 0, -1):
        widths[l] = _largest_divisor_at_most(widths[l + 1], c * n * iter_log(n, k) / iter_log(n, l))
    bad = next((l for l in range(1, h + 1) if widths[l] <= widths[l - 1]), None)
    if bad is not None:
        if n & (n - 1) == 0:
            return build_uniform_spec(n, 2)
        raise TreeSpecError(f"level {bad}: width {widths[bad]} does not exceed level {bad - 1} "
                            f"width {widths[bad - 1]} after rounding {widths}")
    return TreeSpec(n, tuple(widths), k=k, c=c)


def _as_arrays(trace: Iterable, spec: TreeSpec) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(trace, "times") and hasattr(trace, "addrs"):
        t = np.frombuffer(trace.times, dtype=np.int64) if len(trace.times) else np.zeros(0, np.int64)
        a = np.frombuffer(trace.addrs, dtype=np.int64) if len(trace.addrs) else np.zeros(0, np.int64)
    else:
        rows = [(r[0], r[1]) for r in trace]
        arr = np.asarray(rows, dtype=np.int64).reshape(-1, 2)
        t, a = arr[:, 0], arr[:, 1]
    if t.size and (t.min() < 0 or t.max() >= spec.n_leaves):
        bad = int(t[(t < 0) | (t >= spec.n_leaves)][0])
        raise TreeSpecError(f"trace time {bad} outside [0, {spec.n_leaves})")
    return t, a


def assign_costs(trace, spec: TreeSpec) -> dict[Node, int]:
    """cost(u) for every internal node (levels 1..h), zero entries included."""
    t, a = _as_arrays(trace, spec)
    costs = {(l, i): 0 for l in range(1, spec.height + 1) for i in range(spec.nodes_at(l))}
    if not t.size:
        return costs
    # one touch per (address, meta-operation), ordered by address then time
    pairs = np.unique(np.stack([a, t], axis=1), axis=0)
    addr, time = pairs[:, 0], pairs[:, 1]
    same = addr[1:] == addr[:-1]
    t1, t2 = time[:-1][same], time[1:][same]
    level = np.zeros(t1.size, dtype=np.int64)
    unresolved = np.ones(t1.size, dtype=bool)
    for l in range(1, spec.height + 1):
        w = spec.widths[l]
        hit = unresolved & (t1 // w == t2 // w)
        level[hit] = l
        unresolved &= ~hit
    for l in range(1, spec.height + 1):
        sel = level == l
        if sel.any():
            idx, cnt = np.unique(t2[sel] // spec.widths[l], return_counts=True)
            for i, c in zip(idx.tolist(), cnt.tolist()):
                costs[(l, i)] = c
    return costs


def probe_per_node(trace, spec: TreeSpec) -> dict[Node, int]:
    """probe(u) for every node on levels 0..h."""
    t, _ = _as_arrays(trace, spec)
    out = {}
    for l in range(spec.height + 1):
        counts = np.bincount(t // spec.widths[l], minlength=spec.nodes_at(l))
        for i, c in enumerate(counts.tolist()):
            out[(l, i)] = c
    return out


@dataclass(frozen=True)
class LevelRow:
    level: int
    nodes: int
    sum_cost: int
    sum_probe: int

    @property
    def mean_cost(self) -> float:
        return self.sum_cost / self.nodes if self.nodes else 0.0

    @property
    def mean_probe(self) -> float:
        return self.sum_probe / self.nodes if self.nodes else 0.0


def level_summary(costs: dict[Node, int], probes: dict[Node, int], spec: TreeSpec) -> list[LevelRow]:
    rows = []
    for l in range(1, spec.height + 1):
        nodes = spec.nodes_at(l)
        rows.append(LevelRow(l, nodes,
                             sum(costs.get((l, i), 0) for i in range(nodes)),
                             sum(probes.get((l, i), 0) for i in range(nodes))))
    return rows


def distinct_touches(trace, spec: TreeSpec) -> tuple[int, int]:
    """(deduplicated touches, distinct addresses)."""
    t, a = _as_arrays(trace, spec)
    if not t.size:
        return 0, 0
    return len(np.unique(np.stack([a, t], axis=1), axis=0)), len(np.unique(a))


def write_node_csv(out: TextIO, costs: dict[Node, int], probes: dict[Node, int], spec: TreeSpec) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["level", "node_index", "cost", "probe"])
    for l in range(1, spec.height + 1):
        for i in range(spec.nodes_at(l)):
            w.writerow([l, i, costs.get((l, i), 0), probes.get((l, i), 0)])


def write_summary_csv(out: TextIO, rows: Sequence[LevelRow]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["level", "sum_cost", "sum_probe", "mean_cost"])
    for r in rows:
        w.writerow([r.level, r.sum_cost, r.sum_probe, f"{r.mean_cost:.6g}"])
