"""The hard workload: n random inserts, then n (query, delete, insert) rounds.

Randomness comes from SplitMix64 so a seed names the same stream in any language:
    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)
all arithmetic mod 2**64. ``below(m)`` rejects draws >= 2**64 - (2**64 mod m)
and returns ``draw mod m``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterator, Optional

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

INSERT, DELETE, QUERY = "I", "D", "Q"
FLAG_QUERIES = 1


class WorkloadError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def splitmix64_mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return splitmix64_mix(self.state)

    def below(self, m: int) -> int:
        if not 0 < m <= 1 << 64:
            raise ValueError(f"range {m} not in (0, 2**64]")
        limit = (1 << 64) - ((1 << 64) % m)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % m


@dataclass(frozen=True)
class Operation:
    kind: str
    key: int
    value: Optional[int] = None

    def line(self) -> str:
        if self.value is not None:
            return f"{self.kind} {self.key} {self.value}"
        return f"{self.kind} {self.key}"


@dataclass
class OperationSequence:
    n: int
    U: int
    V: Optional[int]
    seed: int
    include_queries: bool
    ops: list[Operation] = field(default_factory=list)
    meta_boundaries: list[int] = field(default_factory=list)

    @property
    def n_meta(self) -> int:
        return len(self.meta_boundaries)

    def initial_keys(self) -> list[int]:
        return [op.key for op in self.ops[: self.n]]

    def meta_ops(self) -> Iterator[tuple[int, list[Operation]]]:
        bounds = self.meta_boundaries + [len(self.ops)]
        for t in range(len(self.meta_boundaries)):
            yield t, self.ops[bounds[t]:bounds[t + 1]]


def generate(n: int, U: int, seed: int, include_queries: bool = True,
             value_universe: Optional[int] = None) -> OperationSequence:
    if n < 1:
        raise WorkloadError("n must be at least 1")
    if U < 3 * n:
        raise WorkloadError(f"universe {U} is smaller than 3n = {3 * n}")
    if value_universe is not None and value_universe < 1:
        raise WorkloadError("value universe must be positive")
    rng = SplitMix64(seed)

    # partial Fisher-Yates over a sparse permutation of [U]
    perm: dict[int, int] = {}
    initial = []
    for i in range(n):
        j = i + rng.below(U - i)
        vi, vj = perm.get(i, i), perm.get(j, j)
        perm[i], perm[j] = vj, vi
        initial.append(vj)
    del perm
    K = set(initial)

    def value() -> Optional[int]:
        return rng.below(value_universe) if value_universe is not None else None

    ops = [Operation(INSERT, k, value()) for k in initial]
    bounds = []
    order = list(initial)
    inserted: set[int] = set()
    for i in range(n):
        j = i + rng.below(n - i)
        order[i], order[j] = order[j], order[i]
        d = order[i]
        bounds.append(len(ops))
        if include_queries:
            ops.append(Operation(QUERY, d))
        ops.append(Operation(DELETE, d))
        while True:
            a = rng.below(U)
            if a not in K and a not in inserted:
                break
        inserted.add(a)
        ops.append(Operation(INSERT, a, value()))
    return OperationSequence(n, U, value_universe, seed, include_queries, ops, bounds)


def _boundaries(ops: list[Operation], n: int, include_queries: bool) -> list[int]:
    lead = QUERY if include_queries else DELETE
    return [i for i in range(n, len(ops)) if ops[i].kind == lead]


def serialize(seq: OperationSequence) -> bytes:
    buf = io.StringIO()
    flags = FLAG_QUERIES if seq.include_queries else 0
    buf.write(f"{seq.n} {seq.U} {seq.V or 0} {seq.seed} {flags}\n")
    for op in seq.ops:
        buf.write(op.line())
        buf.write("\n")
    return buf.getvalue().encode("ascii")


def deserialize(data: bytes) -> OperationSequence:
    lines = data.decode("ascii").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(1, "missing header")
    head = lines[0].split()
    if len(head) != 5:
        raise ParseError(1, "header must be 'n U V seed flags'")
    try:
        n, U, V, seed, flags = (int(x) for x in head)
    except ValueError:
        raise ParseError(1, "non-integer header field") from None
    with_values = V > 0
    ops = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts or parts[0] not in (INSERT, DELETE, QUERY):
            raise ParseError(lineno, f"unknown op {line!r}")
        kind = parts[0]
        want = 3 if (kind == INSERT and with_values) else 2
        if len(parts) != want:
            raise ParseError(lineno, f"expected {want} fields, got {len(parts)}")
        try:
            nums = [int(x) for x in parts[1:]]
        except ValueError:
            raise ParseError(lineno, "non-integer field") from None
        ops.append(Operation(kind, nums[0], nums[1] if len(nums) > 1 else None))
    include_queries = bool(flags & FLAG_QUERIES)
    return OperationSequence(n, U, V if with_values else None, seed, include_queries, ops,
                             _boundaries(ops, n, include_queries))
