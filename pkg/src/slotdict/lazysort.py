"""Slot dictionary that keeps keys approximately sorted through lazy, multi-level rebuilds.

Layout of the stored keys:

* base: the keys present at the last full rebuild, key of rank i in slot i.
  Base keys never move between rebuilds; a vacated base slot is marked retired.
* pending: freshly inserted keys, each remembered explicitly as (key, slot).
* level batches: groups of former pending keys rearranged so that, read in
  ascending slot order, they are in ascending key order. Only the slot set is
  remembered (as a subset rank).

When a level overflows its cap, it is merged with everything below it into one
batch a level up; overflowing the top level (or n inserts since the last
rebuild) re-sorts everything.

The auxiliary-bit ledger charges:
    bookkeeping  64 * (L + 1) + n    pending count, per-level batch counts, retired bitmask
    pending      ceil(log U) + ceil(log n) per entry
    batch        ceil(log C(n, size)) + ceil(log (n + 1)) per batch
"""
from __future__ import annotations

import heapq
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .mathkit import ceil_log2_binom, log_star, subset_rank, subset_unrank, SubsetRank
from .slot_model import AccessTrace, SlotArray

WORD = 64


class DictError(Exception):
    pass


class KeyPresent(DictError, KeyError):
    pass


class KeyAbsent(DictError, KeyError):
    pass


class DictFull(DictError):
    pass


class BudgetError(DictError, ValueError):
    pass


class LedgerOverflow(DictError, AssertionError):
    pass


def ceil_log2(x: int) -> int:
    return max(1, (x - 1).bit_length())


@dataclass(frozen=True)
class Widths:
    key_bits: int
    slot_bits: int
    size_bits: int

    @classmethod
    def of(cls, n: int, U: int) -> "Widths":
        return cls(ceil_log2(U), ceil_log2(n), n.bit_length())

    @property
    def entry_bits(self) -> int:
        return self.key_bits + self.slot_bits


def bookkeeping_bits(n: int, levels: int) -> int:
    return WORD * (levels + 1) + n


def batch_bits(n: int, size: int, widths: Widths) -> int:
    return ceil_log2_binom(n, size) + widths.size_bits


def _per_key_rate(n: int, min_size: int, widths: Widths) -> float:
    # upper bound on batch_bits(s)/s for every s >= min_size (log C(n,s)/s is non-increasing)
    return (ceil_log2_binom(n, min_size) + 1 + widths.size_bits) / min_size


@dataclass(frozen=True)
class LevelPlan:
    """``caps[0]`` bounds the pending entries, ``caps[j]`` the keys held in level-j batches."""

    n: int
    U: int
    budget_bits: int
    caps: tuple[int, ...]

    @property
    def levels(self) -> int:
        return len(self.caps) - 1

    @property
    def pending_cap(self) -> int:
        return self.caps[0]

    @property
    def bookkeeping(self) -> int:
        return bookkeeping_bits(self.n, self.levels)

    def worst_case_bits(self) -> float:
        w = Widths.of(self.n, self.U)
        total = self.bookkeeping + self.caps[0] * w.entry_bits
        for j in range(1, len(self.caps)):
            total += self.caps[j] * _per_key_rate(self.n, self.caps[j - 1] + 1, w)
        return total

    def estimated_moves(self) -> float:
        """Model of amortized moves per insert: placement, one move per level, rebuild share."""
        period = min(self.n, self.caps[-1] + 1)
        return 1 + self.levels + self.n / period

    def validate(self) -> None:
        if any(c < 1 for c in self.caps):
            raise BudgetError(f"caps must be positive: {self.caps}")
        for j in range(1, len(self.caps)):
            if self.caps[j] <= self.caps[j - 1] or self.caps[j] > self.n:
                raise BudgetError(f"level {j} cap {self.caps[j]} must exceed level {j - 1} cap "
                                  f"{self.caps[j - 1]} and stay <= n")
        worst = self.worst_case_bits()
        if worst > self.budget_bits:
            raise BudgetError(f"worst-case ledger {worst:.0f} bits exceeds budget {self.budget_bits}")


def minimum_budget(n: int, U: int) -> int:
    return bookkeeping_bits(n, 0) + 2 * Widths.of(n, U).entry_bits


def _plan_for(n: int, U: int, budget: int, levels: int) -> Optional[LevelPlan]:
    w = Widths.of(n, U)
    free = budget - bookkeeping_bits(n, levels)
    if free < 2 * w.entry_bits:
        return None
    pending = min(n, free // (2 * w.entry_bits))
    caps = [pending]
    if levels:
        share = (free - pending * w.entry_bits) / levels
        for _ in range(levels):
            lo = caps[-1] + 1
            if lo > n:
                return None
            cap = min(n, int(share / _per_key_rate(n, lo, w)))
            if cap < lo:
                return None
            caps.append(cap)
    return LevelPlan(n, U, budget, tuple(caps))


def plan_levels(n: int, U: int, budget_bits: int, levels: Optional[int] = None) -> LevelPlan:
    """Pick level caps whose worst-case ledger fits ``budget_bits``.

    Half of the budget left after bookkeeping goes to pending entries, the rest is
    split evenly across levels. Without an explicit ``levels`` the count with the
    lowest modelled move cost wins (ties go to fewer levels).
    """
    floor = minimum_budget(n, U)
    if budget_bits < floor:
        raise BudgetError(f"budget {budget_bits} bits is below the minimum {floor} bits")
    if levels is not None:
        plan = _plan_for(n, U, budget_bits, levels)
        if plan is None:
            raise BudgetError(f"budget {budget_bits} bits cannot support {levels} levels")
        return plan
    best = None
    for L in range(0, log_star(n) + 2):
        plan = _plan_for(n, U, budget_bits, L)
        if plan is None:
            continue
        if best is None or plan.estimated_moves() < best.estimated_moves() - 1e-9:
            best = plan
    assert best is not None  # L = 0 always fits above the minimum budget
    return best


@dataclass
class BaseSnapshot:
    keys: list[int] = field(default_factory=list)
    retired: bytearray = field(default_factory=bytearray)


@dataclass
class LevelBatch:
    level: int
    slots: list[int]
    keys: list[int]

    @property
    def size(self) -> int:
        return len(self.slots)


class LazySortDict:
    name = "lazysort"

    def __init__(self, n: int, U: int, budget_bits: Optional[int] = None, *, levels: Optional[int] = None,
                 plan: Optional[LevelPlan] = None, with_values: bool = False, record_trace: bool = True,
                 trace: Optional[AccessTrace] = None):
        if n < 1:
            raise ValueError("capacity must be positive")
        if U < 2 * n:
            raise ValueError(f"universe {U} must be at least 2n = {2 * n}")
        if budget_bits is None:
            budget_bits = plan.budget_bits if plan is not None else 8 * n
        if plan is None:
            plan = plan_levels(n, U, budget_bits, levels)
        elif (plan.n, plan.U, plan.budget_bits) != (n, U, budget_bits):
            raise BudgetError("plan was built for different parameters")
        plan.validate()
        self.n, self.U, self.budget_bits = n, U, budget_bits
        self.plan = plan
        self.levels = plan.levels
        self.caps = plan.caps
        self.widths = Widths.of(n, U)
        self.slots = SlotArray(n, with_values=with_values, trace=trace, record=record_trace)
        self.base = BaseSnapshot()
        self.pending: dict[int, int] = {}
        self.batches: list[LevelBatch] = []
        self.level_counts = [0] * (self.levels + 1)
        self.inserts_since_rebuild = 0
        self.rebuild_count = 0
        self.forced_rebuilds = 0
        self.merge_count = 0
        self.now = 0
        self._free = list(range(n))
        self._ledger = plan.bookkeeping
        self.aux_high_water = self._ledger

    # -- ledger ------------------------------------------------------------

    def _batch_charge(self, size: int) -> int:
        return batch_bits(self.n, size, self.widths)

    def aux_bits(self) -> int:
        """Ledger total recomputed from the structure itself."""
        total = self.plan.bookkeeping + len(self.pending) * self.widths.entry_bits
        for b in self.batches:
            total += self._batch_charge(b.size)
        return total

    def _settle(self) -> None:
        if self._ledger > self.budget_bits:
            raise LedgerOverflow(f"ledger {self._ledger} bits exceeds budget {self.budget_bits}")
        if self._ledger > self.aux_high_water:
            self.aux_high_water = self._ledger

    # -- lookup ------------------------------------------------------------

    def _locate(self, key: int):
        slot = self.pending.get(key)
        if slot is not None:
            return "pending", None, slot
        for b in self.batches:
            i = bisect_left(b.keys, key)
            if i < len(b.keys) and b.keys[i] == key:
                return "batch", (b, i), b.slots[i]
        keys = self.base.keys
        i = bisect_left(keys, key)
        if i < len(keys) and keys[i] == key and not self.base.retired[i]:
            return "base", i, i
        return None

    def query(self, key: int) -> tuple[bool, Optional[int]]:
        loc = self._locate(key)
        if loc is None:
            return False, None
        return True, loc[2]

    def __contains__(self, key: int) -> bool:
        return self.slots.slot_of(key) is not None

    def __len__(self) -> int:
        return len(self.slots)

    def lookup(self, key: int) -> Optional[int]:
        """Value stored with ``key`` (value-carrying dictionaries only)."""
        found, slot = self.query(key)
        if not found or self.slots.values is None:
            return None
        return self.slots.values[slot]

    # -- updates -----------------------------------------------------------

    def bulk_init(self, keys: Iterable[int], values: Optional[Iterable[int]] = None) -> None:
        if len(self.slots) or self.slots.move_count:
            raise DictError("bulk_init needs a fresh dictionary")
        keys = list(keys)
        vals = list(values) if values is not None else [None] * len(keys)
        if len(set(keys)) != len(keys):
            raise KeyPresent("duplicate keys in bulk_init")
        if len(keys) > self.n:
            raise DictFull(f"{len(keys)} keys exceed capacity {self.n}")
        order = sorted(range(len(keys)), key=keys.__getitem__)
        for slot, i in enumerate(order):
            self.slots.place(keys[i], slot, self.now, vals[i])
        self.base = BaseSnapshot([keys[i] for i in order], bytearray(len(keys)))
        self._free = list(range(len(keys), self.n))
        self.inserts_since_rebuild = 0
        self._settle()

    def insert(self, key: int, value: Optional[int] = None) -> None:
        if self.slots.slot_of(key) is not None:
            raise KeyPresent(key)
        if not self._free:
            raise DictFull(f"all {self.n} slots are occupied")
        slot = heapq.heappop(self._free)
        self.slots.place(key, slot, self.now, value)
        self.pending[key] = slot
        self.level_counts[0] += 1
        self._ledger += self.widths.entry_bits
        self.inserts_since_rebuild += 1
        self.cascade_flush()
        self._settle()

    def delete(self, key: int) -> None:
        loc = self._locate(key)
        if loc is None:
            raise KeyAbsent(key)
        where, info, slot = loc
        if where == "pending":
            del self.pending[key]
            self.level_counts[0] -= 1
            self._ledger -= self.widths.entry_bits
        elif where == "batch":
            b, i = info
            before = self._batch_charge(b.size)
            del b.slots[i]
            del b.keys[i]
            self.level_counts[b.level] -= 1
            if b.size:
                self._ledger += self._batch_charge(b.size) - before
            else:
                self.batches.remove(b)
                self._ledger -= before
        else:
            self.base.retired[info] = 1
        self.slots.evict(slot, self.now)
        heapq.heappush(self._free, slot)
        self._settle()

    def cascade_flush(self) -> None:
        if self.inserts_since_rebuild >= self.n:
            self.full_rebuild()
            return
        while True:
            j = next((lv for lv, c in enumerate(self.level_counts) if c > self.caps[lv]), None)
            if j is None:
                break
            if j == self.levels:
                self.full_rebuild()
                return
            self.flush(j)
        if self._ledger > self.budget_bits:
            # only reachable after deletions shrank batches below their minimum size
            self.forced_rebuilds += 1
            self.full_rebuild()

    def flush(self, level: int) -> int:
        """Merge pending entries and all batches of level <= ``level`` into one batch
        at ``level + 1``; returns the number of moves."""
        if not 0 <= level < self.levels:
            raise ValueError(f"can only merge levels 0..{self.levels - 1}, got {level}")
        keys = list(self.pending)
        slots = list(self.pending.values())
        keep = []
        for b in self.batches:
            if b.level <= level:
                keys.extend(b.keys)
                slots.extend(b.slots)
                self._ledger -= self._batch_charge(b.size)
            else:
                keep.append(b)
        self._ledger -= len(self.pending) * self.widths.entry_bits
        self.pending.clear()
        keys.sort()
        slots.sort()
        moves = self.slots.relocate(dict(zip(keys, slots)), self.now)
        keep.append(LevelBatch(level + 1, slots, keys))
        self.batches = keep
        self._ledger += self._batch_charge(len(keys))
        for lv in range(level + 1):
            self.level_counts[lv] = 0
        self.level_counts[level + 1] += len(keys)
        self.merge_count += 1
        return moves

    def full_rebuild(self) -> int:
        keys = sorted(k for k in self.slots.contents if k is not None)
        moves = self.slots.relocate({k: i for i, k in enumerate(keys)}, self.now)
        self.base = BaseSnapshot(keys, bytearray(len(keys)))
        self.pending.clear()
        self.batches = []
        self.level_counts = [0] * (self.levels + 1)
        self._free = list(range(len(keys), self.n))
        self._ledger = self.plan.bookkeeping
        self.inserts_since_rebuild = 0
        self.rebuild_count += 1
        return moves

    # -- reporting -----------------------------------------------------------

    @property
    def move_count(self) -> int:
        return self.slots.move_count

    def stats(self) -> dict:
        return {
            "move_count": self.slots.move_count,
            "aux_bits": self._ledger,
            "aux_high_water": self.aux_high_water,
            "level_counts": list(self.level_counts),
            "rebuild_count": self.rebuild_count,
            "forced_rebuilds": self.forced_rebuilds,
            "merge_count": self.merge_count,
            "levels": self.levels,
            "caps": list(self.caps),
        }

    def check_invariants(self) -> None:
        """Full structural scan; raises AssertionError on the first violation."""
        contents = self.slots.contents
        seen: dict[int, str] = {}
        for key, slot in self.pending.items():
            assert contents[slot] == key, f"pending {key} not in slot {slot}"
            seen[key] = "pending"
        for b in self.batches:
            assert b.slots == sorted(b.slots) and len(set(b.slots)) == b.size
            assert all(b.keys[i] < b.keys[i + 1] for i in range(b.size - 1)), "batch order law broken"
            for s, k in zip(b.slots, b.keys):
                assert contents[s] == k, f"batch key {k} not in slot {s}"
                assert k not in seen, f"key {k} located twice"
                seen[k] = "batch"
        for i, k in enumerate(self.base.keys):
            if not self.base.retired[i]:
                assert contents[i] == k, f"base key {k} left slot {i}"
                assert k not in seen, f"key {k} located twice"
                seen[k] = "base"
        stored = {k for k in contents if k is not None}
        assert stored == set(seen), "some stored key is not locatable"
        counts = [len(self.pending)] + [0] * self.levels
        for b in self.batches:
            counts[b.level] += b.size
        assert counts == self.level_counts, f"level counts {self.level_counts} != {counts}"
        assert self.aux_bits() == self._ledger, "running ledger drifted"
        assert self._ledger <= self.budget_bits
        assert sorted(self._free) == [i for i, k in enumerate(contents) if k is None]


# --- checkpoint ------------------------------------------------------------

HEADER_FIELDS = 4  # n, U, budget, levels


class _BitWriter:
    def __init__(self):
        self.value = 0
        self.nbits = 0

    def put(self, x: int, width: int) -> None:
        if x < 0 or x.bit_length() > width:
            raise ValueError(f"{x} does not fit in {width} bits")
        self.value = (self.value << width) | x
        self.nbits += width

    def to_bytes(self) -> bytes:
        pad = (-self.nbits) % 8
        return (self.value << pad).to_bytes((self.nbits + pad) // 8, "big")


class _BitReader:
    def __init__(self, data: bytes, nbits: int):
        self.value = int.from_bytes(data, "big") >> (len(data) * 8 - nbits)
        self.left = nbits

    def get(self, width: int) -> int:
        if width > self.left:
            raise ValueError("checkpoint truncated")
        self.left -= width
        return (self.value >> self.left) & ((1 << width) - 1)


@dataclass
class Checkpoint:
    data: bytes
    nbits: int
    header_bits: int
    base_bits: int
    aux_bits: int


def encode_checkpoint(d: LazySortDict) -> Checkpoint:
    """Serialize the base key list and the full ledger.

    Slot contents are not stored; batch keys are recovered by reading the slots
    named by each batch's slot set.
    """
    w = d.widths
    out = _BitWriter()
    for x in (d.n, d.U, d.budget_bits, d.levels):
        out.put(x, WORD)
    header = out.nbits
    out.put(len(d.base.keys), WORD)
    for k in d.base.keys:
        out.put(k, w.key_bits)
    base = out.nbits - header
    for i in range(d.n):
        out.put(1 if i < len(d.base.retired) and d.base.retired[i] else 0, 1)
    out.put(len(d.pending), WORD)
    by_level = sorted(d.batches, key=lambda b: b.level)
    for lv in range(1, d.levels + 1):
        out.put(sum(1 for b in by_level if b.level == lv), WORD)
    for key, slot in d.pending.items():
        out.put(key, w.key_bits)
        out.put(slot, w.slot_bits)
    for b in by_level:
        code = subset_rank(b.slots, d.n)
        out.put(b.size, w.size_bits)
        out.put(code.rank, code.bits)
    aux = out.nbits - header - base
    return Checkpoint(out.to_bytes(), out.nbits, header, base, aux)


def decode_checkpoint(cp: Checkpoint, read_slot: Callable[[int], Optional[int]]) -> dict[int, int]:
    """Rebuild the slot -> key map; ``read_slot`` is consulted for batch slots only."""
    r = _BitReader(cp.data, cp.nbits)
    n, U, _budget, levels = (r.get(WORD) for _ in range(HEADER_FIELDS))
    w = Widths.of(n, U)
    base_keys = [r.get(w.key_bits) for _ in range(r.get(WORD))]
    retired = [r.get(1) for _ in range(n)]
    n_pending = r.get(WORD)
    per_level = [r.get(WORD) for _ in range(levels)]
    out = {i: k for i, k in enumerate(base_keys) if not retired[i]}
    for _ in range(n_pending):
        key = r.get(w.key_bits)
        out[r.get(w.slot_bits)] = key
    for count in per_level:
        for _ in range(count):
            size = r.get(w.size_bits)
            rank = r.get(ceil_log2_binom(n, size))
            for s in subset_unrank(SubsetRank(n, size, rank)):
                out[s] = read_slot(s)
    if r.left:
        raise ValueError(f"{r.left} trailing bits in checkpoint")
    return out
