"""Key-only dictionary over [U*V] simulated on a key-value dictionary over [U] x [V].

A key x splits into (x // V, x % V). The high part is stored as the key and the
low part as its value; a full key whose high part is already taken by a
different value goes to a small sorted side table instead.
"""
from __future__ import annotations

import math
from bisect import bisect_left, insort
from typing import Iterable, Optional

from .lazysort import DictError, KeyAbsent, KeyPresent, LazySortDict


class CollisionOverflow(DictError):
    pass


def split(x: int, U: int, V: int) -> tuple[int, int]:
    if not 0 <= x < U * V:
        raise ValueError(f"key {x} outside [0, {U * V})")
    return divmod(x, V)


def merge(k: int, v: int, U: int, V: int) -> int:
    if not (0 <= k < U and 0 <= v < V):
        raise ValueError(f"({k}, {v}) outside [{U}] x [{V}]")
    return k * V + v


class CollisionTable:
    def __init__(self, cap: int):
        self.cap = cap
        self.entries: list[int] = []

    def __contains__(self, x: int) -> bool:
        i = bisect_left(self.entries, x)
        return i < len(self.entries) and self.entries[i] == x

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, x: int) -> None:
        if len(self.entries) >= self.cap:
            raise CollisionOverflow(f"collision table full ({self.cap} entries)")
        insort(self.entries, x)

    def remove(self, x: int) -> None:
        i = bisect_left(self.entries, x)
        if i == len(self.entries) or self.entries[i] != x:
            raise KeyAbsent(x)
        del self.entries[i]


def collision_cap(n: int, U: int) -> int:
    return math.ceil(8 * max(1.0, n * n / U)) + 16


class ReducedKeyDict:
    """Shared dictionary interface over [U * V] backed by a value-carrying LazySortDict."""

    name = "kv-lazysort"

    def __init__(self, n: int, U: int, V: int, budget_bits: Optional[int] = None,
                 record_trace: bool = True, backing: Optional[LazySortDict] = None):
        if V < 1:
            raise ValueError("V must be positive")
        self.n, self.U, self.V = n, U, V
        self.backing = backing if backing is not None else LazySortDict(
            n, U, budget_bits, with_values=True, record_trace=record_trace)
        self.collisions = CollisionTable(collision_cap(n, U))
        self.collision_total = 0

    @property
    def now(self) -> int:
        return self.backing.now

    @now.setter
    def now(self, t: int) -> None:
        self.backing.now = t

    @property
    def budget_bits(self) -> int:
        return self.backing.budget_bits

    @property
    def slots(self):
        return self.backing.slots

    def _backed(self, k: int) -> Optional[int]:
        found, slot = self.backing.query(k)
        return self.backing.slots.values[slot] if found else None

    def query(self, x: int) -> tuple[bool, Optional[int]]:
        k, v = split(x, self.U, self.V)
        if x in self.collisions:
            return True, None
        found, slot = self.backing.query(k)
        if found and self.backing.slots.values[slot] == v:
            return True, slot
        return False, None

    def __contains__(self, x: int) -> bool:
        return self.query(x)[0]

    def __len__(self) -> int:
        return len(self.backing) + len(self.collisions)

    def bulk_init(self, keys: Iterable[int]) -> None:
        first: dict[int, int] = {}
        for x in keys:
            k, v = split(x, self.U, self.V)
            if k in first:
                if first[k] == v or x in self.collisions:
                    raise KeyPresent(x)
                self.collisions.add(x)
                self.collision_total += 1
            else:
                first[k] = v
        self.backing.bulk_init(first.keys(), first.values())

    def insert(self, x: int) -> None:
        k, v = split(x, self.U, self.V)
        if x in self.collisions:
            raise KeyPresent(x)
        held = self._backed(k)
        if held == v:
            raise KeyPresent(x)
        if held is not None:
            self.collisions.add(x)
            self.collision_total += 1
            return
        self.backing.insert(k, v)

    def delete(self, x: int) -> None:
        if x in self.collisions:
            self.collisions.remove(x)
            return
        k, v = split(x, self.U, self.V)
        if self._backed(k) != v:
            raise KeyAbsent(x)
        self.backing.delete(k)

    def aux_bits(self) -> int:
        return self.backing.aux_bits()

    @property
    def move_count(self) -> int:
        return self.backing.move_count

    def stats(self) -> dict:
        out = self.backing.stats()
        out["collisions_resident"] = len(self.collisions)
        out["collisions_total"] = self.collision_total
        return out
