"""Reference dictionaries on the same slot instrumentation.

LinearProbeDict sits at the fast, non-succinct end (2n slots, O(1) expected moves);
EagerSortedDict at the zero-redundancy end (keys always sorted, Theta(n) shifts).
"""
from __future__ import annotations

from bisect import bisect_left
from typing import Iterable, Optional

from .lazysort import DictFull, KeyAbsent, KeyPresent, ceil_log2
from .slot_model import SlotArray
from .workload import splitmix64_mix


class LinearProbeDict:
    name = "linear-probe"

    def __init__(self, n: int, U: int, seed: int = 0, record_trace: bool = True):
        self.n, self.U = n, U
        self.capacity = 2 * n
        self.seed = seed & ((1 << 64) - 1)
        self.slots = SlotArray(self.capacity, record=record_trace)
        self.now = 0

    def home(self, key: int) -> int:
        return (splitmix64_mix((key ^ self.seed) & ((1 << 64) - 1)) * self.capacity) >> 64

    def _find(self, key: int) -> Optional[int]:
        contents = self.slots.contents
        i = self.home(key)
        while contents[i] is not None:
            if contents[i] == key:
                return i
            i = (i + 1) % self.capacity
        return None

    def query(self, key: int) -> tuple[bool, Optional[int]]:
        slot = self._find(key)
        return slot is not None, slot

    def __contains__(self, key: int) -> bool:
        return self._find(key) is not None

    def __len__(self) -> int:
        return len(self.slots)

    def bulk_init(self, keys: Iterable[int]) -> None:
        for k in keys:
            self.insert(k)

    def insert(self, key: int) -> None:
        contents = self.slots.contents
        i = self.home(key)
        while contents[i] is not None:
            if contents[i] == key:
                raise KeyPresent(key)
            i = (i + 1) % self.capacity
        if len(self.slots) >= self.n:
            raise DictFull(f"load factor would exceed 1/2 ({self.n} keys)")
        self.slots.place(key, i, self.now)

    def delete(self, key: int) -> None:
        hole = self._find(key)
        if hole is None:
            raise KeyAbsent(key)
        self.slots.evict(hole, self.now)
        contents = self.slots.contents
        cap = self.capacity
        j = hole
        while True:
            j = (j + 1) % cap
            k = contents[j]
            if k is None:
                return
            h = self.home(k)
            # k may fill the hole unless its home lies cyclically in (hole, j]
            if (j > hole and (h <= hole or h > j)) or (j < hole and hole >= h > j):
                self.slots.move(j, hole, self.now)
                hole = j

    def aux_bits(self) -> int:
        return 0

    @property
    def move_count(self) -> int:
        return self.slots.move_count

    def space_bits(self) -> int:
        return self.capacity * ceil_log2(self.U)

    def stats(self) -> dict:
        return {"move_count": self.slots.move_count, "aux_bits": 0, "space_bits": self.space_bits(),
                "rebuild_count": 0, "level_counts": []}


class EagerSortedDict:
    name = "eager"

    def __init__(self, n: int, U: int, record_trace: bool = True):
        self.n, self.U = n, U
        self.slots = SlotArray(n, record=record_trace)
        self.count = 0
        self.now = 0

    def _index(self, key: int) -> int:
        return bisect_left(self.slots.contents, key, 0, self.count)

    def query(self, key: int) -> tuple[bool, Optional[int]]:
        i = self._index(key)
        if i < self.count and self.slots.contents[i] == key:
            return True, i
        return False, None

    def __contains__(self, key: int) -> bool:
        return self.query(key)[0]

    def __len__(self) -> int:
        return self.count

    def bulk_init(self, keys: Iterable[int]) -> None:
        keys = sorted(keys)
        if len(set(keys)) != len(keys):
            raise KeyPresent("duplicate keys in bulk_init")
        if self.count + len(keys) > self.n:
            raise DictFull(f"{len(keys)} keys exceed capacity {self.n}")
        if self.count:
            for k in keys:
                self.insert(k)
            return
        for i, k in enumerate(keys):
            self.slots.place(k, i, self.now)
        self.count = len(keys)

    def insert(self, key: int) -> None:
        i = self._index(key)
        if i < self.count and self.slots.contents[i] == key:
            raise KeyPresent(key)
        if self.count == self.n:
            raise DictFull(f"all {self.n} slots are occupied")
        self.slots.shift(i, self.count, 1, self.now)
        self.slots.place(key, i, self.now)
        self.count += 1

    def delete(self, key: int) -> None:
        found, i = self.query(key)
        if not found:
            raise KeyAbsent(key)
        self.slots.evict(i, self.now)
        self.slots.shift(i + 1, self.count, -1, self.now)
        self.count -= 1

    def aux_bits(self) -> int:
        return 0

    @property
    def move_count(self) -> int:
        return self.slots.move_count

    def stats(self) -> dict:
        return {"move_count": self.slots.move_count, "aux_bits": 0, "rebuild_count": 0, "level_counts": []}
