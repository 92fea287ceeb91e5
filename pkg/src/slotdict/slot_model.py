"""Instrumented substrates: a slot array costed in key moves and a cell memory
costed in word probes. Both log ``(time, address, kind)`` triples.

Slot trace kinds are ``T`` (a key arrived), ``F`` (a key left) and ``S`` (one
endpoint of a swap). ``move_count == #T + #S / 2`` for any history. On disk every
slot record is written as kind ``M``; cell records keep ``R``/``W``.
"""
from __future__ import annotations

import io
import math
from array import array
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, TextIO

from .mathkit import log_binomial


class SlotError(Exception):
    """Precondition violation on a slot or cell operation."""


class TraceFormatError(ValueError):
    pass


class Trace:
    """Append-only ``(time, address, kind)`` log.

    With ``sink`` set, records are streamed out in chunks of ``chunk`` entries and
    dropped from memory; ``len()`` still counts everything ever appended.
    """

    def __init__(self, sink: Optional[TextIO] = None, chunk: int = 1 << 16):
        self.times = array("q")
        self.addrs = array("q")
        self.kinds = bytearray()
        self.sink = sink
        self.chunk = chunk
        self._flushed = 0
        self._last_time: Optional[int] = None

    def append(self, time: int, addr: int, kind: str) -> None:
        if self._last_time is not None and time < self._last_time:
            raise SlotError(f"trace time went backwards: {time} after {self._last_time}")
        self._last_time = time
        self.times.append(time)
        self.addrs.append(addr)
        self.kinds.append(ord(kind))
        if self.sink is not None and len(self.times) >= self.chunk:
            self.flush()

    def extend(self, time: int, addrs: Iterable[int], kind: str) -> None:
        before = len(self.addrs)
        if self._last_time is not None and time < self._last_time:
            raise SlotError(f"trace time went backwards: {time} after {self._last_time}")
        self._last_time = time
        self.addrs.extend(addrs)
        added = len(self.addrs) - before
        self.times.extend([time] * added)
        self.kinds.extend(bytes([ord(kind)]) * added)
        if self.sink is not None and len(self.times) >= self.chunk:
            self.flush()

    def flush(self) -> None:
        if self.sink is None:
            return
        write_records(self.sink, self.times, self.addrs, self.kinds)
        self._flushed += len(self.times)
        self.times = array("q")
        self.addrs = array("q")
        self.kinds = bytearray()

    def __len__(self) -> int:
        return self._flushed + len(self.times)

    def __iter__(self) -> Iterator[tuple[int, int, str]]:
        if self._flushed:
            raise SlotError("trace was streamed to a sink; read it back from the file")
        for t, a, k in zip(self.times, self.addrs, self.kinds):
            yield t, a, chr(k)

    def count(self, kind: str) -> int:
        return self.kinds.count(ord(kind))

    def window(self, lo: int, hi: int) -> list[tuple[int, int]]:
        """(time, address) pairs with lo <= time < hi."""
        return [(t, a) for t, a in zip(self.times, self.addrs) if lo <= t < hi]


class AccessTrace(Trace):
    pass


class ProbeTrace(Trace):
    pass


class SlotArray:
    """``capacity`` slots, each holding at most one integer key.

    A parallel value word per slot is kept when ``with_values`` is set; values
    travel with their key on every move at no extra cost.
    """

    def __init__(self, capacity: int, with_values: bool = False, trace: Optional[AccessTrace] = None,
                 record: bool = True):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.contents: list[Optional[int]] = [None] * capacity
        self.values: Optional[list[Optional[int]]] = [None] * capacity if with_values else None
        self.move_count = 0
        self.trace: Optional[AccessTrace] = (trace if trace is not None else AccessTrace()) if record else None
        self._where: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._where)

    def slot_of(self, key: int) -> Optional[int]:
        return self._where.get(key)

    def _check(self, slot: int) -> None:
        if not 0 <= slot < self.capacity:
            raise SlotError(f"slot {slot} outside [0, {self.capacity})")

    def place(self, key: int, slot: int, time: int, value: Optional[int] = None) -> None:
        self._check(slot)
        if self.contents[slot] is not None:
            raise SlotError(f"slot {slot} already holds key {self.contents[slot]}")
        if key in self._where:
            raise SlotError(f"key {key} already in slot {self._where[key]}")
        self.contents[slot] = key
        if self.values is not None:
            self.values[slot] = value
        self._where[key] = slot
        self.move_count += 1
        if self.trace is not None:
            self.trace.append(time, slot, "T")

    def evict(self, slot: int, time: int) -> int:
        self._check(slot)
        key = self.contents[slot]
        if key is None:
            raise SlotError(f"slot {slot} is empty")
        self.contents[slot] = None
        if self.values is not None:
            self.values[slot] = None
        del self._where[key]
        if self.trace is not None:
            self.trace.append(time, slot, "F")
        return key

    def move(self, src: int, dst: int, time: int) -> None:
        self._check(src)
        self._check(dst)
        key = self.contents[src]
        if key is None:
            raise SlotError(f"slot {src} is empty")
        if self.contents[dst] is not None:
            raise SlotError(f"slot {dst} already holds key {self.contents[dst]}")
        self.contents[dst], self.contents[src] = key, None
        if self.values is not None:
            self.values[dst], self.values[src] = self.values[src], None
        self._where[key] = dst
        self.move_count += 1
        if self.trace is not None:
            self.trace.append(time, src, "F")
            self.trace.append(time, dst, "T")

    def swap(self, a: int, b: int, time: int) -> None:
        """Exchange two occupied slots; one move-unit."""
        self._check(a)
        self._check(b)
        ka, kb = self.contents[a], self.contents[b]
        if ka is None or kb is None or a == b:
            raise SlotError(f"swap needs two distinct occupied slots, got {a} and {b}")
        self.contents[a], self.contents[b] = kb, ka
        if self.values is not None:
            self.values[a], self.values[b] = self.values[b], self.values[a]
        self._where[ka], self._where[kb] = b, a
        self.move_count += 1
        if self.trace is not None:
            self.trace.append(time, a, "S")
            self.trace.append(time, b, "S")

    def relocate(self, targets: dict[int, int], time: int) -> int:
        """Move each ``key -> slot`` in ``targets`` simultaneously.

        Destinations must be empty or vacated by another relocated key. Every key
        whose slot changes costs one move; returns that count.
        """
        moving = []
        for key, dst in targets.items():
            src = self._where.get(key)
            if src is None:
                raise SlotError(f"key {key} is not stored")
            self._check(dst)
            if src != dst:
                moving.append((key, src, dst))
        if not moving:
            return 0
        freed = {src for _, src, _ in moving}
        dsts = set()
        for key, _, dst in moving:
            occupant = self.contents[dst]
            if (occupant is not None and dst not in freed) or dst in dsts:
                raise SlotError(f"relocation of {key} into slot {dst} would collide")
            dsts.add(dst)
        vals = self.values
        carried = {key: vals[src] for key, src, _ in moving} if vals is not None else None
        for _, src, _ in moving:
            self.contents[src] = None
            if vals is not None:
                vals[src] = None
        for key, _, dst in moving:
            self.contents[dst] = key
            if vals is not None:
                vals[dst] = carried[key]
            self._where[key] = dst
        self.move_count += len(moving)
        if self.trace is not None:
            self.trace.extend(time, (src for _, src, _ in moving), "F")
            self.trace.extend(time, (dst for _, _, dst in moving), "T")
        return len(moving)

    def shift(self, lo: int, hi: int, delta: int, time: int) -> int:
        """Move the occupied run ``[lo, hi)`` by ``delta`` (+1 or -1) slots.

        The slot uncovered at the leading edge must be empty. Costs ``hi - lo``.
        """
        if delta not in (1, -1):
            raise ValueError("delta must be +1 or -1")
        if lo >= hi:
            return 0
        self._check(lo)
        self._check(hi - 1)
        edge = hi if delta == 1 else lo - 1
        self._check(edge)
        if self.contents[edge] is not None:
            raise SlotError(f"shift target slot {edge} is occupied")
        run = self.contents[lo:hi]
        if None in run:
            raise SlotError(f"shift range [{lo}, {hi}) has a hole")
        self.contents[lo + delta:hi + delta] = run
        vacated = lo if delta == 1 else hi - 1
        self.contents[vacated] = None
        if self.values is not None:
            vrun = self.values[lo:hi]
            self.values[lo + delta:hi + delta] = vrun
            self.values[vacated] = None
        self._where.update(zip(run, range(lo + delta, hi + delta)))
        n = hi - lo
        self.move_count += n
        if self.trace is not None:
            self.trace.extend(time, range(lo, hi), "F")
            self.trace.extend(time, range(lo + delta, hi + delta), "T")
        return n

    def occupied(self) -> Iterator[tuple[int, int]]:
        for slot, key in enumerate(self.contents):
            if key is not None:
                yield slot, key


class CellMemory:
    """``cell_count`` words of ``word_bits`` bits; every access is one probe."""

    def __init__(self, cell_count: int, word_bits: int, trace: Optional[ProbeTrace] = None):
        if cell_count < 1 or word_bits < 1:
            raise ValueError("cell_count and word_bits must be positive")
        self.cell_count = cell_count
        self.word_bits = word_bits
        self.cells = [0] * cell_count
        self.trace = trace if trace is not None else ProbeTrace()
        self.write_log: list[int] = []

    @classmethod
    def from_budget(cls, universe: int, n: int, redundancy_bits: int,
                    word_bits: Optional[int] = None) -> "CellMemory":
        w = word_bits if word_bits is not None else max(1, math.ceil(math.log2(universe)))
        cells = math.ceil((log_binomial(universe, n) + redundancy_bits) / w)
        return cls(max(1, cells), w)

    def _check(self, cell: int) -> None:
        if not 0 <= cell < self.cell_count:
            raise SlotError(f"cell {cell} outside [0, {self.cell_count})")

    def read(self, cell: int, time: int) -> int:
        self._check(cell)
        self.trace.append(time, cell, "R")
        return self.cells[cell]

    def write(self, cell: int, word: int, time: int) -> None:
        self._check(cell)
        if word < 0 or word.bit_length() > self.word_bits:
            raise SlotError(f"word {word:#x} does not fit in {self.word_bits} bits")
        self.trace.append(time, cell, "W")
        self.cells[cell] = word
        self.write_log.append(word)

    def probes(self, time: int) -> set[int]:
        return {a for t, a, _ in self.trace if t == time}


def mem_read(mem: CellMemory, cell: int, time: int) -> int:
    return mem.read(cell, time)


def mem_write(mem: CellMemory, cell: int, word: int, time: int) -> CellMemory:
    mem.write(cell, word, time)
    return mem


def replay_writes(trace: Iterable[tuple[int, int, str]], values: Iterable[int],
                  cell_count: int, word_bits: int) -> CellMemory:
    """Rebuild a memory from the write records of a trace and the words written, in order."""
    mem = CellMemory(cell_count, word_bits, ProbeTrace())
    words = iter(values)
    for t, a, k in trace:
        if k == "W":
            mem.write(a, next(words), t)
    return mem


# --- trace files -----------------------------------------------------------

@dataclass
class TraceHeader:
    n: int
    N: int
    w: int


def write_header(out: TextIO, header: TraceHeader) -> None:
    out.write(f"# n={header.n} N={header.N} w={header.w}\n")


def write_records(out: TextIO, times, addrs, kinds) -> None:
    buf = io.StringIO()
    for t, a, k in zip(times, addrs, kinds):
        kind = chr(k) if isinstance(k, int) else k
        if kind in "TFS":
            kind = "M"
        buf.write(f"{t}\t{a}\t{kind}\n")
    out.write(buf.getvalue())


def save_trace(path: str, trace: Trace, header: TraceHeader) -> None:
    with open(path, "w") as fh:
        write_header(fh, header)
        write_records(fh, trace.times, trace.addrs, trace.kinds)


def load_trace(source: TextIO) -> tuple[TraceHeader, list[tuple[int, int, str]]]:
    first = source.readline()
    if not first.startswith("#"):
        raise TraceFormatError("line 1: missing '# n=.. N=.. w=..' header")
    fields = dict(tok.split("=", 1) for tok in first[1:].split())
    try:
        header = TraceHeader(int(fields["n"]), int(fields["N"]), int(fields["w"]))
    except (KeyError, ValueError) as exc:
        raise TraceFormatError(f"line 1: bad header {first.strip()!r}") from exc
    records = []
    for lineno, line in enumerate(source, start=2):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 3 or parts[2] not in ("M", "R", "W"):
            raise TraceFormatError(f"line {lineno}: expected time<TAB>address<TAB>kind")
        try:
            records.append((int(parts[0]), int(parts[1]), parts[2]))
        except ValueError as exc:
            raise TraceFormatError(f"line {lineno}: non-integer field") from exc
    return header, records
