"""1-bit retrieval structure separating two disjoint key sets.

Every key of A u B is an edge of a 3-partite hypergraph on ``table_size`` cells
(one cell per third of the table). After peeling, cells are assigned so that the
XOR of a key's three cells is 1 for keys of A and 0 for keys of B. Keys outside
A u B get an arbitrary answer.

Byte layout (little-endian):
    u32 table_size | u32 seed | u8 flags (bits 0-3 attempt, bit 4 fallback)
    then ceil(table_size / 8) bytes of table bits, bit i at byte i // 8, bit i % 8;
    with the fallback flag: u8 key_bits, u32 count, then count keys of ceil(key_bits / 8) bytes.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

LOAD = 1.23
MAX_ATTEMPTS = 16
HEADER_BITS = 32 + 32 + 8
_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


class BloomierError(ValueError):
    pass


def _mix(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def _cells(keys: np.ndarray, seed: int, attempt: int, block: int) -> np.ndarray:
    """(len(keys), 3) cell indices; column i lies in [i*block, (i+1)*block)."""
    salt = np.uint64(((seed << 8) | attempt) * 0x9E3779B97F4A7C15 & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        h = _mix(keys ^ salt)
        out = np.empty((keys.size, 3), dtype=np.int64)
        b = np.uint64(block)
        out[:, 0] = ((h & np.uint64(0xFFFFFFFF)) * b >> np.uint64(32)).astype(np.int64)
        out[:, 1] = ((h >> np.uint64(32)) * b >> np.uint64(32)).astype(np.int64) + block
        h2 = _mix(h + np.uint64(0x9E3779B97F4A7C15))
        out[:, 2] = ((h2 & np.uint64(0xFFFFFFFF)) * b >> np.uint64(32)).astype(np.int64) + 2 * block
    return out


def _peel(edges: list[tuple[int, int, int]], m: int) -> Optional[list[tuple[int, int]]]:
    """Peeling order as (edge, free cell) pairs, or None when a 2-core remains."""
    degree = [0] * m
    xor_edge = [0] * m
    for e, (x, y, z) in enumerate(edges):
        degree[x] += 1
        degree[y] += 1
        degree[z] += 1
        xor_edge[x] ^= e
        xor_edge[y] ^= e
        xor_edge[z] ^= e
    stack = [v for v in range(m) if degree[v] == 1]
    order = []
    while stack:
        v = stack.pop()
        if degree[v] != 1:
            continue
        e = xor_edge[v]
        order.append((e, v))
        for u in edges[e]:
            degree[u] -= 1
            xor_edge[u] ^= e
            if degree[u] == 1:
                stack.append(u)
    return order if len(order) == len(edges) else None


@dataclass
class BloomierEncoding:
    table_size: int
    seed: int
    attempt: int
    bits: np.ndarray  # uint8 0/1 per cell
    fallback: Optional[frozenset] = None
    key_bits: int = 64
    _block: int = field(init=False, repr=False)

    def __post_init__(self):
        self._block = self.table_size // 3

    def size_bits(self) -> int:
        if self.fallback is not None:
            return HEADER_BITS + 8 + 32 + len(self.fallback) * self.key_bits
        return HEADER_BITS + self.table_size

    def query(self, x: int) -> bool:
        return bool(self.query_many(np.asarray([x], dtype=np.uint64))[0])

    def query_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.uint64)
        if self.fallback is not None:
            return np.fromiter((int(x) in self.fallback for x in xs), dtype=bool, count=xs.size)
        if self.table_size == 0:
            return np.zeros(xs.size, dtype=bool)
        c = _cells(xs, self.seed, self.attempt, self._block)
        return (self.bits[c[:, 0]] ^ self.bits[c[:, 1]] ^ self.bits[c[:, 2]]).astype(bool)

    def to_bytes(self) -> bytes:
        flags = (self.attempt & 0xF) | (0x10 if self.fallback is not None else 0)
        head = struct.pack("<IIB", self.table_size, self.seed, flags)
        if self.fallback is not None:
            width = (self.key_bits + 7) // 8
            body = struct.pack("<BI", self.key_bits, len(self.fallback))
            body += b"".join(k.to_bytes(width, "little") for k in sorted(self.fallback))
            return head + body
        return head + np.packbits(self.bits, bitorder="little").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "BloomierEncoding":
        table_size, seed, flags = struct.unpack_from("<IIB", data)
        off = struct.calcsize("<IIB")
        attempt = flags & 0xF
        if flags & 0x10:
            key_bits, count = struct.unpack_from("<BI", data, off)
            off += struct.calcsize("<BI")
            width = (key_bits + 7) // 8
            keys = frozenset(int.from_bytes(data[off + i * width: off + (i + 1) * width], "little")
                             for i in range(count))
            return cls(table_size, seed, attempt, np.zeros(0, np.uint8), keys, key_bits)
        raw = np.frombuffer(data, dtype=np.uint8, offset=off)
        bits = np.unpackbits(raw, bitorder="little")[:table_size].astype(np.uint8)
        return cls(table_size, seed, attempt, bits)


def build(A: Iterable[int], B: Iterable[int], seed: int = 0, key_bits: int = 64) -> BloomierEncoding:
    """Encode some S with A a subset of S and S disjoint from B."""
    A, B = set(A), set(B)
    if A & B:
        raise BloomierError(f"A and B share {len(A & B)} keys")
    seed &= 0xFFFFFFFF
    total = len(A) + len(B)
    if total == 0:
        return BloomierEncoding(0, seed, 0, np.zeros(0, np.uint8))
    block = max(1, math.ceil(math.ceil(LOAD * total) / 3))
    m = 3 * block
    keys = np.fromiter(list(A) + list(B), dtype=np.uint64, count=total)
    want = [1] * len(A) + [0] * len(B)
    for attempt in range(MAX_ATTEMPTS):
        cells = _cells(keys, seed, attempt, block)
        edges = list(map(tuple, cells.tolist()))
        order = _peel(edges, m)
        if order is None:
            continue
        bits = [0] * m
        for e, v in reversed(order):
            x, y, z = edges[e]
            bits[v] = want[e] ^ bits[x] ^ bits[y] ^ bits[z] ^ bits[v]
        return BloomierEncoding(m, seed, attempt, np.asarray(bits, dtype=np.uint8))
    return BloomierEncoding(m, seed, MAX_ATTEMPTS - 1, np.zeros(0, np.uint8), frozenset(A), key_bits)


def query(enc: BloomierEncoding, x: int) -> bool:
    return enc.query(x)
