"""Three cells holding keys x1 in [0, 3U), x2 in [3U, 4U), x3 in [4U, 5U).

The base contents are C1 = x2, C2 = x3, C3 = x2 ^ x3; x1 is XORed into the cell
named by its range (case 1: [0, U), case 2: [U, 2U), case 3: [2U, 3U)). The
case number lives in a few bits of side memory that is not probed.

Replacing x1 only touches the cell that held the old x1 and the cell that will
hold the new one.
"""
from __future__ import annotations

from dataclasses import dataclass

from .slot_model import CellMemory


class NotGoodCase(ValueError):
    pass


def case_of(x1: int, U: int) -> int:
    if not 0 <= x1 < 3 * U:
        raise NotGoodCase(f"x1 = {x1} outside [0, {3 * U})")
    return x1 // U + 1


class XorTriple:
    def __init__(self, U: int, x1: int, x2: int, x3: int):
        if not (3 * U <= x2 < 4 * U and 4 * U <= x3 < 5 * U):
            raise NotGoodCase("x2 must lie in [3U, 4U) and x3 in [4U, 5U)")
        self.U = U
        self.mem = CellMemory(3, (5 * U - 1).bit_length())
        self.case = case_of(x1, U)
        self.x1 = x1
        base = [x2, x3, x2 ^ x3]
        base[self.case - 1] ^= x1
        for i, word in enumerate(base):
            self.mem.cells[i] = word  # initial layout is free; probes start at the first update

    def replace_x1(self, new_x1: int, time: int) -> set[int]:
        """Delete the current x1 and insert ``new_x1``; returns the probed cell numbers (1-based)."""
        src, dst = self.case, case_of(new_x1, self.U)
        i, j = src - 1, dst - 1
        base_i = self.mem.read(i, time) ^ self.x1
        if i == j:
            self.mem.write(i, base_i ^ new_x1, time)
        else:
            base_j = self.mem.read(j, time)
            self.mem.write(i, base_i, time)
            self.mem.write(j, base_j ^ new_x1, time)
        self.case, self.x1 = dst, new_x1
        return {a + 1 for a in self.mem.probes(time)}

    def decode(self) -> tuple[int, int, int]:
        c = list(self.mem.cells)
        c[self.case - 1] ^= self.x1
        return self.x1, c[0], c[1]

    @property
    def c2(self) -> int:
        return self.mem.cells[1]


@dataclass
class DemoReport:
    probes_a: set[int]
    probes_b: set[int]
    shared: set[int]
    c2_a: int
    c2_b: int
    c1_a: int

    @property
    def ok(self) -> bool:
        return (self.probes_a == {1, 2} and self.probes_b == {2, 3}
                and self.shared == {2} and self.c2_a == self.c2_b)

    def lines(self) -> list[str]:
        return [
            f"path A probes: {{{', '.join(f'C{i}' for i in sorted(self.probes_a))}}}",
            f"path B probes: {{{', '.join(f'C{i}' for i in sorted(self.probes_b))}}}",
            f"shared probes: {{{', '.join(f'C{i}' for i in sorted(self.shared))}}}",
            f"C2 after A = {self.c2_a}, after B = {self.c2_b}, identical = {self.c2_a == self.c2_b}",
        ]


def run_demo(U: int = 1000, x2: int = 3500, x3: int = 4200, x1_deleted: int = 1100,
             x1_a: int = 500, x1_b: int = 2500) -> DemoReport:
    a = XorTriple(U, x1_deleted, x2, x3)
    probes_a = a.replace_x1(x1_a, 0)
    b = XorTriple(U, x1_deleted, x2, x3)
    probes_b = b.replace_x1(x1_b, 0)
    return DemoReport(probes_a, probes_b, probes_a & probes_b, a.c2, b.c2, a.mem.cells[0])
