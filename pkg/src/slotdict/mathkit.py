"""Iterated logarithms, log-binomials and lexicographic subset codecs.

All logarithms are base 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath

# exact big-integer binomials are cheap while the smaller side stays below this
_EXACT_SIDE_LIMIT = 256
_MP_DPS = 60


def log_star(n: float) -> int:
    """Number of times log2 must be applied before the value drops to <= 1."""
    if n < 1:
        raise ValueError(f"log_star needs n >= 1, got {n}")
    steps = 0
    x = n
    while x > 1:
        x = math.log2(x)
        steps += 1
    return steps


def iter_log(n: float, level: int) -> float:
    """l-fold base-2 logarithm of ``n``; ``iter_log(n, 0) == n``."""
    if n < 2:
        raise ValueError(f"iter_log needs n >= 2, got {n}")
    if level < 0:
        raise ValueError(f"level must be non-negative, got {level}")
    limit = log_star(n) + 1
    if level > limit:
        raise ValueError(f"level {level} exceeds log*({n}) + 1 = {limit}")
    x = n
    for _ in range(level):
        if x <= 0:
            raise ValueError(f"log^({level}) {n} is undefined")
        x = math.log2(x)
    return float(x)


@dataclass(frozen=True)
class IterLogTable:
    n: int
    values: tuple[float, ...]

    @classmethod
    def build(cls, n: int) -> "IterLogTable":
        return cls(n, tuple(iter_log(n, j) for j in range(log_star(n) + 1)))


def _check_binom_args(n: int, b: int) -> None:
    if b < 0 or n < 0 or b > n:
        raise ValueError(f"binomial needs 0 <= b <= n, got n={n}, b={b}")


def log_binomial(n: int, b: int) -> float:
    """log2 C(n, b) via log-gamma."""
    _check_binom_args(n, b)
    if b == 0 or b == n:
        return 0.0
    ln = math.lgamma(n + 1) - math.lgamma(b + 1) - math.lgamma(n - b + 1)
    return ln / math.log(2)


@lru_cache(maxsize=1 << 16)
def ceil_log2_binom(n: int, b: int) -> int:
    """Exact ceil(log2 C(n, b)), i.e. the bits needed to store a rank in [0, C(n, b))."""
    _check_binom_args(n, b)
    side = min(b, n - b)
    if side <= _EXACT_SIDE_LIMIT:
        return (math.comb(n, b) - 1).bit_length()
    with mpmath.workdps(_MP_DPS):
        val = (mpmath.loggamma(n + 1) - mpmath.loggamma(b + 1) - mpmath.loggamma(n - b + 1)) / mpmath.log(2)
        nearest = int(mpmath.nint(val))
        if abs(val - nearest) < mpmath.mpf(10) ** (-(_MP_DPS // 2)):
            # only reachable when C(n, b) is a power of two; settle it exactly
            return (math.comb(n, b) - 1).bit_length()
        return int(mpmath.ceil(val))


@dataclass(frozen=True)
class SubsetRank:
    universe_size: int
    subset_size: int
    rank: int

    @property
    def bits(self) -> int:
        return ceil_log2_binom(self.universe_size, self.subset_size)


def _validated(slots: Iterable[int], universe_size: int) -> list[int]:
    out = list(slots)
    for i, s in enumerate(out):
        if not 0 <= s < universe_size:
            raise ValueError(f"slot {s} outside [0, {universe_size})")
        if i and out[i - 1] >= s:
            raise ValueError(f"slots must be strictly increasing, got {out[i - 1]} then {s}")
    return out


def subset_rank(slots: Sequence[int], universe_size: int) -> SubsetRank:
    """Lexicographic rank of a sorted subset of [universe_size]."""
    s = _validated(slots, universe_size)
    n, b = universe_size, len(s)
    # lex rank = C(n,b) - 1 - sum C(n-1-s_i, b-i)  (complemented combinadic)
    total = math.comb(n, b) - 1
    for i, v in enumerate(s):
        total -= math.comb(n - 1 - v, b - i)
    return SubsetRank(n, b, total)


def subset_unrank(code: SubsetRank) -> list[int]:
    n, b, r = code.universe_size, code.subset_size, code.rank
    _check_binom_args(n, b)
    top = math.comb(n, b)
    if not 0 <= r < top:
        raise ValueError(f"rank {r} outside [0, C({n},{b}) = {top})")
    x = top - 1 - r
    out = []
    hi = n  # exclusive bound on the next combinadic digit
    for i in range(b):
        k = b - i
        # largest c < hi with C(c, k) <= x
        lo, up = k - 1, hi - 1
        while lo < up:
            mid = (lo + up + 1) // 2
            if math.comb(mid, k) <= x:
                lo = mid
            else:
                up = mid - 1
        c = lo
        x -= math.comb(c, k)
        out.append(n - 1 - c)
        hi = c
    return out
