import itertools
import math

import pytest

from slotdict.mathkit import (IterLogTable, SubsetRank, ceil_log2_binom, iter_log, log_binomial, log_star,
                              subset_rank, subset_unrank)


def test_iter_log_examples():
    assert iter_log(65536, 0) == 65536
    assert iter_log(65536, 2) == pytest.approx(4)
    assert iter_log(16, 3) == pytest.approx(1)


def test_iter_log_too_deep():
    with pytest.raises(ValueError):
        iter_log(16, log_star(16) + 2)
    with pytest.raises(ValueError):
        iter_log(1, 0)


@pytest.mark.parametrize("n,expected", [(1, 0), (2, 1), (4, 2), (16, 3), (65536, 4), (2**20, 5)])
def test_log_star(n, expected):
    assert log_star(n) == expected


def test_log_star_never_large():
    assert log_star(2.0 ** 1023) <= 5


def test_iter_log_monotone():
    for n in (5, 100, 4096, 2**40):
        tab = IterLogTable.build(n)
        assert tab.values[0] == n
        assert all(a > b for a, b in zip(tab.values, tab.values[1:]))
        assert tab.values[-1] <= 2


def test_log_binomial_examples():
    assert log_binomial(4, 2) == pytest.approx(math.log2(6), rel=1e-9)
    assert log_binomial(10, 5) == pytest.approx(math.log2(252), rel=1e-9)
    assert log_binomial(9, 0) == 0


def test_log_binomial_errors():
    with pytest.raises(ValueError):
        log_binomial(3, 4)
    with pytest.raises(ValueError):
        log_binomial(3, -1)


def test_log_binomial_vs_exact():
    for n in range(1, 65):
        for b in range(n + 1):
            exact = (math.comb(n, b) - 1).bit_length()
            assert log_binomial(n, b) >= exact - 1
            assert ceil_log2_binom(n, b) == exact


def test_ceil_log2_binom_large_matches_exact():
    for n, b in [(4096, 300), (1 << 14, 5000), (1000, 500)]:
        assert ceil_log2_binom(n, b) == (math.comb(n, b) - 1).bit_length()


def test_rank_examples():
    assert subset_rank([0, 1], 4).rank == 0
    assert subset_rank([2, 3], 4).rank == 5
    assert subset_rank([2, 3], 4).bits == 3


def test_rank_exhaustive_round_trip():
    for n in range(0, 13):
        for b in range(n + 1):
            for r, combo in enumerate(itertools.combinations(range(n), b)):
                code = subset_rank(combo, n)
                assert code.rank == r
                assert subset_unrank(code) == list(combo)


@pytest.mark.parametrize("bad", [[1, 1], [3, 2], [0, 4], [-1]])
def test_rank_rejects(bad):
    with pytest.raises(ValueError):
        subset_rank(bad, 4)


def test_unrank_range():
    with pytest.raises(ValueError):
        subset_unrank(SubsetRank(4, 2, 6))
