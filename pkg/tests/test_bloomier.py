import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slotdict.bloomier import HEADER_BITS, BloomierEncoding, BloomierError, build, query


def test_tiny():
    enc = build({1}, {2})
    assert query(enc, 1) and not query(enc, 2)


def test_empty_is_header_only():
    enc = build(set(), set())
    assert enc.size_bits() == HEADER_BITS


def test_overlap_rejected():
    with pytest.raises(BloomierError):
        build({1, 2}, {2, 3})


@given(st.sets(st.integers(0, 2**63 - 1), max_size=300), st.sets(st.integers(0, 2**63 - 1), max_size=300),
       st.integers(0, 2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_separation_property(A, B, seed):
    B = B - A
    enc = build(A, B, seed)
    assert all(enc.query_many(sorted(A))) if A else True
    assert not any(enc.query_many(sorted(B))) if B else True


@pytest.mark.parametrize("size", [16, 256, 4096])
def test_size_per_key(size):
    rng = random.Random(size)
    ratios = []
    for seed in range(100 if size < 4096 else 10):
        keys = rng.sample(range(1 << 40), 2 * size)
        enc = build(keys[:size], keys[size:], seed)
        ratios.append(enc.size_bits() / (2 * size))
    assert 1 <= np.mean(ratios) <= 4


def test_serialization_round_trip():
    rng = random.Random(3)
    keys = rng.sample(range(1 << 50), 200)
    enc = build(keys[:100], keys[100:], 77)
    back = BloomierEncoding.from_bytes(enc.to_bytes())
    probe = keys + rng.sample(range(1 << 50), 100)
    assert (back.query_many(probe) == enc.query_many(probe)).all()
    assert back.table_size == enc.table_size and back.seed == enc.seed


def test_fallback_round_trip():
    enc = BloomierEncoding(3, 5, 15, np.zeros(0, np.uint8), frozenset({4, 9}), 16)
    back = BloomierEncoding.from_bytes(enc.to_bytes())
    assert back.query(4) and back.query(9) and not back.query(5)
    assert back.size_bits() == enc.size_bits()
