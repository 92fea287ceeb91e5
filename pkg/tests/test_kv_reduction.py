import random

import pytest

from slotdict.kv_reduction import CollisionOverflow, CollisionTable, ReducedKeyDict, collision_cap, merge, split
from slotdict.lazysort import KeyAbsent, KeyPresent


def test_split_merge():
    assert split(0, 4, 8) == (0, 0)
    assert split(19, 4, 8) == (2, 3)
    assert merge(2, 3, 4, 8) == 19
    assert all(merge(*split(x, 8, 8), 8, 8) == x for x in range(64))
    with pytest.raises(ValueError):
        split(32, 4, 8)


def test_wrong_value_not_found():
    d = ReducedKeyDict(4, 16, 8, budget_bits=1000)
    d.bulk_init([])
    d.insert(19)
    assert d.query(19)[0]
    assert not d.query(merge(2, 5, 16, 8))[0]


def test_collision_path():
    d = ReducedKeyDict(4, 16, 8, budget_bits=1000)
    d.bulk_init([])
    d.insert(merge(2, 3, 16, 8))
    d.insert(merge(2, 6, 16, 8))
    assert len(d.collisions) == 1
    assert d.query(merge(2, 3, 16, 8))[0] and d.query(merge(2, 6, 16, 8))[0]
    with pytest.raises(KeyPresent):
        d.insert(merge(2, 6, 16, 8))
    d.delete(merge(2, 6, 16, 8))
    assert len(d.collisions) == 0
    with pytest.raises(KeyAbsent):
        d.delete(merge(2, 6, 16, 8))


def test_collision_cap():
    assert collision_cap(4096, 1 << 24) == 24
    t = CollisionTable(1)
    t.add(5)
    with pytest.raises(CollisionOverflow):
        t.add(6)


def test_fuzz_against_set():
    rng = random.Random(8)
    U, V, n = 64, 16, 24
    d = ReducedKeyDict(n, U, V, budget_bits=4000)
    init = rng.sample(range(U * V), 10)
    d.bulk_init(init)
    oracle = set(init)
    for _ in range(3000):
        x = rng.randrange(U * V)
        r = rng.random()
        if r < 0.4 and x not in oracle and len(d.backing) < n:
            try:
                d.insert(x)
            except Exception:
                raise
            oracle.add(x)
        elif r < 0.8 and oracle:
            y = rng.choice(sorted(oracle))
            d.delete(y)
            oracle.remove(y)
        assert d.query(x)[0] == (x in oracle)
    assert all(d.query(x)[0] == (x in oracle) for x in range(U * V))
