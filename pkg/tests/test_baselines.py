import random

import pytest

from slotdict.baselines import EagerSortedDict, LinearProbeDict
from slotdict.lazysort import DictFull, KeyAbsent, KeyPresent


def _fuzz(d, U, steps, rng):
    oracle = set()
    for _ in range(steps):
        r = rng.random()
        if r < 0.4 and len(oracle) < d.n:
            k = rng.randrange(U)
            if k in oracle:
                with pytest.raises(KeyPresent):
                    d.insert(k)
            else:
                d.insert(k)
                oracle.add(k)
        elif r < 0.75 and oracle:
            k = rng.choice(sorted(oracle))
            d.delete(k)
            oracle.remove(k)
        else:
            k = rng.randrange(U)
            assert d.query(k)[0] == (k in oracle)
    return oracle


def test_linear_probe_fuzz():
    rng = random.Random(1)
    # small universe forces clustering, so backward shift deletes get exercised
    d = LinearProbeDict(64, 400, seed=3)
    oracle = _fuzz(d, 400, 10_000, rng)
    assert {k for k in d.slots.contents if k is not None} == oracle
    for k in oracle:
        home, slot = d.home(k), d.query(k)[1]
        run = [(home + i) % d.capacity for i in range((slot - home) % d.capacity + 1)]
        assert all(d.slots.contents[s] is not None for s in run)


def test_linear_probe_basics():
    d = LinearProbeDict(2, 100)
    d.insert(5)
    assert d.query(5)[0]
    assert d.aux_bits() == 0
    assert d.space_bits() == 4 * 7
    d.insert(6)
    with pytest.raises(DictFull):
        d.insert(7)
    with pytest.raises(KeyAbsent):
        d.delete(99)


def test_eager_shift_cost():
    n = 32
    d = EagerSortedDict(n, 1000)
    d.bulk_init(range(100, 100 + n - 1))
    before = d.move_count
    d.insert(1)
    assert d.move_count - before == n
    assert d.slots.contents == sorted(d.slots.contents)
    before = d.move_count
    assert d.query(50) == (False, None)
    assert d.move_count == before
    assert d.aux_bits() == 0


def test_eager_fuzz():
    rng = random.Random(9)
    d = EagerSortedDict(50, 300)
    oracle = _fuzz(d, 300, 5000, rng)
    assert d.slots.contents[:len(oracle)] == sorted(oracle)
