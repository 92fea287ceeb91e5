import random

import pytest

from slotdict.transfer_tree import (TreeSpec, TreeSpecError, assign_costs, build_spec, build_uniform_spec,
                                    distinct_touches, level_summary, probe_per_node)


def test_widths_example():
    spec = build_spec(1 << 16, 4, 1.0)
    assert spec.widths == (1, 4096, 16384, 32768, 65536)
    assert spec.branchings == (4096, 4, 2, 2)


def test_small_n_falls_back_to_binary():
    spec = build_spec(8, 3, 1.0)
    assert spec.fallback
    assert spec.branchings == (2, 2, 2)


def test_errors():
    with pytest.raises(TreeSpecError, match="height is 0"):
        build_spec(16, 1, 100.0)
    with pytest.raises(TreeSpecError):
        build_spec(16, 5)
    with pytest.raises(TreeSpecError):
        TreeSpec(8, (1, 3, 8))


def test_divisor_chain_everywhere():
    for n in (12, 100, 360, 1000, 4096, 5040):
        for k in range(1, 4):
            try:
                spec = build_spec(n, k)
            except TreeSpecError:
                continue
            w = spec.widths
            assert w[0] == 1 and w[-1] == n
            assert all(w[i] % w[i - 1] == 0 for i in range(1, len(w)))


def test_hand_lca():
    spec = build_uniform_spec(8, 2)
    costs = assign_costs([(0, 7), (3, 7), (4, 7)], spec)
    assert costs[(2, 0)] == 1
    assert costs[(3, 0)] == 1
    assert sum(costs.values()) == 2


def test_single_touch_costs_zero():
    spec = build_uniform_spec(8, 2)
    costs = assign_costs([(t, t) for t in range(8)], spec)
    assert not any(costs.values())
    probes = probe_per_node([(t, t) for t in range(8)], spec)
    assert all(probes[(1, i)] == 2 for i in range(4))


def test_empty_trace():
    spec = build_uniform_spec(4, 2)
    assert not any(assign_costs([], spec).values())
    assert not any(probe_per_node([], spec).values())
    rows = level_summary({}, {}, spec)
    assert len(rows) == spec.height and all(r.sum_cost == r.sum_probe == 0 for r in rows)


def test_out_of_range():
    spec = build_uniform_spec(4, 2)
    with pytest.raises(TreeSpecError):
        assign_costs([(4, 0)], spec)
    with pytest.raises(TreeSpecError):
        probe_per_node([(-1, 0)], spec)


def test_duplicates_within_op_collapse():
    spec = build_uniform_spec(4, 2)
    costs = assign_costs([(1, 0), (1, 0), (1, 0), (2, 0)], spec)
    assert sum(costs.values()) == 1


def test_fuzz_conservation_and_partition():
    rng = random.Random(0)
    for _ in range(200):
        spec = build_uniform_spec(2 ** rng.randint(1, 6), 2) if rng.random() < 0.5 else build_uniform_spec(27, 3)
        trace = sorted((rng.randrange(spec.n_leaves), rng.randrange(10)) for _ in range(rng.randint(0, 60)))
        costs = assign_costs(trace, spec)
        touches, addrs = distinct_touches(trace, spec)
        assert sum(costs.values()) == touches - addrs
        rows = level_summary(costs, probe_per_node(trace, spec), spec)
        assert {r.sum_probe for r in rows} <= {len(trace)}


def test_slot_trace_input():
    from slotdict.slot_model import SlotArray
    s = SlotArray(4)
    s.place(1, 0, 0)
    s.move(0, 1, 2)
    s.place(2, 0, 3)
    spec = build_uniform_spec(4, 2)
    costs = assign_costs(s.trace, spec)
    # slot 0 at times 0, 2, 3 and slot 1 at time 2
    assert sum(costs.values()) == 2 == distinct_touches(s.trace, spec)[0] - 2
