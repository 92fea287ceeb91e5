import math

import pytest

from slotdict.harness import (AMORTIZED_MOVE_CONSTANT, BudgetViolation, make_dict, run_sequence, sweep_cell,
                              budget_for_k)
from slotdict.workload import generate


@pytest.mark.parametrize("name", ["lazysort", "linear-probe", "eager", "kv-lazysort"])
def test_each_dict_verifies(name):
    seq = generate(128, 128 * 128, 5)
    d = make_dict(name, 128, 128 * 128, 1024, V=16)
    rep = run_sequence(d, seq, verify=True)
    assert rep.n_meta == 128 and rep.query_checks == 128
    assert rep.amortized_moves == rep.total_moves / 128


def test_budget_violation_reported():
    seq = generate(64, 4096, 1)
    d = make_dict("lazysort", 64, 4096, 4000)
    with pytest.raises(BudgetViolation):
        run_sequence(d, seq, check_budget=True, budget_bits=100)


def test_unknown_dict():
    with pytest.raises(ValueError):
        make_dict("nope", 4, 64)
    with pytest.raises(ValueError):
        make_dict("kv-lazysort", 4, 64, V=5)


def test_budget_for_k():
    assert budget_for_k(65536, 2) == 65536 * 4
    assert budget_for_k(65536, 1) == 65536 * 16


def test_sweep_skips_infeasible():
    row = sweep_cell(64, 4, 0)
    assert row.status == "skipped" and math.isnan(row.amortized_moves)
    row = sweep_cell(256, 1, 0)
    assert row.status == "ok" and row.amortized_moves < AMORTIZED_MOVE_CONSTANT * 3
