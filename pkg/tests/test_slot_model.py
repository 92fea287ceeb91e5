import io
import random

import pytest

from slotdict.slot_model import (AccessTrace, CellMemory, SlotArray, SlotError, TraceFormatError, TraceHeader,
                                 load_trace, replay_writes, save_trace, write_header, write_records)


def test_move_example():
    s = SlotArray(8)
    s.place(7, 2, 0)
    s.move(2, 5, 3)
    assert s.contents[5] == 7 and s.contents[2] is None
    assert list(s.trace)[-2:] == [(3, 2, "F"), (3, 5, "T")]
    assert s.move_count == 2


def test_move_errors():
    s = SlotArray(4)
    with pytest.raises(SlotError):
        s.move(0, 1, 0)
    s.place(1, 0, 0)
    s.place(2, 1, 0)
    with pytest.raises(SlotError):
        s.move(0, 1, 0)


def test_swap_is_one_unit():
    s = SlotArray(6)
    s.place(10, 1, 0)
    s.place(40, 4, 0)
    before = s.move_count
    s.swap(1, 4, 1)
    assert s.move_count == before + 1
    assert s.contents[1] == 40 and s.contents[4] == 10
    assert [r for r in s.trace if r[0] == 1] == [(1, 1, "S"), (1, 4, "S")]


def test_place_evict():
    s = SlotArray(3)
    s.place(9, 0, 1)
    assert s.contents[0] == 9 and list(s.trace) == [(1, 0, "T")]
    assert s.evict(0, 2) == 9
    assert s.contents[0] is None and list(s.trace)[-1] == (2, 0, "F")
    assert s.move_count == 1
    s.place(3, 0, 3)
    with pytest.raises(SlotError):
        s.place(4, 0, 3)
    with pytest.raises(SlotError):
        s.place(3, 1, 3)


def test_trace_time_monotone():
    s = SlotArray(2)
    s.place(1, 0, 5)
    with pytest.raises(SlotError):
        s.place(2, 1, 4)


def test_relocate_and_shift():
    s = SlotArray(5)
    for k, slot in [(30, 0), (10, 1), (20, 3)]:
        s.place(k, slot, 0)
    assert s.relocate({30: 3, 20: 0, 10: 1}, 1) == 2
    assert s.contents[:4] == [20, 10, None, 30]
    with pytest.raises(SlotError):
        s.relocate({20: 1}, 1)
    s2 = SlotArray(5)
    for i in range(3):
        s2.place(i, i, 0)
    assert s2.shift(0, 3, 1, 1) == 3
    assert s2.contents == [None, 0, 1, 2, None]
    assert s2.slot_of(2) == 3


def test_conservation_and_injectivity_fuzz():
    rng = random.Random(5)
    s = SlotArray(16)
    keys = iter(range(10**6))
    for t in range(3000):
        full = [i for i, k in enumerate(s.contents) if k is not None]
        empty = [i for i, k in enumerate(s.contents) if k is None]
        op = rng.randrange(4)
        if op == 0 and empty:
            s.place(next(keys), rng.choice(empty), t)
        elif op == 1 and full:
            s.evict(rng.choice(full), t)
        elif op == 2 and full and empty:
            s.move(rng.choice(full), rng.choice(empty), t)
        elif op == 3 and len(full) >= 2:
            a, b = rng.sample(full, 2)
            s.swap(a, b, t)
        stored = [k for k in s.contents if k is not None]
        assert len(stored) == len(set(stored)) == len(s)
    assert s.move_count == s.trace.count("T") + s.trace.count("S") // 2


def test_cell_memory():
    m = CellMemory(8, 16)
    m.write(3, 0xBEEF, 0)
    assert m.read(3, 1) == 0xBEEF
    assert len(m.trace) == 2
    before = list(m.cells)
    m.read(2, 2)
    assert m.cells == before
    with pytest.raises(SlotError):
        m.write(0, 1 << 16, 3)
    with pytest.raises(SlotError):
        m.read(8, 3)


def test_cell_memory_from_budget():
    m = CellMemory.from_budget(1 << 10, 4, 100, word_bits=10)
    import math
    assert m.cell_count == math.ceil((math.log2(math.comb(1 << 10, 4)) + 100) / 10)


def test_replay_reproduces_contents():
    rng = random.Random(2)
    m = CellMemory(10, 12)
    for t in range(200):
        if rng.random() < 0.6:
            m.write(rng.randrange(10), rng.randrange(1 << 12), t)
        else:
            m.read(rng.randrange(10), t)
    again = replay_writes(m.trace, m.write_log, 10, 12)
    assert again.cells == m.cells


def test_trace_file_round_trip(tmp_path):
    s = SlotArray(4)
    s.place(5, 0, -1)
    s.move(0, 2, 0)
    s.place(6, 0, 1)
    path = tmp_path / "t.trace"
    save_trace(str(path), s.trace, TraceHeader(4, 2, 8))
    with open(path) as fh:
        header, recs = load_trace(fh)
    assert header == TraceHeader(4, 2, 8)
    assert recs == [(-1, 0, "M"), (0, 0, "M"), (0, 2, "M"), (1, 0, "M")]


def test_trace_streaming_sink():
    out = io.StringIO()
    tr = AccessTrace(sink=out, chunk=4)
    for t in range(10):
        tr.append(t, t % 3, "T")
    tr.flush()
    assert len(tr) == 10
    assert out.getvalue().count("\n") == 10


def test_load_trace_errors():
    with pytest.raises(TraceFormatError):
        load_trace(io.StringIO("0\t1\tM\n"))
    buf = io.StringIO()
    write_header(buf, TraceHeader(1, 1, 1))
    write_records(buf, [0], [1], ["Q"])
    buf.seek(0)
    with pytest.raises(TraceFormatError, match="line 2"):
        load_trace(buf)
