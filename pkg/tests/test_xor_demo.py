import pytest

from slotdict.xor_demo import NotGoodCase, XorTriple, case_of, run_demo


def test_demo_report():
    rep = run_demo()
    assert rep.probes_a == {1, 2} and rep.probes_b == {2, 3} and rep.shared == {2}
    assert rep.c2_a == rep.c2_b == 4200
    assert rep.c1_a == 3500 ^ 500
    assert rep.ok


def test_cases():
    assert [case_of(x, 1000) for x in (0, 999, 1000, 2999)] == [1, 1, 2, 3]
    with pytest.raises(NotGoodCase):
        case_of(3000, 1000)
    with pytest.raises(NotGoodCase):
        XorTriple(1000, 5, 2000, 4200)


def test_decode_every_transition():
    for src in (10, 1010, 2010):
        for dst in (20, 1020, 2020):
            t = XorTriple(1000, src, 3100, 4100)
            probed = t.replace_x1(dst, 0)
            assert probed == {case_of(src, 1000), case_of(dst, 1000)}
            assert t.decode() == (dst, 3100, 4100)
