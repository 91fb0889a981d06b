import pytest

import ptensor


def test_counts():
    assert [ptensor.bell(n) for n in range(6)] == [1, 1, 2, 5, 15, 52]
    assert ptensor.count(2, 2) == 15
    assert [ptensor.count(k, kp, "overlap") for k, kp in [(1, 1), (1, 2), (2, 2), (2, 3), (3, 3)]] == [5, 17, 63, 275, 1277]
    assert ptensor.count(10, 10) == ptensor.bell(20)


def test_enumerate():
    assert ptensor.enumerate(1, 1) == [
        "out[a] = in[a]",
        "out[a] = sum_{c in D1} in[c] for all a in D2",
    ]
    assert len(ptensor.enumerate(1, 1, "overlap")) == 5


def test_oracles_agree():
    for k in range(3):
        for kp in range(3):
            assert ptensor.span_rank(k, kp, 1, 2, 1) == ptensor.burnside_dimension(k, kp, 1, 2, 1)
    assert ptensor.burnside_dimension(1, 1, 2, 2, 2) == 5


def test_demo():
    cfg = '{"v":1,"numeric":"integer","layers":[{"kind":"mpnn","order":0,"channels":2},' \
          '{"kind":"edge","order":1,"channels":2,"policy":"edges"}]}'
    a = ptensor.demo("3 2\n0 1\n1 2\n", cfg, seed=1)
    b = ptensor.demo("3 2\n2 1\n1 0\n", cfg, seed=1)
    assert a == b
    assert len(a) == 2


def test_errors():
    with pytest.raises(ptensor.SizeError):
        ptensor.count(20, 20)
    with pytest.raises(ptensor.ParseError):
        ptensor.demo("3 1\n0 5\n", '{"v":1,"layers":[]}')
    with pytest.raises(ptensor.ConfigError):
        ptensor.demo("2 1\n0 1\n", '{"v":1,"layers":[{"kind":"warp"}]}')
    with pytest.raises(ptensor.Error):
        ptensor.count(-1, 0)
