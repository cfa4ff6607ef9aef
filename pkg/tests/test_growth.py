from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cofinal.errors import InputError
from cofinal.growth import (
    Logarithm,
    Power,
    RunningMax,
    Scaled,
    Table,
    monotone_increasing_envelope,
    parse_growth,
    ratio_decreasing_envelope,
)

fracs = st.fractions(min_value=0, max_value=1000, max_denominator=50)


@given(st.integers(1, 10 ** 6), fracs)
def test_sqrt_comparison_is_exact(n, q):
    f = Power(1, 2)
    expected = (n > q * q) - (n < q * q)
    assert f.compare(n, q) == expected


@given(st.integers(1, 2 ** 80), st.integers(0, 100))
def test_log2_comparison_is_exact(n, q):
    expected = (n > 2 ** q) - (n < 2 ** q)
    assert Logarithm(2).compare(n, q) == expected


def test_log_near_large_powers():
    f = Logarithm(2)
    assert f.compare(2 ** 65, 65) == 0
    assert f.compare(2 ** 65 - 1, 65) == -1
    assert f.exact(2 ** 65) == 65 and f.exact(12) is None


def test_power_with_coefficient():
    # (2 n^2)^(1/4) at n = 8 is 128^(1/4)
    f = Power(2, 4, 2)
    assert f.compare(8, 3) == 1 and f.compare(8, 4) == -1
    assert Power(1, 2).exact(49) == 7 and Power(1, 2).exact(50) is None
    assert Power.of("0.5") == Power(1, 2)
    assert Power(1, 2).sublinear and not Power(1, 1).sublinear


def test_monotone_envelope():
    assert monotone_increasing_envelope(Table((1, 5, 2, 3))).values == tuple(map(Fraction, (1, 5, 5, 5)))
    assert monotone_increasing_envelope(Table((0, 0, 7))).values == tuple(map(Fraction, (0, 0, 7)))
    p = Power(1, 2)
    assert monotone_increasing_envelope(p) is p


@given(st.lists(fracs, min_size=1, max_size=12))
def test_monotone_envelope_properties(vals):
    t = Table(tuple(vals))
    env = monotone_increasing_envelope(t)
    for n in range(1, len(vals) + 3):
        assert env.value(n) >= t.value(n)
        assert env.value(n) <= env.value(n + 1)


@given(st.lists(fracs, min_size=1, max_size=12))
def test_ratio_envelope_properties(vals):
    t = Table(tuple(vals))
    h = len(vals)
    env = ratio_decreasing_envelope(t, horizon=h)
    for n in range(1, h + 1):
        assert env.value(n) >= t.value(n)
        brute = n * max(t.value(m) / m for m in range(n, h + 1))
        assert env.value(n) == brute
        if n < h:
            assert env.value(n + 1) / (n + 1) <= env.value(n) / n
    with pytest.raises(InputError):
        env.value(h + 1)


def test_ratio_envelope_examples():
    assert ratio_decreasing_envelope(Table((3, 2, 2)), 3).values == tuple(map(Fraction, (3, 2, 2)))
    assert ratio_decreasing_envelope(Table((5, 5, 5)), 3).values == tuple(map(Fraction, (5, 5, 5)))
    p = Power(1, 2)
    assert ratio_decreasing_envelope(p) is p
    with pytest.raises(InputError):
        ratio_decreasing_envelope(Table((1, 2)))
    with pytest.raises(InputError):
        ratio_decreasing_envelope(Power(1, 1))


def test_log_ratio_envelope_dominates():
    env = ratio_decreasing_envelope(Logarithm(2))
    for n in range(1, 60):
        assert env.approx(n) >= Logarithm(2).approx(n) - 1e-12
        assert env.approx(n + 1) / (n + 1) <= env.approx(n) / n + 1e-12


def test_scaled_and_running_max():
    s = Scaled(3, Power(1, 2))
    assert s.compare(4, 6) == 0 and s.compare(4, 7) == -1
    r = RunningMax(Table((1, 5, 2), extend=True))
    assert r.compare(3, 5) == 0


def test_parse_growth():
    assert parse_growth("power:1/2") == Power(1, 2)
    assert parse_growth("power:0.5") == Power(1, 2)
    assert parse_growth("log:2") == Logarithm(2)
    assert parse_growth("table:1,2,3").values[-1] == 3
    assert parse_growth("const:7").bounded_above() == 7
    assert parse_growth("scaled:2:log:2").compare(8, 6) == 0
    for bad in ("power:x", "cubic:3", "table:"):
        with pytest.raises(InputError):
            parse_growth(bad)


def test_describe():
    assert Power(1, 2).describe() == "power:1/2"
    assert Logarithm(2).describe() == "log:2"
