import cmath
import math

import pytest
from hypothesis import given, settings, strategies as st

from neurosyntax.errors import NoDecompositionError
from neurosyntax.hopf import UNIT, HopfElement, comultiply, hopf_merge, iterate_merge
from neurosyntax.signals import circular_distance

amps = st.floats(1e-3, 10)
phs = st.floats(0, 6.283)
elements = st.builds(HopfElement, amps, phs)


def test_merge_example():
    m = hopf_merge(HopfElement(2, math.pi / 4), HopfElement(3, math.pi / 4))
    assert m.amplitude == pytest.approx(6)
    assert m.phase == pytest.approx(math.pi / 2)


def test_unit_is_neutral():
    x = HopfElement(1.7, 2.2)
    m = hopf_merge(x, UNIT)
    assert (m.amplitude, m.phase) == (x.amplitude, x.phase)


def test_comultiply_round_trip():
    a, b = HopfElement(0.5, 1.0), HopfElement(3.0, 5.9)
    m = hopf_merge(a, b)
    a2, b2 = comultiply(m)
    again = hopf_merge(a2, b2)
    assert again.amplitude == pytest.approx(m.amplitude, rel=1e-12)
    assert circular_distance(again.phase, m.phase) < 1e-12
    with pytest.raises(NoDecompositionError):
        comultiply(a)
    parts = comultiply(hopf_merge(UNIT, b))
    assert UNIT in parts


def test_bands_must_be_consistent():
    with pytest.raises(ValueError):
        HopfElement(2.0, 0.0, (HopfElement(1.0, 0.0), HopfElement(1.0, 0.0)))
    with pytest.raises(ValueError):
        HopfElement(-1.0, 0.0)


def test_iterate_examples():
    x0 = HopfElement(2.0, 0.1)
    assert iterate_merge(x0, HopfElement(3.0, 1.0), 0) == x0
    r = iterate_merge(x0, HopfElement(1.0, 0.4), 5)
    assert r.amplitude == pytest.approx(2.0)
    assert r.phase == pytest.approx(2.1)
    r = iterate_merge(x0, HopfElement(0.5, 0.2), 3)
    assert r.amplitude == pytest.approx(0.25)
    assert r.phase == pytest.approx(0.7)


@settings(max_examples=100)
@given(elements, elements)
def test_merge_commutes(x, y):
    a, b = hopf_merge(x, y), hopf_merge(y, x)
    assert a.amplitude == b.amplitude and a.phase == b.phase


@settings(max_examples=100)
@given(elements, elements, elements)
def test_merge_associative_in_value(a, b, c):
    l = hopf_merge(hopf_merge(a, b), c)
    r = hopf_merge(a, hopf_merge(b, c))
    assert l.amplitude == pytest.approx(r.amplitude, rel=1e-12)
    assert circular_distance(l.phase, r.phase) < 1e-12


@settings(max_examples=100)
@given(elements, elements)
def test_log_amplitude_additive_and_complex_product(x, y):
    m = hopf_merge(x, y)
    assert math.log(m.amplitude) == pytest.approx(math.log(x.amplitude) + math.log(y.amplitude), abs=1e-9)
    assert abs(m.value - x.value * y.value) < 1e-9 * max(1.0, abs(m.value))


@settings(max_examples=50)
@given(elements, elements, st.integers(0, 12))
def test_iterate_equals_explicit_loop(x, z, n):
    y = x
    for _ in range(n):
        y = hopf_merge(y, z)
    r = iterate_merge(x, z, n)
    assert (r.amplitude, r.phase) == (y.amplitude, y.phase)


def test_json_round_trip():
    m = hopf_merge(HopfElement(2, 1), hopf_merge(HopfElement(0.5, 2), HopfElement(3, 4)))
    assert HopfElement.from_json_obj(m.to_json_obj()) == m
    assert set(HopfElement(1, 1).to_json_obj()) == {"amplitude", "phase"}
    assert m.value == pytest.approx(cmath.rect(m.amplitude, m.phase))
