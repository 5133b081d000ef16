from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpme.errors import ConfigError, DegenerateScaling, GridOverflow, ZeroMass
from fpme.evolve import mollified_dirac
from fpme.grid import Field, Grid
from fpme.params import (Params, RegimeTag, classify, critical_exponents, exponents, is_borderline,
                         mass_denormalize, mass_normalize, rescale_solution)

HALF = Fraction(1, 2)


def test_slow_exponents():
    e = exponents(Params(1, HALF, 2))
    assert e.alpha == pytest.approx(0.5) and e.beta == pytest.approx(0.5)


def test_linear_exponents_match_kernel_scaling():
    e = exponents(Params(3, 0.8, 1))
    assert e.alpha == pytest.approx(1.875) and e.beta == pytest.approx(0.625)
    assert e.alpha == pytest.approx(3 / (2 * 0.8))


def test_degenerate_denominator():
    with pytest.raises(DegenerateScaling):
        exponents(Params(3, HALF, Fraction(2, 3)))


def test_critical_exponents_values():
    mc, m1 = critical_exponents(3, 0.8)
    assert mc == pytest.approx(0.46667, abs=1e-5) and m1 == pytest.approx(0.65217, abs=1e-5)
    assert critical_exponents(1, HALF) == (0, HALF)


@pytest.mark.parametrize("N,s,m,tag", [
    (2, 0.5, 0.4, RegimeTag.SUBCRITICAL),
    (1, HALF, Fraction(1, 3), RegimeTag.FAST_SINGULAR),
    (1, HALF, HALF, RegimeTag.BORDERLINE),
    (1, HALF, Fraction(3, 4), RegimeTag.FAST_REGULAR),
    (1, HALF, 1, RegimeTag.LINEAR),
    (1, HALF, 2, RegimeTag.SLOW),
])
def test_classify(N, s, m, tag):
    assert classify(Params(N, s, m)).tag is tag


def test_boundaries_are_tagged():
    for N, s in [(1, Fraction(1, 4)), (2, Fraction(1, 3)), (3, Fraction(4, 5))]:
        mc, m1 = critical_exponents(N, s)
        assert classify(Params(N, s, mc if mc > 0 else Fraction(1, 10**6))).tag in (
            RegimeTag.SUBCRITICAL, RegimeTag.FAST_SINGULAR)
        if mc > 0:
            assert classify(Params(N, s, mc)).tag is RegimeTag.SUBCRITICAL
        assert classify(Params(N, s, m1)).tag is RegimeTag.BORDERLINE


def test_borderline_float_tolerance():
    assert is_borderline(Params(1, 0.5, 0.5 + 1e-13))
    assert not is_borderline(Params(1, 0.5, 0.5 + 1e-9))


@pytest.mark.parametrize("kw", [dict(N=0, s=0.5, m=1), dict(N=1, s=0, m=1), dict(N=1, s=1.2, m=1),
                                dict(N=1, s=0.5, m=0), dict(N=1, s=0.5, m=1, M=-1)])
def test_invalid_params(kw):
    with pytest.raises(ConfigError):
        Params(**kw)


@given(N=st.integers(1, 4), s=st.floats(0.05, 1.0), a=st.floats(0.01, 0.99), b=st.floats(0.01, 0.99))
def test_beta_decreases_with_m(N, s, a, b):
    mc, _ = critical_exponents(N, s)
    m_small, m_large = sorted((mc + a * 3, mc + b * 3))
    if m_large - m_small < 1e-6:
        return
    e1, e2 = exponents(Params(N, s, m_small)), exponents(Params(N, s, m_large))
    assert e2.beta < e1.beta
    assert e1.alpha == N * e1.beta


def test_params_json_round_trip():
    p = Params(2, 0.3, 1.5, 4.0)
    q = Params.from_json(p.to_json())
    assert (q.N, q.sf, q.mf, q.M) == (2, 0.3, 1.5, 4.0)


# -- scaling group ------------------------------------------------------------


def _smooth_field(n: int = 256, L: float = 20.0) -> Field:
    g = Grid(1, n, L)
    return Field(g, np.exp(-g.axis**2), 1.0)


def test_rescale_identity_and_mass():
    p = Params(1, HALF, 2)
    u = _smooth_field()
    assert rescale_solution(u, 1.0, p) is u
    v = rescale_solution(u, 4.0, p)
    assert v.mass() == pytest.approx(u.mass(), rel=1e-8)
    assert v.time == pytest.approx(0.25)


def test_rescale_group_property():
    p = Params(1, HALF, 2)
    u = _smooth_field()
    two = rescale_solution(rescale_solution(u, 2.0, p), 1.5, p)
    one = rescale_solution(u, 3.0, p)
    assert np.max(np.abs(two.values - one.values)) <= 1e-10 * np.max(one.values)


def test_rescale_overflow():
    u = _smooth_field(L=4.0)
    with pytest.raises(GridOverflow):
        rescale_solution(u, 1e-4, Params(1, HALF, 2))


def test_mass_reduction():
    g = Grid(1, 128, 10.0)
    u = mollified_dirac(g, 8.0, eps=1.0).replace(time=2.0)
    p = Params(1, HALF, 2, 8.0)
    v, q = mass_normalize(u, p)
    assert v.mass() == pytest.approx(1.0)
    assert np.allclose(v.values, u.values / 8) and v.time == pytest.approx(2.0 * 8.0)
    assert q.M == 1.0
    back, _ = mass_denormalize(v, q, 8.0)
    assert np.max(np.abs(back.values - u.values)) <= 1e-14 * np.max(u.values)
    assert back.time == pytest.approx(u.time, rel=1e-14)
    with pytest.raises(ZeroMass):
        mass_normalize(Field(g, np.zeros(128)), p)
