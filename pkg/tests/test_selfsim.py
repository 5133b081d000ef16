import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpme.checks import line_profile
from fpme.errors import ConfigError, RegimeError
from fpme.evolve import SchemeConfig
from fpme.line import LineGrid
from fpme.params import Params, profile_mass_scaling
from fpme.selfsim import (Profile, eternal_flux_residual, eternal_profile_s1, expected_tail_exponent,
                          profile_residual, solve_profile, vss_field)
from fpme.specfun import cauchy_kernel, vss_constant

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)


@pytest.fixture(scope="module")
def slow_profile():
    return line_profile(Fraction(2), 1024, 4.0)


@pytest.fixture(scope="module")
def fast_profile():
    return line_profile(THIRD, 1024, 16.0)


def test_linear_profile_is_cauchy_kernel():
    F = line_profile(Fraction(1), 1024, 4.0)
    r = np.linspace(0.0, 20.0, 41)
    ref = cauchy_kernel(r, 1.0, 1)
    assert np.max(np.abs(F(r) - ref)) <= 1e-4 * ref[0]


@pytest.mark.parametrize("which", ["slow_profile", "fast_profile"])
def test_profile_residual_detects_wrong_exponent(request, which):
    F = request.getfixturevalue(which)
    p = F.params
    base = profile_residual(F, p)
    assert base <= 0.02
    assert profile_residual(F, p, alpha_scale=1.1) >= 5 * base


def test_profile_unit_mass_and_monotone(slow_profile, fast_profile):
    for F in (slow_profile, fast_profile):
        assert F.is_monotone()
        assert F.mass() == pytest.approx(1.0, rel=2e-2)


def test_routes_agree(slow_profile):
    other = solve_profile(Params(1, HALF, 2), LineGrid(1024, 4.0), "rescaled", SchemeConfig(t_end=4.0), eps=0.25)
    r = np.linspace(0.0, 3.0, 13)
    assert np.max(np.abs(other(r) - slow_profile(r))) <= 1e-2 * slow_profile(0.0)


@given(M=st.floats(0.05, 50.0))
def test_mass_scaling_matches_mass(slow_profile, M):
    p = slow_profile.params
    FM = profile_mass_scaling(slow_profile, M, p)
    beta = 1 / (p.N * (p.mf - 1) + 2 * p.sf)
    mu = M**beta
    r = np.array([0.0, 0.7, 2.5])
    assert np.allclose(FM(r), mu ** (2 * p.sf) * slow_profile(mu ** (1 - p.mf) * r), rtol=1e-12)
    assert FM.M == pytest.approx(M)


@given(M1=st.floats(0.2, 5.0), M2=st.floats(0.2, 5.0))
def test_mass_scaling_composes(fast_profile, M1, M2):
    p = fast_profile.params
    two = profile_mass_scaling(profile_mass_scaling(fast_profile, M1, p), M2, p)
    one = profile_mass_scaling(fast_profile, M1 * M2, p)
    r = np.array([0.0, 0.3, 4.0, 30.0])
    assert np.allclose(two(r), one(r), rtol=1e-10)


def test_peak_grows_with_mass(slow_profile, fast_profile):
    for F in (slow_profile, fast_profile):
        peaks = [profile_mass_scaling(F, M, F.params)(0.0)[()] for M in (0.5, 1.0, 2.0, 8.0)]
        assert np.all(np.diff(peaks) > 0)


def test_fast_profile_below_singular_solution(fast_profile):
    p = fast_profile.params
    C = vss_constant(p).C
    r = np.geomspace(0.5, 100.0, 40)
    J = fast_profile(r) / vss_field(r, 1.0, p)
    assert np.all(J <= 1.01)
    assert vss_field(1.0, 1.0, p) == pytest.approx(C)


@given(t=st.floats(0.01, 100.0), r=st.floats(0.01, 100.0))
def test_singular_solution_homogeneity(t, r):
    p = Params(1, HALF, THIRD)
    expo = 1 / (1 - p.mf)
    assert vss_field(r, t, p) == pytest.approx(t**expo * vss_field(r, 1.0, p), rel=1e-12)
    assert vss_field(2 * r, 1.0, p) == pytest.approx(2 ** (-2 * p.sf * expo) * vss_field(r, 1.0, p), rel=1e-12)


def test_singular_solution_checks():
    with pytest.raises(ConfigError):
        vss_field(1.0, -1.0, Params(1, HALF, THIRD))
    with pytest.raises(RegimeError):
        vss_field(1.0, 1.0, Params(1, HALF, 2))


def test_expected_tail_exponents():
    assert expected_tail_exponent(Params(1, HALF, 2)) == 2
    assert expected_tail_exponent(Params(1, HALF, THIRD)) == pytest.approx(1.5)
    with pytest.raises(RegimeError):
        expected_tail_exponent(Params(3, HALF, Fraction(1, 2)))


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_eternal_flux_relation(N):
    y = np.linspace(0.0, 5.0, 26)
    assert np.max(eternal_flux_residual(0.7, 1.3, N, y)) <= 1e-12


def test_eternal_self_similar_form():
    a, b, N, t = 0.5, 2.0, 3, 0.4
    pts = np.random.default_rng(3).normal(size=(32, N))
    c = N * a
    lam = math.exp(c * t)
    direct = eternal_profile_s1(a, b, pts, t, N)
    form = lam**-N * (b + a * np.sum((pts / lam) ** 2, axis=-1)) ** (-N / 2)
    assert np.allclose(direct, form, rtol=1e-12)
    with pytest.raises(ConfigError):
        eternal_profile_s1(-1.0, 1.0, pts, t, N)
    with pytest.raises(ConfigError):
        eternal_flux_residual(1.0, 1.0, 1, np.ones(3))


def test_profile_validation():
    p = Params(1, HALF, 2)
    with pytest.raises(ConfigError):
        Profile(np.array([0.0, 0.0, 1.0]), np.ones(3), 1.0, p, "renormalized")
    with pytest.raises(ConfigError):
        Profile(np.array([0.0, 1.0]), np.ones(2), 1.0, p, "guess")
    F = Profile(np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.5, 0.25]), 1.0, p, "renormalized")
    assert F.to_csv().splitlines()[0] == "r,F"
    assert F(np.array([4.0]))[0] == pytest.approx(0.25 / 4)
