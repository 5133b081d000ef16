import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpme.analysis import (Verdict, barenblatt_field, convergence_to_barenblatt, expected_tail, fit_tail,
                           mass_exponent_sigma, potential_diagnostic, radial_monotone_check, reflection_check,
                           report_json, tail_constant)
from fpme.errors import ConfigError, InputNotOrdered, MassMismatch, RegimeError, WindowTooSmall
from fpme.evolve import SchemeConfig, run
from fpme.grid import Field, Grid
from fpme.params import Params, critical_exponents, profile_mass_scaling
from fpme.selfsim import Profile

HALF = Fraction(1, 2)
R = np.geomspace(1e-3, 1e3, 600)


def synthetic(p: Params, F: np.ndarray, r: np.ndarray = R) -> Profile:
    return Profile(r, F, 1.0, p, "renormalized")


def test_power_law_fit_is_exact():
    fit = fit_tail(synthetic(Params(1, HALF, 2), 3.0 * R**-2.0), (10.0, 500.0))
    assert fit.slope == pytest.approx(2.0, abs=1e-10)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    assert not fit.log_corrected and fit.log_margin is None


def test_default_window_and_small_window():
    F = synthetic(Params(1, HALF, 2), R**-2.0)
    assert fit_tail(F).window == pytest.approx((150.0, 400.0))
    with pytest.raises(WindowTooSmall):
        fit_tail(F, (10.0, 10.1))
    with pytest.raises(ConfigError):
        fit_tail(F, (5.0, 1.0))


def test_borderline_prefers_log_corrected_model():
    p = Params(1, HALF, HALF)
    F = synthetic(p, R**-2.0 * np.log(np.maximum(R, 1.0001)))
    fit = fit_tail(F, (10.0, 500.0))
    assert fit.log_corrected
    assert fit.log_margin == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(WindowTooSmall):
        fit_tail(F, (0.5, 500.0))


def test_expected_tail_values():
    assert expected_tail(Params(3, 0.8, 0.9)) == (pytest.approx(4.6), False)
    assert expected_tail(Params(1, HALF, Fraction(1, 3))) == (pytest.approx(1.5), False)
    assert expected_tail(Params(1, HALF, HALF)) == (2.0, True)
    with pytest.raises(RegimeError):
        expected_tail(Params(3, HALF, Fraction(1, 2)))


@given(N=st.integers(1, 4), s=st.floats(0.1, 1.0))
def test_expected_tail_is_continuous_at_m1(N, s):
    m1 = float(critical_exponents(N, s)[1])
    below = expected_tail(Params(N, s, m1 - 1e-9))[0]
    above = expected_tail(Params(N, s, m1 + 1e-9))[0]
    assert below == pytest.approx(above, rel=1e-6)


def test_sigma_from_mass_scaling():
    p = Params(1, HALF, 2)
    base = synthetic(p, 1.0 / (1.0 + R * R))
    samples = [(M, tail_constant(profile_mass_scaling(base, M, p), 500.0)) for M in (1.0, 10.0, 100.0)]
    fitted, theory = mass_exponent_sigma(samples, p)
    assert theory == pytest.approx(1.5)
    assert fitted == pytest.approx(theory, abs=1e-3)
    assert mass_exponent_sigma([(1, 1), (10, 10), (100, 100)], Params(2, 0.7, 1))[1] == pytest.approx(1.0)
    with pytest.raises(RegimeError):
        mass_exponent_sigma(samples, Params(1, HALF, Fraction(1, 3)))
    with pytest.raises(ConfigError):
        mass_exponent_sigma(samples[:2], p)


def cauchy_profile() -> Profile:
    r = np.linspace(0.0, 4000.0, 400001)
    return Profile(r, 1.0 / (math.pi * (1.0 + r * r)), 1.0, Params(1, HALF, 1), "renormalized")


def test_exact_solution_has_no_convergence_error():
    F = cauchy_profile()
    g = Grid(1, 1024, 400.0)
    times = 2.0 ** np.arange(0, 8)
    fields = [Field(g, barenblatt_field(F, Field(g, np.zeros(g.n), t)), t) for t in times]
    series = convergence_to_barenblatt(fields, F, F.params, mass_tol=1e-2)
    assert np.max(series.values) <= 5e-3
    assert series.to_csv().startswith("t,e_sup,e_l1")
    with pytest.raises(ConfigError):
        convergence_to_barenblatt(fields[:4], F, F.params)
    heavy = [f.replace(values=2 * f.values) for f in fields]
    with pytest.raises(MassMismatch):
        convergence_to_barenblatt(heavy, F, F.params)


def test_convergence_metric_is_scale_equivariant():
    # u = P_{t+1} is an exact linear solution; T_2 maps it to P_{t+1/2} at time t/2
    F = cauchy_profile()
    g = Grid(1, 1024, 400.0)
    times = 2.0 ** np.arange(1, 9)
    lam = 2.0
    shifted = lambda t, shift: Field(g, (t + shift) / (math.pi * (g.axis**2 + (t + shift) ** 2)), t)
    original = convergence_to_barenblatt([shifted(t, 1.0) for t in times], F, F.params, mass_tol=1e-2)
    scaled = convergence_to_barenblatt([shifted(t / lam, 1.0 / lam) for t in times], F, F.params, mass_tol=1e-2)
    assert np.allclose(scaled.values, original.values, rtol=1e-8, atol=0)


@pytest.mark.parametrize("m", [1, 2])
def test_potential_relation_holds_along_runs(bump, m):
    g = Grid(1, 256, 20.0)
    u0 = Field(g, bump(g.axis, 0.0, 2.0), 0.0)
    _, man = run(u0, SchemeConfig(t_end=1.0, checkpoint_t0=1 / 8), Params(1, HALF, m))
    rep = potential_diagnostic(man.checkpoints, Params(1, HALF, m))
    assert rep.passed and rep.monotone
    assert max(rep.residuals) <= 1e-2


def test_potential_residual_shrinks_with_spacing(bump):
    g = Grid(1, 256, 20.0)
    p = Params(1, HALF, 2)
    u0 = Field(g, bump(g.axis, 0.0, 2.0), 0.0)
    _, coarse = run(u0, SchemeConfig(t_end=1.0, checkpoint_t0=1 / 2), p)
    _, fine = run(u0, SchemeConfig(t_end=1.0, checkpoint_t0=1 / 8), p)
    last = lambda man: potential_diagnostic(man.checkpoints[-2:], p).residuals[-1]
    assert last(fine) < last(coarse)


def test_reflection_checks(bump):
    g = Grid(1, 256, 20.0)
    c = g.n // 2
    p = Params(1, HALF, 2)
    x = g.axis
    u0 = Field(g, bump(x, 0.0, 2.0), 0.0)
    uT, _ = run(u0, SchemeConfig(t_end=1.0), p)
    assert reflection_check(u0, uT, c, side=-1).passed
    assert reflection_check(u0, uT, c, side=1).initial_violation == 0.0
    assert radial_monotone_check(uT)
    two = Field(g, bump(x, -4.0, 1.0) + bump(x, 4.0, 1.0), 0.0)
    assert not radial_monotone_check(two)
    with pytest.raises(InputNotOrdered):
        reflection_check(two, two, c + 10, side=1)
    with pytest.raises(ConfigError):
        reflection_check(u0, uT, c, side=0)


def test_reflection_is_invariant_under_mirroring(bump):
    g = Grid(1, 256, 20.0)
    p = Params(1, HALF, 2)
    x = g.axis
    u0 = Field(g, bump(x, 3.0, 2.0) + bump(x, 3.0, 1.0), 0.0)
    plane = int(np.argmin(np.abs(x - 1.0)))
    uT, _ = run(u0, SchemeConfig(t_end=1.0), p)
    # reversing the index order maps plane k to n - 1 - k and swaps the sides
    flip = lambda f: f.replace(values=f.values[::-1])
    a = reflection_check(u0, uT, plane, side=1)
    b = reflection_check(flip(u0), flip(uT), g.n - 1 - plane, side=-1)
    assert a.passed and b.passed
    assert a.max_violation == pytest.approx(b.max_violation, abs=1e-15)


def test_verdict_json():
    v = Verdict("tails", {"m": Fraction(1, 3) * 1.0}, np.float64(1.5), 1.5, math.inf, np.bool_(True))
    body = json.loads(report_json([v]))
    assert body["pass"] is True
    row = body["checks"][0]
    assert row["pass"] is True and row["tolerance"] == "inf"
    assert v.line().startswith("PASS tails")
