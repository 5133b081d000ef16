import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpme.errors import BlowUp, BoxTooSmall, ConfigError, InputNotOrdered, RegimeError, StabilityViolation
from fpme.evolve import (SchemeConfig, box_data, checkpoint_times, comparison_check, mollified_dirac,
                         operator_for, require_fundamental, run, stable_dt, step)
from fpme.grid import Field, Grid
from fpme.params import Params, rescale_solution
from fpme.specfun import linear_kernel

HALF = Fraction(1, 2)
GRID = Grid(1, 256, 10.0)


def blob(grid: Grid, bump, c: float = 0.0, w: float = 2.0, a: float = 1.0) -> Field:
    return Field(grid, bump(grid.axis, c, w, a), 0.0)


def test_constant_state_is_steady():
    u = Field(GRID, np.full(GRID.n, 0.7), 0.0)
    out, _ = run(u, SchemeConfig(t_end=0.5, box_tol=1.0), Params(1, HALF, 2))
    assert np.max(np.abs(out.values - 0.7)) <= 1e-14


def test_absorption_decays_constants_exponentially():
    u = Field(GRID, np.full(GRID.n, 2.0), 0.0)
    cfg = SchemeConfig(t_end=1.0, eps_absorption=0.3, cfl_safety=0.05, box_tol=1.0)
    out, _ = run(u, cfg, Params(1, HALF, 1))
    assert out.values[0] == pytest.approx(2.0 * math.exp(-0.3), rel=1e-4)


@pytest.mark.parametrize("m", [Fraction(1, 3), 1, 2])
def test_mass_positivity_and_sup_decay(bump, m):
    g = Grid(1, 512, 40.0)
    u0 = blob(g, bump)
    out, man = run(u0, SchemeConfig(t_end=1.0, checkpoint_t0=1 / 16, box_tol=0.25), Params(1, HALF, m))
    mass = man.series("mass")
    assert np.max(np.abs(mass - mass[0])) <= 1e-10 * mass[0]
    assert np.all(man.series("min") >= 0)
    assert np.all(np.diff(man.series("supnorm")) <= 1e-12)
    assert man.termination == "t_end" and out.time == pytest.approx(1.0)


def test_checkpoints_follow_geometric_grid(bump):
    _, man = run(blob(GRID, bump), SchemeConfig(t_end=1.0, checkpoint_t0=0.25), Params(1, HALF, 2))
    expected = [0.0] + [0.25 * 2 ** (k / 4) for k in range(8)] + [1.0]
    assert np.allclose(man.times, expected, rtol=1e-12)
    assert [c.time for c in man.checkpoints] == pytest.approx(expected[1:])
    assert checkpoint_times(0.0, 1.0, 2.0) == [1.0]


def test_comparison_and_l1_contraction(bump):
    u0 = blob(GRID, bump, -1.0, 2.0, 1.0)
    v0 = u0.replace(values=u0.values + bump(GRID.axis, 1.5, 1.5, 0.5))
    rep = comparison_check(u0, v0, SchemeConfig(t_end=1.0, checkpoint_t0=1 / 16), Params(1, HALF, 2))
    assert rep.passed
    assert np.all(np.diff(rep.l1_gaps) <= 1e-12 * rep.l1_gaps[0])
    with pytest.raises(InputNotOrdered):
        comparison_check(v0, u0, SchemeConfig(t_end=1.0), Params(1, HALF, 2))


def test_linear_case_matches_heat_kernel():
    g = Grid(1, 2048, 40.0)
    p = Params(1, 0.5, 1)
    cfg = SchemeConfig(t_end=2.0, symbol="exact", cfl_safety=0.5)
    out, _ = run(linear_kernel(g, 1.0, 0.5, tail_tol=0.1).replace(time=1.0), cfg, p)
    ref = linear_kernel(g, 2.0, 0.5, tail_tol=0.1).values
    assert np.max(np.abs(out.values - ref)) <= 1e-3 * ref.max()


def test_absorption_orders_solutions(bump):
    u0 = blob(GRID, bump)
    p = Params(1, HALF, 2)
    plain, _ = run(u0, SchemeConfig(t_end=1.0), p)
    damped, _ = run(u0, SchemeConfig(t_end=1.0, eps_absorption=0.5), p)
    assert np.all(damped.values <= plain.values + 1e-14)
    assert damped.mass() < plain.mass()


def test_scaling_equivariance(bump):
    g = Grid(1, 512, 20.0)
    p = Params(1, HALF, 2)
    lam = 2.0
    u0 = Field(g, bump(g.axis, 0.0, 2.0), 0.0)
    scaled = rescale_solution(u0, lam, p)
    # interpolation leaves roundoff-sized negative samples
    scaled = scaled.replace(values=np.maximum(scaled.values, 0.0))
    direct, _ = run(scaled, SchemeConfig(t_end=1.0), p)
    base, _ = run(u0, SchemeConfig(t_end=lam ** 1.0), p)
    mapped = rescale_solution(base, lam, p)
    assert mapped.time == pytest.approx(direct.time)
    # the rescaled base run only covers |x| <= L / lam^beta
    inside = np.abs(g.axis) <= 0.9 * g.L / math.sqrt(lam)
    assert np.max(np.abs(mapped.values - direct.values)[inside]) <= 2e-3 * direct.supnorm()


def test_single_step_guards(bump):
    p = Params(1, HALF, 2)
    cfg = SchemeConfig(t_end=1.0)
    u = blob(GRID, bump)
    bound = stable_dt(u, p, cfg, operator_for(GRID, 0.5, cfg))
    assert step(u, cfg, p).time == pytest.approx(bound)
    with pytest.raises(StabilityViolation):
        step(u, cfg, p, dt=3 * bound)


def test_box_too_small():
    g = Grid(1, 64, 2.0)
    with pytest.raises(BoxTooSmall):
        run(box_data(g, 1.0, 0.5), SchemeConfig(t_end=50.0), Params(1, HALF, 1))


def test_regime_gate_and_config_checks():
    with pytest.raises(RegimeError):
        require_fundamental(Params(3, HALF, Fraction(1, 2)))
    require_fundamental(Params(1, HALF, Fraction(1, 3)))
    with pytest.raises(ConfigError):
        run(Field(GRID, -np.ones(GRID.n), 0.0), SchemeConfig(t_end=1.0, box_tol=1.0), Params(1, HALF, 2))
    for bad in ({"t_end": 0}, {"t_end": 1, "cfl_safety": 2}, {"t_end": 1, "symbol": "x"},
                {"t_end": 1, "eps_absorption": -1}, {"t_end": 1, "checkpoint_t0": 0}):
        with pytest.raises(ConfigError):
            SchemeConfig(**bad)


def test_mollified_dirac_mass():
    g = Grid(2, 64, 4.0)
    u = mollified_dirac(g, 3.0)
    assert u.mass() == pytest.approx(3.0, rel=1e-14)
    with pytest.raises(ConfigError):
        mollified_dirac(g, 1.0, eps=1e-6, center=(0.01, 0.01))


@given(seed=st.integers(0, 2**31), n=st.sampled_from([16, 32]), dim=st.sampled_from([1, 2]))
def test_field_binary_round_trip(seed, n, dim):
    g = Grid(dim, n, 3.5)
    vals = np.random.default_rng(seed).random(g.shape)
    f = Field(g, vals, 0.125)
    back = Field.from_bytes(f.to_bytes())
    assert back.grid == g and back.time == 0.125
    assert np.array_equal(back.values, vals)
