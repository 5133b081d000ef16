import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpme.errors import ConfigError, GridMismatch
from fpme.evolve import mollified_dirac
from fpme.fraclap import (SpectralOperator, apply_fraclap, apply_inverse, fraclap_quadrature_oracle,
                          singular_integral_constant, singular_integral_constant_closed)
from fpme.grid import Field, Grid
from fpme.specfun import bump_profile, k_alpha, riesz_kernel


def test_fourier_eigenfunction():
    g = Grid(1, 64, math.pi)
    u = np.sin(3 * g.axis)
    out = SpectralOperator(g, 0.5).apply(u)
    assert np.max(np.abs(out - 3 * u)) <= 1e-12


def test_constants_are_annihilated():
    g = Grid(2, 32, 5.0)
    assert np.max(np.abs(SpectralOperator(g, 0.3).apply(np.full(g.shape, 2.5)))) <= 1e-13


def test_laplacian_limit_matches_finite_differences():
    errs = []
    for n in (64, 128):
        g = Grid(1, n, 10.0)
        u = np.exp(-g.axis**2)
        fd = -(np.roll(u, -1) - 2 * u + np.roll(u, 1)) / g.dx**2
        errs.append(np.max(np.abs(SpectralOperator(g, 1.0).apply(u) - fd)))
    assert errs[1] < errs[0] / 3.5


def test_lattice_symbol_is_laplacian_power():
    g = Grid(1, 64, 10.0)
    u = np.exp(-g.axis**2)
    fd = -(np.roll(u, -1) - 2 * u + np.roll(u, 1)) / g.dx**2
    assert np.max(np.abs(SpectralOperator(g, 1.0, "lattice").apply(u) - fd)) <= 1e-12


def test_multiplier_table():
    op = SpectralOperator(Grid(2, 16, 3.0), 0.7, "lattice")
    assert op.multipliers.flat[0] == 0.0 and op.multipliers.min() >= 0.0
    assert op.diagonal > 0


def test_inverse_round_trip_and_linearity():
    g = Grid(1, 128, 8.0)
    rng = np.random.default_rng(7)
    u, v = rng.normal(size=(2, g.n))
    op = SpectralOperator(g, 0.4)
    assert np.max(np.abs(op.apply_inverse(op.apply(u)) - (u - u.mean()))) <= 1e-12
    lhs = op.apply_inverse(2 * u - 3 * v)
    assert np.max(np.abs(lhs - (2 * op.apply_inverse(u) - 3 * op.apply_inverse(v)))) <= 1e-12


def test_inverse_matches_riesz_kernel_in_2d():
    g = Grid(2, 512, 40.0)
    u = mollified_dirac(g, 1.0, eps=0.5)
    U = apply_inverse(SpectralOperator(g, 0.5), u).values
    j = g.n // 2
    r = g.axis[j:]
    sel = (r >= 4 * 0.5) & (r <= g.L / 4)
    V = riesz_kernel(r[sel][:, None], 0.5, 2)
    prof = U[j:, j][sel]
    gauge = np.mean(prof - V)
    assert np.max(np.abs(prof - gauge - V) / V) <= 0.02


@given(seed=st.integers(0, 10**6), s=st.floats(0.05, 1.0))
def test_self_adjoint_conservative(seed, s):
    g = Grid(1, 64, 5.0)
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, g.n))
    op = SpectralOperator(g, s)
    Au, Av = op.apply(u), op.apply(v)
    scale = np.abs(Au).max() * np.abs(v).max() * g.n
    assert abs(np.dot(Au, v) - np.dot(u, Av)) <= 1e-12 * scale
    assert abs(np.sum(Au)) <= 1e-12 * np.abs(Au).max() * g.n


@given(s1=st.floats(0.05, 0.5), s2=st.floats(0.05, 0.5))
def test_symbol_composition(s1, s2):
    g = Grid(1, 64, 5.0)
    u = np.exp(-g.axis**2)
    two = SpectralOperator(g, s2).apply(SpectralOperator(g, s1).apply(u))
    one = SpectralOperator(g, s1 + s2).apply(u)
    assert np.max(np.abs(two - one)) <= 1e-12 * max(np.abs(one).max(), 1)


def test_operator_checks():
    g = Grid(1, 32, 1.0)
    op = SpectralOperator(g, 0.5)
    with pytest.raises(GridMismatch):
        op.apply(np.zeros(16))
    with pytest.raises(GridMismatch):
        apply_fraclap(op, Field(Grid(1, 64, 1.0), np.zeros(64)))
    with pytest.raises(ConfigError):
        SpectralOperator(g, 0.5, "wrong")
    with pytest.raises(ConfigError):
        SpectralOperator(g, 1.5)


@pytest.mark.parametrize("N,s", [(1, 0.5), (2, 0.3), (3, 0.8)])
def test_singular_integral_constant(N, s):
    assert singular_integral_constant(N, s) == pytest.approx(singular_integral_constant_closed(N, s), rel=1e-8)


def test_oracle_power_law():
    val = fraclap_quadrature_oracle(lambda r: r**-0.5, 1.0, 0.5, 1, decay=(0.5, 1.0))
    assert val == pytest.approx(k_alpha(0.5, 0.5, 1), rel=1e-5)


def test_oracle_positive_at_maximum():
    assert fraclap_quadrature_oracle(lambda r: math.exp(-r * r), 0.0, 0.4, 1, decay=(50.0, 1.0)) > 0


def test_oracle_matches_grid_operator():
    # periodic images shift the grid values by a near-constant amount, so compare increments
    g = Grid(1, 1024, 16.0)
    rho = bump_profile(1)
    grid_vals = SpectralOperator(g, 0.5).apply(rho(np.abs(g.axis) / 2.0))
    measured, reference = [], []
    for x0 in np.linspace(0.1, 1.9, 10):
        i = int(np.argmin(np.abs(g.axis - x0)))
        xi = g.axis[i]
        measured.append(grid_vals[i])
        reference.append(fraclap_quadrature_oracle(lambda r: float(rho(r / 2.0)), xi, 0.5, 1, decay=(50.0, 1.0),
                                                   breaks=(abs(2.0 - xi), 2.0 + xi)))
    measured, reference = np.diff(measured), np.diff(reference)
    assert np.max(np.abs(measured - reference)) <= 1e-4 * np.abs(grid_vals).max()
