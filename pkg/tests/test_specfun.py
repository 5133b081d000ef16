import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fpme.errors import DimensionError, DomainError, PoleError, RegimeError
from fpme.grid import Grid
from fpme.params import Params
from fpme.specfun import (bessel_G, bessel_constant, bessel_constant_closed, cauchy_constant,
                          cauchy_constant_closed, cauchy_kernel, gamma_fn, k_alpha, k_alpha_classical_limit,
                          linear_kernel, mcdonald_K, mollified_riesz, riesz_gamma, riesz_gamma_ratio, riesz_kernel,
                          vss_constant)

HALF = Fraction(1, 2)


@pytest.mark.parametrize("z,value", [(1.0, 1.0), (0.5, math.sqrt(math.pi)), (-0.25, -4 * math.gamma(0.75)),
                                     (5.0, 24.0), (-1.5, 4 * math.sqrt(math.pi) / 3)])
def test_gamma_values(z, value):
    assert gamma_fn(z) == pytest.approx(value, rel=1e-12)


def test_gamma_poles():
    for z in (0.0, -1.0, -7.0):
        with pytest.raises(PoleError):
            gamma_fn(z)


@given(st.floats(-20.0, 40.0).filter(lambda z: abs(z - round(z)) > 1e-3 or z >= 1))
def test_gamma_matches_stdlib(z):
    assert gamma_fn(z) == pytest.approx(math.gamma(z), rel=1e-12)


def test_riesz_gamma():
    assert riesz_gamma(0.5, 1) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert riesz_gamma(1.0, 3) == pytest.approx(2 * math.pi**2, rel=1e-12)
    limit = math.pi ** 1.5 * 4 * gamma_fn(1.5)
    assert riesz_gamma_ratio(3 - 1e-9, 3) == pytest.approx(limit, rel=1e-8)
    assert riesz_gamma_ratio(3.0, 3) == pytest.approx(limit, rel=1e-12)
    with pytest.raises(DomainError):
        riesz_gamma(1.0, 1)


def test_k_alpha_reference_value():
    assert k_alpha(0.5, 0.5, 1) == pytest.approx(-0.5, abs=1e-10)


@given(N=st.integers(1, 3), s=st.floats(0.05, 0.95), t=st.floats(0.02, 0.98))
def test_k_alpha_negative_on_vss_window(N, s, t):
    lo = max(N - 2 * s, 0.0)
    a = lo + t * (N - lo)
    try:
        k = k_alpha(a, s, N)
    except PoleError:
        return
    assert k < 0


@pytest.mark.parametrize("alpha,N", [(0.5, 1), (1.3, 2), (2.5, 3)])
def test_k_alpha_classical_continuity(alpha, N):
    exact = alpha * (N - alpha - 2)
    errs = [abs(k_alpha(alpha, s, N) - exact) for s in (0.9, 0.99, 0.999)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 10 * 0.001 * max(abs(exact), 1)
    assert k_alpha_classical_limit(alpha, N) == pytest.approx(exact, abs=1e-8)
    assert k_alpha(alpha, 1.0, N) == pytest.approx(exact, rel=1e-12)


def test_vss_constant():
    v = vss_constant(Params(1, HALF, Fraction(1, 3)))
    assert v.alpha_vss == pytest.approx(0.5)
    assert v.k_alpha == pytest.approx(-0.5)
    assert v.C == pytest.approx((1 / 3) ** 1.5, rel=1e-12)
    assert v.C ** (1 - 1 / 3) == pytest.approx((1 - 1 / 3) * -v.k_alpha)
    with pytest.raises(RegimeError):
        vss_constant(Params(1, HALF, Fraction(3, 5)))


def test_vss_alpha_approaches_dimension():
    alphas = [vss_constant(Params(1, 0.5, m)).alpha_vss for m in (0.3, 0.4, 0.45, 0.49, 0.499)]
    assert np.all(np.diff(alphas) > 0) and alphas[-1] < 1 and alphas[-1] > 0.99


def test_cauchy_kernel():
    assert cauchy_kernel(0.0, 1.0, 1) == pytest.approx(1 / math.pi, rel=1e-10)
    for N in (1, 2, 3):
        assert cauchy_constant(N) == pytest.approx(cauchy_constant_closed(N), rel=1e-10)
    total, _ = integrate.quad(lambda x: cauchy_kernel(x, 2.5, 1), -np.inf, np.inf, epsabs=0, epsrel=1e-12)
    assert total == pytest.approx(1.0, abs=1e-8)
    x = np.linspace(0.1, 5, 7)
    assert np.allclose(cauchy_kernel(x, 3.0, 1), cauchy_kernel(x / 3.0, 1.0, 1) / 3.0, rtol=1e-13)


def test_linear_kernel_against_cauchy():
    g = Grid(1, 16384, 2000.0)
    K = linear_kernel(g, 1.0, 0.5, tail_tol=1e-3)
    near = np.abs(g.axis) <= 0.5 * g.L
    assert np.max(np.abs(K.values - cauchy_kernel(g.axis, 1.0, 1))[near]) <= 1e-4
    assert K.values.min() >= -1e-8 * K.values.max()


def test_linear_kernel_gaussian_limit():
    g = Grid(1, 512, 20.0)
    K = linear_kernel(g, 1.0, 1.0)
    gauss = np.exp(-g.axis**2 / 4) / math.sqrt(4 * math.pi)
    assert np.max(np.abs(K.values - gauss)) <= 1e-10


def test_linear_kernel_tail_constant():
    g = Grid(1, 32768, 4000.0)
    K = linear_kernel(g, 1.0, 0.75, tail_tol=1e-2)
    x = g.axis
    sel = (x > 20) & (x < 200)
    comp = K.values[sel] * x[sel] ** 2.5
    assert np.ptp(comp) / comp.mean() < 0.05


def test_riesz_kernel():
    assert riesz_kernel(np.array([[2.0, 0, 0]]), 0.5, 3)[0] == pytest.approx(1 / (8 * math.pi**2), rel=1e-12)
    with pytest.raises(DimensionError):
        riesz_kernel(1.0, 0.6, 1)
    x = np.array([0.3, 1.0, 2.0])
    assert np.allclose(riesz_kernel(3 * x, 0.2, 1), 3 ** -(1 - 0.4) * riesz_kernel(x, 0.2, 1), rtol=1e-14)


def test_mollified_riesz_bounds_and_scaling():
    s, N, eps = 0.25, 1, 0.1
    ratios = []
    for k in (2, 5, 20):
        r = k * eps
        V = riesz_kernel(r, s, N)
        Ve = mollified_riesz(r, eps, s, N)
        assert Ve >= V
        ratios.append((Ve - V) / V * (r / eps) ** 2)
    assert max(ratios) < 10
    mu = 2.0
    lhs = mollified_riesz(0.7, eps * mu, s, N)
    rhs = mollified_riesz(0.7 / mu, eps, s, N) / mu ** (N - 2 * s)
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_mcdonald_asymptotics():
    assert mcdonald_K(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1), rel=1e-10)
    for nu in (0.5, 1.0):
        r = 1e-4
        assert mcdonald_K(nu, r) * (r / 2) ** nu * 2 / gamma_fn(nu) == pytest.approx(1.0, abs=1e-3)
    assert mcdonald_K(0.3, 30.0) * math.exp(30) * math.sqrt(60 / math.pi) == pytest.approx(1.0, rel=0.02)


def test_bessel_kernel():
    for a, N in ((1.0, 1), (0.5, 1), (1.5, 3)):
        assert bessel_constant(a, N) == pytest.approx(bessel_constant_closed(a, N), rel=1e-8)
    for r in (1.5, 3.0, 8.0):
        assert 0 < bessel_G(0.5, r, 1) < math.exp(-r / 2)
    # G_a(x) |x|^{N-a} stays below its r -> 0 limit on 0 < |x| < 1
    nu = 0.25
    limit = bessel_constant(0.5, 1) * gamma_fn(nu) / 2 * 2**nu
    small = [bessel_G(0.5, r, 1) * r**0.5 for r in (1e-6, 1e-3, 1e-1, 0.5, 0.99)]
    assert max(small) <= limit * (1 + 1e-6)
    assert small[0] == pytest.approx(limit, rel=1e-2)
    # 2s = 1.2 > N = 1: the kernel has a finite value at the origin
    top = bessel_constant(1.2, 1) * gamma_fn(0.1) / 2 * 2**0.1
    bounded = [bessel_G(1.2, r, 1) for r in (1e-12, 1e-8, 1e-4, 1e-2)]
    assert np.all(np.diff(bounded) < 0) and bounded[0] <= top and bounded[0] > 0.9 * top
    vals = [bessel_G(0.7, r, 2) for r in (0.2, 0.5, 1.0, 2.0)]
    assert np.all(np.diff(vals) < 0)
