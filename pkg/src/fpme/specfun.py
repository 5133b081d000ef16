"""Special functions and closed-form kernels.

Gamma-ratio constants for powers of |x| under the fractional Laplacian,
Riesz and Bessel potentials, and the linear fractional heat kernel.
All Fourier work uses the angular-frequency symbol |xi|^{2s}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from .errors import BoxTooSmall, DimensionError, DomainError, PoleError, QuadratureFailure, RegimeError
from .grid import Field, Grid
from .params import Params, RegimeTag, classify

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _sinpi(z: float) -> float:
    """sin(pi z) with the argument reduced first, exact zeros at integers."""
    r = math.fmod(z, 2.0)
    if r < -1.0:
        r += 2.0
    elif r > 1.0:
        r -= 2.0
    if r == 0.0 or abs(r) == 1.0:
        return 0.0
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def _is_pole(z: float) -> bool:
    return z <= 0 and z == math.floor(z)


def gamma_fn(z: float) -> float:
    """Euler Gamma function via Lanczos, reflected for z < 1/2."""
    z = float(z)
    if _is_pole(z):
        raise PoleError(f"Gamma has a pole at z = {z}")
    if z < 0.5:
        return math.pi / (_sinpi(z) * gamma_fn(1.0 - z))
    if z > 171.6:
        return math.inf
    z -= 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    # split the power to stay finite up to the overflow threshold
    half = t ** (0.5 * (z + 0.5))
    return math.sqrt(2.0 * math.pi) * half * half * math.exp(-t) * acc


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2) / gamma_fn(N / 2)


# -- Riesz and Gamma-ratio constants --------------------------------------


def riesz_gamma(alpha: float, N: int) -> float:
    """gamma(alpha) = pi^{N/2} 2^alpha Gamma(alpha/2) / Gamma((N-alpha)/2), for 0 < alpha < N."""
    if not 0 < alpha < N:
        raise DomainError(f"riesz_gamma needs 0 < alpha < N, got alpha={alpha}, N={N}")
    return math.pi ** (N / 2) * 2.0**alpha * gamma_fn(alpha / 2) / gamma_fn((N - alpha) / 2)


def riesz_gamma_ratio(alpha: float, N: int) -> float:
    """gamma(alpha)/(N - alpha), evaluated without cancellation as alpha -> N.

    Uses Gamma(z) z = Gamma(z + 1) with z = (N - alpha)/2; at alpha = N it
    returns the limit pi^{N/2} 2^{N-1} Gamma(N/2).
    """
    if not 0 < alpha <= N:
        raise DomainError(f"riesz_gamma_ratio needs 0 < alpha <= N, got {alpha}")
    z = (N - alpha) / 2
    return math.pi ** (N / 2) * 2.0 ** (alpha - 1) * gamma_fn(alpha / 2) / gamma_fn(z + 1.0)


def k_alpha(alpha: float, s: float, N: int) -> float:
    """Constant k with (-Delta)^s |x|^{-alpha} = k |x|^{-alpha-2s}."""
    if not 0 < alpha < N:
        raise DomainError(f"k_alpha needs 0 < alpha < N, got alpha={alpha}, N={N}")
    factors = {
        "Gamma((N-alpha)/2)": (N - alpha) / 2,
        "Gamma((alpha+2s)/2)": (alpha + 2 * s) / 2,
        "Gamma((N-alpha-2s)/2)": (N - alpha - 2 * s) / 2,
        "Gamma(alpha/2)": alpha / 2,
    }
    for name, z in factors.items():
        if _is_pole(z):
            raise PoleError(f"{name} hits a pole at argument {z}")
    g = {name: gamma_fn(z) for name, z in factors.items()}
    return (
        4.0**s
        * g["Gamma((N-alpha)/2)"]
        * g["Gamma((alpha+2s)/2)"]
        / (g["Gamma((N-alpha-2s)/2)"] * g["Gamma(alpha/2)"])
    )


def k_alpha_classical_limit(alpha: float, N: int, s_start: float = 0.999, order: int = 4) -> float:
    """Extrapolate k_alpha to s = 1 from samples at s_start and geometrically closer points.

    Polynomial extrapolation in h = 1 - s through `order` nodes h_0, h_0/2, ...
    """
    h0 = 1.0 - s_start
    hs = np.array([h0 / 2**i for i in range(order)])
    ks = np.array([k_alpha(alpha, 1.0 - h, N) for h in hs])
    # Neville's scheme evaluated at h = 0
    table = ks.copy()
    for j in range(1, order):
        for i in range(order - j):
            table[i] = (hs[i + j] * table[i] - hs[i] * table[i + 1]) / (hs[i + j] - hs[i])
    return float(table[0])


@dataclass(frozen=True)
class VssConstant:
    alpha_vss: float
    k_alpha: float
    C: float


def vss_constant(p: Params) -> VssConstant:
    """Amplitude of the separated-variables singular solution, for m_c < m < m_1."""
    if classify(p).tag is not RegimeTag.FAST_SINGULAR:
        raise RegimeError(
            f"very singular solution exists only for m_c < m < m_1 (got m={p.mf}, regime {classify(p).tag.value})"
        )
    s, m = p.sf, p.mf
    a = 2 * s * m / (1 - m)
    k = k_alpha(a, s, p.N)
    return VssConstant(a, k, ((1 - m) * (-k)) ** (1 / (1 - m)))


# -- explicit kernels -----------------------------------------------------


@lru_cache(maxsize=None)
def cauchy_constant(N: int) -> float:
    """Normalising constant of t (|x|^2 + t^2)^{-(N+1)/2}, computed by quadrature."""
    val, err = integrate.quad(lambda r: r ** (N - 1) * (r * r + 1.0) ** (-(N + 1) / 2), 0, np.inf,
                              epsabs=0, epsrel=1e-13, limit=200)
    return 1.0 / (sphere_area(N) * val)


def cauchy_constant_closed(N: int) -> float:
    return gamma_fn((N + 1) / 2) / math.pi ** ((N + 1) / 2)


def cauchy_kernel(x, t: float, N: int):
    """Half-Laplacian heat kernel C_N t (|x|^2 + t^2)^{-(N+1)/2}; x may be an array of radii or points."""
    x = np.asarray(x, dtype=float)
    r2 = x * x if x.ndim == 0 or N == 1 else np.sum(x * x, axis=-1)
    return cauchy_constant(N) * t * (r2 + t * t) ** (-(N + 1) / 2)


def fractional_tail_constant(N: int, s: float) -> float:
    """A with K_s(x, t) ~ A t |x|^{-N-2s} at infinity (the singular-integral constant)."""
    return 4.0**s * gamma_fn(N / 2 + s) / (math.pi ** (N / 2) * abs(gamma_fn(-s)))


def linear_kernel(grid: Grid, t: float, s: float, N: int | None = None, tail_tol: float = 1e-6) -> Field:
    """Fractional heat kernel on the periodic box from its symbol exp(-|xi|^{2s} t).

    Raises BoxTooSmall when the estimated kernel mass outside the box exceeds tail_tol.
    """
    N = grid.dim if N is None else N
    if N != grid.dim:
        raise DimensionError(f"kernel dimension {N} differs from grid dimension {grid.dim}")
    if not t > 0:
        raise ValueError("t must be positive")
    if not 0 < s <= 1:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    if s < 1:
        outside = fractional_tail_constant(N, s) * t * sphere_area(N) * grid.L ** (-2 * s) / (2 * s)
    else:
        outside = math.erfc(grid.L / (2 * math.sqrt(t))) * N
    if outside > tail_tol:
        raise BoxTooSmall(f"estimated kernel mass outside the box {outside:.3g} exceeds {tail_tol:.3g}")
    xi = grid.wavenumbers()
    k = np.arange(grid.n)
    sign = np.where(k % 2 == 0, 1.0, -1.0)  # shift to a box starting at -L
    mag2 = sum(np.meshgrid(*([xi * xi] * N), indexing="ij"))
    hat = np.exp(-(mag2**s) * t)
    for ax in range(N):
        shape = [1] * N
        shape[ax] = grid.n
        hat = hat * sign.reshape(shape)
    vals = np.real(np.fft.ifftn(hat)) / grid.cell_volume
    return Field(grid, vals, t)


def riesz_kernel(x, s: float, N: int):
    """|x|^{-(N-2s)} / gamma(2s), the kernel of (-Delta)^{-s}."""
    if not 2 * s < N:
        raise DimensionError(f"Riesz potential needs 2s < N, got s={s}, N={N}")
    r = np.abs(np.asarray(x, dtype=float)) if N == 1 or np.ndim(x) == 0 else np.linalg.norm(x, axis=-1)
    return r ** (-(N - 2 * s)) / riesz_gamma(2 * s, N)


# -- mollifiers and mollified Riesz kernels ----------------------------------


def _bump(r):
    r = np.asarray(r, dtype=float)
    inside = np.abs(r) < 1.0
    out = np.zeros_like(r)
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def _bump_norm(N: int) -> float:
    val, _ = integrate.quad(lambda r: r ** (N - 1) * float(_bump(r)), 0, 1, epsabs=0, epsrel=1e-13)
    return sphere_area(N) * val


def bump_profile(N: int) -> Callable[[np.ndarray], np.ndarray]:
    """Radial bump exp(-1/(1-r^2)) on the unit ball, normalised to unit mass in R^N."""
    c = 1.0 / _bump_norm(N)
    return lambda r: c * _bump(r)


def _sphere_mean(fun: Callable[[float], float], a: float, b: float, N: int, points=None) -> float:
    """Mean over unit vectors w of fun(|a e_1 + b w|)."""
    if N == 1:
        return 0.5 * (fun(abs(a + b)) + fun(abs(a - b)))
    if N == 3 and a > 0 and b > 0:
        lo, hi = abs(a - b), a + b
        val, _ = integrate.quad(lambda r: fun(r) * r, lo, hi, epsabs=0, epsrel=1e-11, limit=200)
        return val / (2 * a * b)
    w = N - 2

    def integrand(th):
        return fun(math.sqrt(max(a * a + 2 * a * b * math.cos(th) + b * b, 0.0))) * math.sin(th) ** w

    val, _ = integrate.quad(integrand, 0, math.pi, epsabs=0, epsrel=1e-11, limit=200, points=points)
    norm = math.sqrt(math.pi) * gamma_fn((w + 1) / 2) / gamma_fn(w / 2 + 1)
    return val / norm


def mollified_riesz(x, eps: float, s: float, N: int, mollifier: Callable | None = None) -> float:
    """Riesz kernel convolved with the radial mollifier rho_eps, by adaptive quadrature."""
    if not 2 * s < N:
        raise DimensionError(f"Riesz potential needs 2s < N, got s={s}, N={N}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    rho = bump_profile(N) if mollifier is None else mollifier
    r0 = float(np.linalg.norm(np.atleast_1d(x)))
    a = N - 2 * s

    def power(r):
        return r ** (-a) if r > 0 else math.inf

    def shell(t):
        # t = |y| / eps
        return float(rho(t)) * t ** (N - 1) * _sphere_mean(power, r0, eps * t, N)

    brk = [r0 / eps] if 0 < r0 / eps < 1 else None
    val, err = integrate.quad(shell, 0, 1, epsabs=0, epsrel=1e-11, limit=400, points=brk)
    if not np.isfinite(val) or err > 1e-9 * abs(val):
        raise QuadratureFailure(f"mollified Riesz integral error {err:.3g} for |x|={r0}, eps={eps}")
    return sphere_area(N) * val / riesz_gamma(2 * s, N)


# -- Bessel potentials -----------------------------------------------------


def mcdonald_K(nu: float, r: float) -> float:
    """Modified Bessel function of the second kind from its heat-type integral.

    K_nu(r) = 2^{-1-nu} r^nu int_0^inf e^{-t - r^2/4t} t^{-1-nu} dt. Writing
    t = (r/2) e^v turns this into int_0^inf e^{-r cosh v} cosh(nu v) dv, which is
    smooth on a finite range; the factor e^{-r} is pulled out so the integrand
    peaks at one.
    """
    if not r > 0:
        raise DomainError("mcdonald_K needs r > 0")
    nu = abs(float(nu))
    r = float(r)

    def f(v):
        return math.exp(-r * (math.cosh(v) - 1.0)) * math.cosh(nu * v)

    # cut where the log-integrand has fallen below -745 (exp underflows)
    def log_f(v):
        return -r * (math.cosh(v) - 1.0) + nu * v + 745.0

    vmax = optimize.brentq(log_f, math.asinh(nu / r) + 1e-12, 710.0) if log_f(710.0) < 0 else 710.0
    val, err = integrate.quad(f, 0.0, vmax, epsabs=0, epsrel=1e-12, limit=400)
    if not np.isfinite(val) or err > 1e-9 * abs(val):
        raise QuadratureFailure(f"McDonald integral failed for nu={nu}, r={r}")
    return math.exp(-r) * val


def bessel_constant_closed(alpha: float, N: int) -> float:
    return 1.0 / (math.pi ** (N / 2) * 2.0 ** ((N + alpha) / 2 - 1) * gamma_fn(alpha / 2))


@lru_cache(maxsize=None)
def bessel_constant(alpha: float, N: int) -> float:
    """c(alpha, N) fixing unit mass of G_alpha, by quadrature."""
    nu = (N - alpha) / 2
    pw = N - 1 + (alpha - N) / 2

    def f(r):
        return r**pw * special.kve(nu, r) * math.exp(-r)

    total = 0.0
    for lo, hi in ((0.0, 1.0), (1.0, 40.0), (40.0, 800.0)):
        val, err = integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=400)
        if not np.isfinite(val):
            raise QuadratureFailure(f"Bessel normalisation failed for alpha={alpha}, N={N}")
        total += val
    return 1.0 / (sphere_area(N) * total)


def bessel_G(alpha: float, x, N: int) -> float:
    """Kernel of (1 - Delta)^{-alpha/2}: c |x|^{(alpha-N)/2} K_{(N-alpha)/2}(|x|)."""
    if not alpha > 0:
        raise DomainError("bessel_G needs alpha > 0")
    r = float(np.linalg.norm(np.atleast_1d(x)))
    if r == 0:
        raise DomainError("bessel_G is evaluated at x != 0")
    nu = (N - alpha) / 2
    return bessel_constant(alpha, N) * r ** ((alpha - N) / 2) * mcdonald_K(nu, r)
