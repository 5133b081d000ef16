"""Parameter space, critical exponents, regimes and the exact scaling group.

The equation is u_t + (-Delta)^s (u^m) = 0 in R^N. Mass-preserving
self-similar solutions have the form t^-alpha F(|x| t^-beta) with

    alpha = N / (N(m-1) + 2s),   beta = 1 / (N(m-1) + 2s).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import ConfigError, DegenerateScaling, GridOverflow, ZeroMass
from .grid import Field, trig_interp_matrix

# |m - m_1| below this counts as the borderline exponent when inputs are floats
BORDERLINE_TOL = 1e-12


@dataclass(frozen=True)
class Params:
    """Physical configuration. `s` and `m` may be given as Fractions for exact regime tests."""

    N: int
    s: Real
    m: Real
    M: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N}")
        if not 0 < self.s <= 1:
            raise ConfigError(f"s must lie in (0, 1], got {self.s}")
        if not self.m > 0:
            raise ConfigError(f"m must be positive, got {self.m}")
        if not self.M > 0:
            raise ConfigError(f"M must be positive, got {self.M}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def sf(self) -> float:
        return float(self.s)

    @property
    def mf(self) -> float:
        return float(self.m)

    def with_mass(self, M: float) -> "Params":
        return replace(self, M=M)

    def to_json(self) -> dict:
        out = {"N": self.N, "s": self.sf, "m": self.mf, "M": float(self.M)}
        reg = classify(self)
        out.update(m_c=reg.m_c, m_1=reg.m_1, regime=reg.tag.value)
        try:
            e = exponents(self)
            out.update(alpha=e.alpha, beta=e.beta)
        except DegenerateScaling:
            out.update(alpha=None, beta=None)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Params":
        # derived keys are echoed read-only and ignored here
        return cls(int(data["N"]), float(data["s"]), float(data["m"]), float(data.get("M", 1.0)))


@dataclass(frozen=True)
class Exponents:
    alpha: float
    beta: float


class RegimeTag(enum.Enum):
    SUBCRITICAL = "Subcritical"
    FAST_SINGULAR = "FastSingular"
    BORDERLINE = "Borderline"
    FAST_REGULAR = "FastRegular"
    LINEAR = "Linear"
    SLOW = "Slow"


@dataclass(frozen=True)
class Regime:
    m_c: float
    m_1: float
    tag: RegimeTag


def critical_exponents(N: int, s) -> tuple:
    """(m_c, m_1); exact Fractions when s is a Fraction."""
    if isinstance(s, Fraction):
        m_c = max(Fraction(N) - 2 * s, Fraction(0)) / N
        m_1 = Fraction(N) / (N + 2 * s)
        return m_c, m_1
    s = float(s)
    return max((N - 2 * s) / N, 0.0), N / (N + 2 * s)


def exponents(p: Params) -> Exponents:
    den = p.N * (p.mf - 1.0) + 2.0 * p.sf
    exact = isinstance(p.s, Fraction) and isinstance(p.m, Fraction)
    if (exact and p.N * (p.m - 1) + 2 * p.s == 0) or abs(den) < 1e-12:
        raise DegenerateScaling(
            f"N(m-1)+2s = 0 for N={p.N}, s={p.sf}, m={p.mf}: m equals m_c, no scaling exponents"
        )
    beta = 1.0 / den
    return Exponents(alpha=p.N * beta, beta=beta)


def is_borderline(p: Params) -> bool:
    _, m_1 = critical_exponents(p.N, p.s)
    if isinstance(p.s, Fraction) and isinstance(p.m, Fraction):
        return p.m == m_1
    return abs(p.mf - float(m_1)) < BORDERLINE_TOL


def classify(p: Params) -> Regime:
    m_c, m_1 = critical_exponents(p.N, p.s)
    exact = isinstance(p.s, Fraction) and isinstance(p.m, Fraction)
    m = p.m if exact else p.mf
    if not exact:
        m_c, m_1 = float(m_c), float(m_1)
    if exact:
        at_mc = m == m_c
    else:
        at_mc = abs(m - m_c) < BORDERLINE_TOL
    if m < m_c or at_mc:
        tag = RegimeTag.SUBCRITICAL
    elif is_borderline(p):
        tag = RegimeTag.BORDERLINE
    elif m < m_1:
        tag = RegimeTag.FAST_SINGULAR
    elif m < 1:
        tag = RegimeTag.FAST_REGULAR
    elif m == 1:
        tag = RegimeTag.LINEAR
    else:
        tag = RegimeTag.SLOW
    return Regime(float(m_c), float(m_1), tag)


# -- scaling group ---------------------------------------------------------


def support_radius(u: Field, rel_tol: float = 1e-12) -> float:
    """Largest |x| where |u| exceeds rel_tol * max|u|."""
    vals = np.abs(u.values)
    mask = vals > rel_tol * vals.max()
    if not mask.any():
        return 0.0
    return float(u.grid.radius()[mask].max())


def _resample(u: Field, factor: float) -> np.ndarray:
    """Trigonometric interpolant of u evaluated at factor * x; zero outside the box."""
    g = u.grid
    pts = factor * g.axis
    inside = np.abs(pts + 0.5 * g.dx) <= g.L
    E = trig_interp_matrix(g, np.where(inside, pts, 0.0))
    E[~inside, :] = 0.0
    vals = np.asarray(u.values)
    if g.dim == 1:
        return E @ vals
    return E @ vals @ E.T


def rescale_solution(u: Field, lam: float, p: Params) -> Field:
    """Apply T_lambda: samples lambda^alpha u(lambda^beta x); time stamp t / lambda."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    e = exponents(p)
    if e.beta <= 0:
        raise DegenerateScaling("scaling group requires m > m_c")
    if lam == 1:
        return u
    stretch = lam**e.beta
    g = u.grid
    R = support_radius(u)
    if R / stretch > g.L * (1 if g.dim == 1 else 1.0):
        raise GridOverflow(
            f"rescaled support radius {R / stretch:.4g} exceeds box half-width {g.L:.4g}"
        )
    vals = lam**e.alpha * _resample(u, stretch)
    return Field(g, vals, u.time / lam)


def mass_normalize(u: Field, p: Params) -> tuple[Field, Params]:
    """Reduce to unit mass: u_hat(x, t) = u(x, M^(1-m) t) / M.

    A field stamped with time t therefore maps to time M^(m-1) t.
    """
    M = u.mass()
    if not M > 0:
        raise ZeroMass(f"field mass {M} is not positive")
    vals = np.asarray(u.values) / M
    return Field(u.grid, vals, u.time * M ** (p.mf - 1.0)), p.with_mass(1.0)


def mass_denormalize(u: Field, p: Params, M: float) -> tuple[Field, Params]:
    """Inverse of mass_normalize for a unit-mass field."""
    if not M > 0:
        raise ZeroMass(f"target mass {M} is not positive")
    vals = np.asarray(u.values) * M
    return Field(u.grid, vals, u.time * M ** (1.0 - p.mf)), p.with_mass(M)


def profile_mass_scaling(F1, M: float, p: Params):
    """F_M(r) = mu^{2s} F_1(mu^{1-m} r) with mu = M^beta, sampled on F1's radial grid."""
    from .selfsim import Profile  # local import: selfsim depends on this module

    if not isinstance(F1, Profile):
        raise TypeError("profile_mass_scaling expects a Profile")
    e = exponents(p)
    if e.beta <= 0:
        raise DegenerateScaling("profile mass scaling requires m > m_c")
    mu = M**e.beta
    return F1.scaled(mu, p, M)
