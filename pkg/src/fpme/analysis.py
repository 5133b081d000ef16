"""Quantitative verdicts on profiles and runs: tail fits, attraction, potentials, reflection."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import ConfigError, InputNotOrdered, MassMismatch, RegimeError, WindowTooSmall
from .fraclap import SpectralOperator
from .grid import Field
from .params import Params, RegimeTag, classify, exponents, is_borderline
from .selfsim import Profile

MIN_SHELLS = 8
DEFAULT_WINDOW = (0.15, 0.4)


# -- tail fits ----------------------------------------------------------------


@dataclass(frozen=True)
class TailFit:
    """Least-squares power law on (log r, log F) over a radial window.

    When the exponent is the borderline one, `corrected_r2` and `power_r2`
    compare two one-parameter models of the compensated tail
    log(F r^{N+2s}): a constant (pure power) and a constant plus log log r
    (the logarithmically corrected power). Both r2 values use the variance of
    the compensated tail as denominator, so the pure-power value is 0 and a
    useful correction shows up as a positive margin.
    """

    window: tuple[float, float]
    slope: float
    intercept: float
    r2: float
    log_corrected: bool = False
    shells: int = 0
    power_r2: float | None = None
    corrected_r2: float | None = None
    corrected_intercept: float | None = None

    @property
    def log_margin(self) -> float | None:
        if self.corrected_r2 is None or self.power_r2 is None:
            return None
        return self.corrected_r2 - self.power_r2


def _line_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / sst if sst > 0 else 1.0
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def fit_window(F: Profile, window: tuple[float, float] | None = None) -> tuple[float, float]:
    """Absolute window; defaults to the fraction DEFAULT_WINDOW of the sampled range."""
    if window is None:
        top = float(F.r[-1])
        return DEFAULT_WINDOW[0] * top, DEFAULT_WINDOW[1] * top
    lo, hi = float(window[0]), float(window[1])
    if not 0 < lo < hi:
        raise ConfigError(f"tail window must satisfy 0 < r_lo < r_hi, got {window}")
    return lo, hi


def fit_tail(F: Profile, window: tuple[float, float] | None = None, *,
             borderline: bool | None = None) -> TailFit:
    lo, hi = fit_window(F, window)
    sel = (F.r >= lo) & (F.r <= hi) & (F.F > 0)
    count = int(sel.sum())
    if count < MIN_SHELLS:
        raise WindowTooSmall(f"window [{lo:.4g}, {hi:.4g}] holds {count} positive shells, need {MIN_SHELLS}")
    lr, lf = np.log(F.r[sel]), np.log(F.F[sel])
    slope, intercept, r2 = _line_fit(lr, lf)
    p = F.params
    if borderline is None:
        borderline = is_borderline(p)
    if not borderline:
        return TailFit((lo, hi), -slope, intercept, r2, False, count)
    if lo <= 1.0:
        raise WindowTooSmall("the log-corrected model needs r_lo > 1")
    comp = lf + (p.N + 2 * p.sf) * lr
    sst = float(np.sum((comp - comp.mean()) ** 2))
    shift = np.log(lr)
    a = float(np.mean(comp - shift))
    corrected = 1.0 - float(np.sum((comp - shift - a) ** 2)) / sst if sst > 0 else 1.0
    return TailFit((lo, hi), -slope, intercept, r2, True, count,
                   power_r2=0.0, corrected_r2=corrected, corrected_intercept=a)


def expected_tail(p: Params) -> tuple[float, bool]:
    tag = classify(p).tag
    if tag is RegimeTag.SUBCRITICAL:
        raise RegimeError(f"m={p.mf} is at or below m_c; profiles do not exist")
    if tag is RegimeTag.FAST_SINGULAR:
        return 2 * p.sf / (1 - p.mf), False
    return p.N + 2 * p.sf, tag is RegimeTag.BORDERLINE


def tail_constant(F: Profile, r_ref: float, exponent: float | None = None) -> float:
    """F(r_ref) r_ref^exponent; exponent defaults to the regime's tail exponent."""
    if exponent is None:
        exponent = expected_tail(F.params)[0]
    return float(F(np.array([r_ref]))[0]) * r_ref**exponent


def mass_exponent_sigma(samples: Sequence[tuple[float, float]], p: Params) -> tuple[float, float]:
    """(fitted, theoretical) sigma from (M, tail constant) pairs; C1 ~ M^sigma."""
    reg = classify(p)
    if reg.tag in (RegimeTag.SUBCRITICAL, RegimeTag.FAST_SINGULAR, RegimeTag.BORDERLINE):
        raise RegimeError(f"tail constants scale with mass only for m > m_1 = {reg.m_1:.6g}")
    masses = np.array([a for a, _ in samples], dtype=float)
    consts = np.array([b for _, b in samples], dtype=float)
    if masses.size < 3 or masses.max() / masses.min() < 10 * (1 - 1e-12):
        raise ConfigError("sigma fit needs at least three masses spanning a decade")
    slope, _ = np.polyfit(np.log(masses), np.log(consts), 1)
    theory = (p.mf - reg.m_1) * (p.N + 2 * p.sf) * exponents(p).beta
    return float(slope), float(theory)


# -- attraction ---------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceSeries:
    times: np.ndarray
    values: np.ndarray
    l1: np.ndarray = field(repr=False)

    def decay_factor(self) -> float:
        return float(self.values[0] / self.values[-1])

    def to_csv(self) -> str:
        rows = ["t,e_sup,e_l1"] + [f"{t!r},{e!r},{w!r}" for t, e, w in zip(self.times, self.values, self.l1)]
        return "\n".join(rows) + "\n"


def barenblatt_field(Fstar: Profile, like: Field) -> np.ndarray:
    """t^-alpha F(|x| t^-beta) sampled on the grid of `like` at its time."""
    e = exponents(Fstar.params)
    t = like.time
    if t <= 0:
        raise ConfigError("reference solution needs t > 0")
    return t ** (-e.alpha) * Fstar(like.grid.radius() * t ** (-e.beta))


def convergence_to_barenblatt(checkpoints: Sequence[Field], Fstar: Profile, p: Params,
                              mass_tol: float = 1e-4) -> ConvergenceSeries:
    fields = list(checkpoints)
    if len(fields) < 6:
        raise ConfigError(f"need at least 6 checkpoints, got {len(fields)}")
    times = np.array([f.time for f in fields])
    if np.any(np.diff(times) <= 0) or times[0] <= 0 or times[-1] / times[0] < 100 * (1 - 1e-12):
        raise ConfigError("checkpoint times must increase and span two decades")
    mass = fields[0].mass()
    if abs(mass - Fstar.M) > mass_tol * Fstar.M:
        raise MassMismatch(f"run mass {mass:.8g} differs from reference mass {Fstar.M:.8g}")
    alpha = exponents(p).alpha
    sup, l1 = [], []
    for f in fields:
        diff = np.abs(np.asarray(f.values) - barenblatt_field(Fstar, f))
        sup.append(f.time**alpha * float(diff.max()))
        l1.append(f.grid.integrate(diff) / mass)
    return ConvergenceSeries(times, np.array(sup), np.array(l1))


# -- potential equation --------------------------------------------------------


@dataclass(frozen=True)
class PotentialReport:
    residuals: list[float]
    tolerances: list[float]
    max_rise: float
    passed: bool
    monotone: bool


def potential_diagnostic(fields: Sequence[Field], p: Params, *, symbol: str = "lattice",
                         scheme_error: float = 1e-3, slack: float = 1e-8) -> PotentialReport:
    """Check U_t = -u^m for U = (-Delta)^{-s} u on consecutive checkpoint pairs.

    On the periodic box the potential is taken in the mean-zero gauge, so the
    mean of u^m is removed from the right-hand side and added back before the
    monotonicity check on U.
    """
    fields = list(fields)
    if len(fields) < 2:
        raise ConfigError("potential diagnostic needs at least two fields")
    grid = fields[0].grid
    op = SpectralOperator(grid, p.sf, symbol)
    m = p.mf
    pots = [op.apply_inverse(np.asarray(f.values)) for f in fields]
    residuals, tols, rises = [], [], []
    for k in range(len(fields) - 1):
        dt = fields[k + 1].time - fields[k].time
        if dt <= 0:
            raise ConfigError("fields must be ordered in time")
        mid = 0.5 * (np.asarray(fields[k].values) + np.asarray(fields[k + 1].values))
        um = np.maximum(mid, 0.0) ** m
        centred = um - um.mean()
        dU = pots[k + 1] - pots[k]
        residuals.append(float(np.sum(np.abs(dU / dt + centred)) / np.sum(np.abs(um))))
        tols.append(5.0 * (dt + scheme_error))
        # gauge-restored increment: -int u^m dt <= 0 pointwise
        rise = (dU - dt * um.mean()) / (dt * float(um.max()))
        rises.append(float(rise.max()))
    worst = max(rises)
    ok = all(r <= t for r, t in zip(residuals, tols))
    return PotentialReport(residuals, tols, worst, ok, worst <= slack)


# -- reflection ------------------------------------------------------------------


@dataclass(frozen=True)
class ReflectionReport:
    axis: int
    plane: int
    side: int
    initial_violation: float
    max_violation: float
    passed: bool


def _reflected_pairs(n: int, plane: int, side: int) -> tuple[np.ndarray, np.ndarray]:
    if side not in (1, -1):
        raise ConfigError("side must be +1 or -1")
    if not 0 <= plane < n:
        raise ConfigError(f"plane index {plane} outside 0..{n - 1}")
    idx = np.arange(n)
    mirror = 2 * plane - idx
    keep = (mirror >= 0) & (mirror < n) & (side * (idx - plane) > 0)
    return idx[keep], mirror[keep]


def _ordering_gap(values: np.ndarray, axis: int, near: np.ndarray, far: np.ndarray) -> float:
    a = np.take(values, near, axis=axis)
    b = np.take(values, far, axis=axis)
    return float(np.max(b - a)) if near.size else 0.0


def reflection_check(u0: Field, uT: Field, plane: int, *, axis: int = 0, side: int = 1,
                     slack: float = 1e-8) -> ReflectionReport:
    """Aleksandrov ordering across the grid plane with index `plane` along `axis`.

    The half-space is the set of indices i with side * (i - plane) > 0; its
    points must dominate their mirror images 2 * plane - i, first in u0
    (else InputNotOrdered) and then in uT up to slack * max(uT).
    """
    if u0.grid != uT.grid:
        raise ConfigError("reflection check needs both fields on one grid")
    g = u0.grid
    if not 0 <= axis < g.dim:
        raise ConfigError(f"axis {axis} outside a {g.dim}-d grid")
    near, far = _reflected_pairs(g.n, plane, side)
    v0, vT = np.asarray(u0.values), np.asarray(uT.values)
    start = _ordering_gap(v0, axis, near, far)
    if start > slack * float(np.abs(v0).max()):
        raise InputNotOrdered(f"initial data violate the ordering by {start:.3g} across plane {plane}")
    gap = _ordering_gap(vT, axis, near, far)
    return ReflectionReport(axis, plane, side, start, gap, gap <= slack * float(np.abs(vT).max()))


def radial_monotone_check(u: Field, slack: float = 1e-8) -> bool:
    """Every grid-aligned plane strictly between the centre and the boundary passes.

    The half-space away from the centre must be dominated by its mirror image.
    """
    g = u.grid
    vals = np.asarray(u.values)
    c = g.n // 2
    top = slack * float(vals.max())
    for axis in range(g.dim):
        for plane in range(c + 1, g.n - 1):
            near, far = _reflected_pairs(g.n, plane, -1)
            if _ordering_gap(vals, axis, near, far) > top:
                return False
        for plane in range(1, c):
            near, far = _reflected_pairs(g.n, plane, 1)
            if _ordering_gap(vals, axis, near, far) > top:
                return False
    return True


# -- verdicts ----------------------------------------------------------------------


def _plain(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


@dataclass
class Verdict:
    name: str
    inputs: dict
    measured: Any
    expected: Any
    tolerance: Any
    passed: bool

    def to_json(self) -> dict:
        d = asdict(self)
        d["pass"] = bool(d.pop("passed"))
        return _plain(d)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: measured={_plain(self.measured)} expected={_plain(self.expected)} tol={_plain(self.tolerance)}"


def report_json(verdicts: Sequence[Verdict]) -> str:
    body = {"checks": [v.to_json() for v in verdicts], "pass": all(v.passed for v in verdicts)}
    return json.dumps(body, indent=2)
