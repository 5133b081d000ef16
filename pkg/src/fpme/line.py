"""Whole-line solver for N = 1, s = 1/2 through the Cayley map x = L tan(theta / 2).

In one dimension the half-Laplacian is conformally covariant: for a function
f on the line, (-Delta)^{1/2} f (x) = (dtheta/dx) |D_theta| (f o x)(theta),
where |D_theta| is the half-Laplacian of the periodic variable theta. On a
uniform theta grid this gives a discretization of the operator on all of R
with no periodic images, spectral accuracy for algebraically decaying data
and exact conservation of the mapped quadrature sum_j u_j (dx/dtheta)_j dtheta.
With the lattice symbol the matrix keeps nonpositive off-diagonal entries, so
the explicit scheme stays monotone with a pointwise step bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy import fft as sp_fft

from . import kernels
from .errors import BlowUp, ConfigError, NotRadial, StabilityViolation
from .evolve import FAST_RATE_CAP, SchemeConfig, checkpoint_times, require_fundamental
from .fraclap import SYMBOLS
from .params import Params, exponents
from .specfun import bump_profile


@dataclass(frozen=True)
class LineGrid:
    """n theta-nodes (-pi + (j + 1/2) dtheta), mapped to x_j = L tan(theta_j / 2)."""

    n: int
    L: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16 or self.n & (self.n - 1):
            raise ConfigError(f"n must be a power of two >= 16, got {self.n}")
        if not self.L > 0:
            raise ConfigError(f"map scale L must be positive, got {self.L}")

    @property
    def dim(self) -> int:
        return 1

    @property
    def shape(self) -> tuple[int]:
        return (self.n,)

    @property
    def dtheta(self) -> float:
        return 2.0 * math.pi / self.n

    @property
    def theta(self) -> np.ndarray:
        return -math.pi + (np.arange(self.n) + 0.5) * self.dtheta

    @property
    def x(self) -> np.ndarray:
        return self.L * np.tan(0.5 * self.theta)

    @property
    def stretch(self) -> np.ndarray:
        """dx/dtheta at the nodes."""
        return 0.5 * self.L / np.cos(0.5 * self.theta) ** 2

    @property
    def weights(self) -> np.ndarray:
        return self.stretch * self.dtheta

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(values, self.weights))


# nodes this close to theta = pi resolve the algebraic far-field singularity poorly
FAR_FIELD_NODES = 16


def line_trusted_radius(grid: LineGrid) -> float:
    """Largest |x| at least FAR_FIELD_NODES nodes away from the point at infinity."""
    return float(grid.L * math.tan(0.5 * (math.pi - FAR_FIELD_NODES * grid.dtheta)))


@dataclass(frozen=True)
class LineField:
    grid: LineGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ConfigError(f"values of shape {v.shape} do not fit a line grid of {self.grid.n} nodes")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def mass(self) -> float:
        return self.grid.integrate(self.values)

    def supnorm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class LineOperator:
    """(-Delta)^{1/2} on the line as diag(dtheta/dx) times the periodic half-Laplacian in theta."""

    grid: LineGrid
    symbol: str = "lattice"
    multipliers: np.ndarray = field(init=False, repr=False)
    contraction: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.symbol not in SYMBOLS:
            raise ConfigError(f"symbol must be one of {SYMBOLS}, got {self.symbol!r}")
        n, h = self.grid.n, self.grid.dtheta
        k = np.arange(n // 2 + 1, dtype=float)
        mult = k if self.symbol == "exact" else (2.0 / h) * np.abs(np.sin(0.5 * k * h))
        mult.setflags(write=False)
        w = 1.0 / self.grid.stretch
        w.setflags(write=False)
        object.__setattr__(self, "multipliers", mult)
        object.__setattr__(self, "contraction", w)

    @property
    def theta_diagonal(self) -> float:
        m = self.multipliers
        wts = np.full(m.size, 2.0)
        wts[0] = wts[-1] = 1.0
        return float(np.sum(m * wts) / self.grid.n)

    def apply(self, values: np.ndarray) -> np.ndarray:
        hat = sp_fft.rfft(values) * self.multipliers
        return self.contraction * sp_fft.irfft(hat, n=self.grid.n)

    def local_stiffness(self) -> np.ndarray:
        """Per-node bound used by the monotone step rule."""
        return self.contraction * max(self.theta_diagonal, 0.5 * float(self.multipliers.max()))


def _check_params(p: Params) -> None:
    if p.N != 1 or abs(p.sf - 0.5) > 1e-14:
        raise ConfigError(f"the whole-line solver covers N=1, s=1/2 only, got N={p.N}, s={p.sf}")


def line_stable_dt(values: np.ndarray, p: Params, cfg: SchemeConfig, op: LineOperator) -> float:
    m = p.mf
    umax = float(values.max())
    if umax <= 0:
        return math.inf
    kappa = op.local_stiffness() + cfg.eps_absorption
    if m == 1:
        rate = np.ones_like(values)
    elif m > 1:
        rate = np.full_like(values, m * umax ** (m - 1))
    else:
        floor = cfg.floor_rel * umax
        rate = np.minimum(m * np.maximum(values, floor) ** (m - 1), FAST_RATE_CAP)
    return cfg.cfl_safety / float(np.max(kappa * rate))


def _euler(u: np.ndarray, dt: float, p: Params, cfg: SchemeConfig, op: LineOperator,
           w: np.ndarray, out: np.ndarray) -> float:
    kernels.guarded_power(u, p.mf, w)
    au = op.apply(w)
    return kernels.euler_update(u, au, w, dt, cfg.eps_absorption, out)


def line_advance(values: np.ndarray, dt: float, p: Params, cfg: SchemeConfig,
                 op: LineOperator) -> tuple[np.ndarray, float]:
    """One Heun step; returns the new values and the surviving clipped amount (in value units)."""
    u = np.ascontiguousarray(values, dtype=np.float64)
    w, stage, stage2 = np.empty_like(u), np.empty_like(u), np.empty_like(u)
    clipped = _euler(u, dt, p, cfg, op, w, stage)
    clipped += _euler(stage, dt, p, cfg, op, w, stage2)
    new = np.empty_like(u)
    kernels.heun_combine(u, stage2, new)
    return new, 0.5 * clipped


def line_dirac(grid: LineGrid, M: float = 1.0, eps: float | None = None) -> LineField:
    """Mollified point mass of radius eps (default: four times the finest spacing)."""
    eps = 4.0 * float(np.min(grid.weights)) if eps is None else eps
    vals = bump_profile(1)(np.abs(grid.x) / eps)
    total = grid.integrate(vals)
    if total <= 0:
        raise ConfigError(f"mollifier radius {eps} does not cover a node")
    return LineField(grid, vals * (M / total), 0.0)


def line_iterate(u0: LineField, cfg: SchemeConfig, p: Params, log: dict | None = None) -> Iterator[LineField]:
    """Yield the solution at the geometric checkpoints of cfg; `log` collects steps and clipping."""
    _check_params(p)
    if np.any(u0.values < 0):
        raise ConfigError("initial data must be nonnegative")
    grid = u0.grid
    op = LineOperator(grid, cfg.symbol)
    t0 = cfg.checkpoint_t0 or (u0.time if u0.time > 0 else cfg.t_end * 2.0**-10)
    values = np.array(u0.values)
    t = u0.time
    log = {} if log is None else log
    log.setdefault("steps", 0)
    log.setdefault("clipped_mass", 0.0)
    for stop in checkpoint_times(u0.time, cfg.t_end, t0):
        while t < stop * (1 - 1e-14):
            dt = line_stable_dt(values, p, cfg, op)
            if not math.isfinite(dt):
                dt = stop - t
            dt = min(dt, stop - t)
            new, clipped = line_advance(values, dt, p, cfg, op)
            if float(new.max()) > 1.1 * float(values.max()):
                raise BlowUp(f"sup-norm grew from {values.max():.4g} to {new.max():.4g} in one step")
            if clipped:
                # the scheme conserves the mapped sum exactly, so any gain is clipping
                log["clipped_mass"] += max(grid.integrate(new) - grid.integrate(values), 0.0)
            values = new
            t += dt
            log["steps"] += 1
            if log["steps"] > cfg.max_steps:
                raise StabilityViolation(f"exceeded max_steps={cfg.max_steps}")
        t = stop
        yield LineField(grid, values, t)


def line_run(u0: LineField, cfg: SchemeConfig, p: Params) -> tuple[LineField, dict]:
    log: dict = {}
    last = u0
    for last in line_iterate(u0, cfg, p, log):
        pass
    log["mass"] = last.mass()
    return last, log


def line_profile_samples(u: LineField, p: Params, spread_tol: float = 1e-2) -> tuple[np.ndarray, np.ndarray]:
    """(r, F) with F(r) = t^alpha u(r t^beta), averaging the two mirror nodes at each |x|."""
    e = exponents(p)
    g = u.grid
    half = g.n // 2
    vals = u.values
    right = vals[half:]
    left = vals[:half][::-1]
    mean = 0.5 * (right + left)
    peak = float(mean.max())
    spread = np.abs(right - left) / np.maximum(mean, 1e-300)
    # mirror differences far below the peak are roundoff, not asymmetry
    relevant = mean > 1e-10 * peak
    if np.any(spread[relevant] > spread_tol):
        raise NotRadial(f"mirror nodes differ by up to {spread[relevant].max():.3g} relative")
    t = u.time
    r = g.x[half:] / t**e.beta
    return r, t**e.alpha * mean


def solve_line_profile(p: Params, grid: LineGrid, cfg: SchemeConfig | None = None,
                       eps: float | None = None) -> tuple[np.ndarray, np.ndarray, dict]:
    """Run from a mollified unit point mass to cfg.t_end and rescale."""
    require_fundamental(p)
    _check_params(p)
    unit = p.with_mass(1.0)
    cfg = cfg or SchemeConfig(t_end=1.0)
    last, log = line_run(line_dirac(grid, 1.0, eps), cfg, unit)
    r, F = line_profile_samples(last, unit)
    log["t_end"] = last.time
    return r, F, log


# -- renormalised flow on the line --------------------------------------------------


class LineRenormalizedFlow:
    """v_tau = -(-Delta)^{1/2} v^m + beta d/dy (y v) on the mapped line.

    With q = v dx/dtheta the drift is plain transport of q in theta with the
    bounded speed -beta sin(theta), so the mapped mass sum q_j dtheta is
    conserved exactly and the far field imposes no step restriction.
    """

    def __init__(self, grid: LineGrid, p: Params, cfg: SchemeConfig):
        _check_params(p)
        self.grid, self.p, self.cfg = grid, p, cfg
        self.op = LineOperator(grid, cfg.symbol)
        beta = exponents(p).beta
        faces = grid.theta + 0.5 * grid.dtheta
        self.face_velocity = np.ascontiguousarray(-beta * np.sin(faces))
        self.drift_dt = 0.5 * grid.dtheta / max(float(np.abs(self.face_velocity).max()), 1e-300)
        self._q = np.empty(grid.n)
        self._flux = np.empty(grid.n)

    def dt_bound(self, v: np.ndarray) -> float:
        diff = line_stable_dt(v, self.p, self.cfg, self.op)
        drift = self.cfg.cfl_safety * self.drift_dt
        return 1.0 / (1.0 / diff + 1.0 / drift)

    def _euler(self, v: np.ndarray, dt: float, out: np.ndarray) -> float:
        g = self.grid
        w = np.empty_like(v)
        kernels.guarded_power(v, self.p.mf, w)
        au = self.op.apply(w)
        np.multiply(v, g.stretch, out=self._q)
        kernels.transport_rhs(self._q, self.face_velocity, g.dtheta, self._flux)
        au -= self._flux * self.op.contraction
        return kernels.euler_update(v, au, w, dt, 0.0, out)

    def advance(self, v: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
        stage, stage2 = np.empty_like(v), np.empty_like(v)
        clipped = self._euler(v, dt, stage)
        clipped += self._euler(stage, dt, stage2)
        new = np.empty_like(v)
        kernels.heun_combine(v, stage2, new)
        return new, 0.5 * clipped


def solve_line_renormalized(p: Params, grid: LineGrid, cfg: SchemeConfig | None = None, *,
                            tol: float = 1e-8, tau_max: float = 400.0, v0: LineField | None = None,
                            check_every: int = 50) -> tuple[LineField, dict]:
    """March to a steady state: stop once sup|dv/dtau| / sup v < tol."""
    from .errors import NoConvergence

    require_fundamental(p)
    unit = p.with_mass(1.0)
    cfg = cfg or SchemeConfig(t_end=1.0)
    flow = LineRenormalizedFlow(grid, unit, cfg)
    if v0 is None:
        v0 = line_dirac(grid, 1.0, eps=max(4.0 * float(np.min(grid.weights)), 0.5))
    v = np.array(v0.values)
    tau, steps, clipped = 0.0, 0, 0.0
    rate = math.inf
    prev, prev_tau = v.copy(), 0.0
    while tau < tau_max:
        dt = flow.dt_bound(v)
        new, c = flow.advance(v, dt)
        if c:
            clipped += max(grid.integrate(new) - grid.integrate(v), 0.0)
        v = new
        tau += dt
        steps += 1
        if steps % check_every == 0:
            rate = float(np.max(np.abs(v - prev))) / ((tau - prev_tau) * float(v.max()))
            prev, prev_tau = v.copy(), tau
            if rate < tol:
                break
    info = {"tau": tau, "steps": steps, "rate": rate, "clipped_mass": clipped, "mass": grid.integrate(v)}
    if rate >= tol:
        raise NoConvergence(f"renormalised flow still changing at relative rate {rate:.3g} after tau={tau:.3g}")
    return LineField(grid, v, tau), info


def steady_profile_samples(v: LineField, spread_tol: float = 1e-2) -> tuple[np.ndarray, np.ndarray]:
    """(r, F) from a steady state of the renormalised flow (already in profile variables)."""
    g = v.grid
    half = g.n // 2
    right, left = v.values[half:], v.values[:half][::-1]
    mean = 0.5 * (right + left)
    relevant = mean > 1e-10 * float(mean.max())
    spread = np.abs(right - left) / np.maximum(mean, 1e-300)
    if np.any(spread[relevant] > spread_tol):
        raise NotRadial(f"mirror nodes differ by up to {spread[relevant].max():.3g} relative")
    return g.x[half:], mean
