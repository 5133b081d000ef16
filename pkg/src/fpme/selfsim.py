"""Self-similar profiles: extraction from runs, renormalised steady states, explicit families.

A mass-M fundamental solution has the form t^-alpha F(|x| t^-beta). In the
variables y = x t^-beta, tau = log t the equation becomes

    v_tau = -(-Delta)^s v^m + beta div(y v),

whose steady state is F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import PchipInterpolator

from . import kernels
from .errors import ConfigError, GridMismatch, NoConvergence, NotRadial, RegimeError, StabilityViolation
from .evolve import SchemeConfig, _Workspace, iterate, mollified_dirac, operator_for, require_fundamental, stable_dt
from .fraclap import SpectralOperator
from .grid import Field, Grid
from .line import (LineGrid, LineOperator, line_trusted_radius, solve_line_profile, solve_line_renormalized,
                   steady_profile_samples)
from .params import Params, RegimeTag, classify, exponents
from .specfun import sphere_area, vss_constant

ROUTES = ("rescaled", "renormalized", "explicit")


def expected_tail_exponent(p: Params) -> float:
    tag = classify(p).tag
    if tag is RegimeTag.SUBCRITICAL:
        raise RegimeError("no self-similar profile for m <= m_c")
    if tag is RegimeTag.FAST_SINGULAR:
        return 2 * p.sf / (1 - p.mf)
    return p.N + 2 * p.sf


@dataclass(frozen=True)
class Profile:
    """Radial samples F(r) of a self-similar profile.

    Samples are stored for the unit-scaling base profile together with the
    cumulative mass-scaling factor mu, so F(r) = mu^{2s} F_base(mu^{1-m} r).
    Beyond the last base sample the profile continues as a power law with the
    regime's tail exponent, matched to the last sample.
    """

    r: np.ndarray
    F: np.ndarray
    M: float
    params: Params
    route: str
    base_r: np.ndarray = field(default=None, repr=False)
    base_F: np.ndarray = field(default=None, repr=False)
    mu: float = 1.0
    meta: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        F = np.asarray(self.F, dtype=float)
        if r.ndim != 1 or r.shape != F.shape or r.size < 2:
            raise ConfigError("profile needs matching one-dimensional r and F arrays")
        if np.any(np.diff(r) <= 0):
            raise ConfigError("profile radii must be strictly increasing")
        if self.route not in ROUTES:
            raise ConfigError(f"route must be one of {ROUTES}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "F", F)
        if self.base_r is None:
            object.__setattr__(self, "base_r", r)
            object.__setattr__(self, "base_F", F)

    # evaluation ---------------------------------------------------------

    def _base_eval(self, rr: np.ndarray) -> np.ndarray:
        br, bF = self.base_r, self.base_F
        out = np.empty_like(rr)
        inside = rr <= br[-1]
        out[inside] = PchipInterpolator(br, bF, extrapolate=True)(np.maximum(rr[inside], br[0]))
        tail = expected_tail_exponent(self.params)
        out[~inside] = bF[-1] * (rr[~inside] / br[-1]) ** (-tail)
        return out

    def __call__(self, r) -> np.ndarray:
        rr = np.abs(np.asarray(r, dtype=float))
        s, m = self.params.sf, self.params.mf
        return self.mu ** (2 * s) * self._base_eval(self.mu ** (1 - m) * rr)

    def scaled(self, mu: float, p: Params, M: float) -> "Profile":
        """The profile for mass M, mu = (M / current mass)^beta; used by profile_mass_scaling."""
        total = self.mu * mu
        s, m = p.sf, p.mf
        F = total ** (2 * s) * self._base_eval(total ** (1 - m) * self.r)
        meta = dict(self.meta)
        if "trusted_radius" in meta:
            meta["trusted_radius"] = meta["trusted_radius"] * mu ** (m - 1)
        return Profile(self.r, F, self.M * M, p.with_mass(self.M * M), self.route,
                       self.base_r, self.base_F, total, meta)

    # diagnostics ----------------------------------------------------------

    def mass(self) -> float:
        """Mass of the sampled part: |S^{N-1}| times the trapezoidal integral of F r^{N-1}."""
        N = self.params.N
        r, F = self.r, self.F
        if r[0] > 0:
            # samples of a smooth radial profile are flat at the origin
            r, F = np.concatenate(([0.0], r)), np.concatenate(([F[0]], F))
        return sphere_area(N) * float(trapezoid(r ** (N - 1) * F, r))

    def is_monotone(self, slack: float = 1e-8) -> bool:
        return bool(np.all(np.diff(self.F) <= slack * self.F[0]))

    def to_csv(self) -> str:
        lines = ["r,F"] + [f"{a!r},{b!r}" for a, b in zip(self.r, self.F)]
        return "\n".join(lines) + "\n"


# -- extraction ----------------------------------------------------------------


def radial_average(u: Field, centre=None, max_radius: float | None = None):
    """Shell means of u on shells of width dx; returns (radius, mean, relative spread)."""
    g = u.grid
    coords = g.coords()
    c = np.zeros(g.dim) if centre is None else np.atleast_1d(centre)
    rad = np.sqrt(sum((x - ci) ** 2 for x, ci in zip(coords, c)))
    R = g.L if max_radius is None else min(max_radius, g.L)
    nb = int(R / g.dx + 1e-9)
    s1, s2, cnt = kernels.shell_sums(np.ascontiguousarray(u.values, dtype=float).reshape(-1),
                                     np.ascontiguousarray(rad).reshape(-1), g.dx, nb)
    rs, _, _ = kernels.shell_sums(np.ascontiguousarray(rad).reshape(-1),
                                  np.ascontiguousarray(rad).reshape(-1), g.dx, nb)
    ok = cnt > 0
    mean = s1[ok] / cnt[ok]
    var = np.maximum(s2[ok] / cnt[ok] - mean**2, 0.0)
    spread = np.sqrt(var) / np.maximum(np.abs(mean), 1e-300)
    return rs[ok] / cnt[ok], mean, spread


def extract_profile(u: Field, p: Params, spread_tol: float = 1e-2) -> Profile:
    """F(r) = t^alpha * (shell average of u at |x| = r t^beta)."""
    if not u.time > 0:
        raise ConfigError("profile extraction needs a field at positive time")
    e = exponents(p)
    radius, mean, spread = radial_average(u)
    floor = 1e-6 * mean.max()
    check = mean > floor
    if np.any(spread[check] > spread_tol):
        worst = float(spread[check].max())
        raise NotRadial(f"shell relative spread {worst:.3g} exceeds {spread_tol}")
    t = u.time
    r = radius / t**e.beta
    F = mean * t**e.alpha
    meta = {"time": t, "domain": "periodic", "trusted_radius": 0.5 * u.grid.L / t**e.beta}
    return Profile(r, F, p.M, p, "rescaled", meta=meta)


# -- renormalised flow ---------------------------------------------------------


def drift_taper(y: np.ndarray, L: float, start: float = 0.8) -> np.ndarray:
    """1 on |y| <= start*L, cosine roll-off to 0 at |y| = L."""
    a = np.abs(y)
    z = np.clip((a - start * L) / ((1 - start) * L), 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(np.pi * z))


class RenormalizedFlow:
    """Precomputed operator and drift faces for the rescaled equation on one grid."""

    def __init__(self, grid: Grid, p: Params, cfg: SchemeConfig):
        self.grid, self.p, self.cfg = grid, p, cfg
        self.beta = exponents(p).beta
        self.op = operator_for(grid, p.sf, cfg)
        faces = grid.axis + 0.5 * grid.dx
        # characteristic velocity of the drift term: dy/dtau = -beta y (tapered)
        self.face_velocity = np.ascontiguousarray(-self.beta * faces * drift_taper(faces, grid.L))
        # limited upwinding keeps positivity for |a| dt / dx <= 1/2
        self.drift_cfl = 0.5 * grid.dx / np.abs(self.face_velocity).max()
        self.ws = _Workspace(grid.shape)
        self._div = np.empty(grid.shape)

    def rhs_drift(self, v: np.ndarray, out: np.ndarray) -> None:
        """beta div(y chi v) along every axis."""
        out[...] = 0.0
        g = self.grid
        for ax in range(g.dim):
            moved = np.ascontiguousarray(np.moveaxis(v, ax, -1))
            res = np.empty_like(moved)
            for idx in np.ndindex(moved.shape[:-1]):
                kernels.transport_rhs(moved[idx], self.face_velocity, g.dx, res[idx])
            out += np.moveaxis(res, -1, ax)

    def dt_bound(self, v: np.ndarray) -> float:
        # the two restrictions share one monotonicity budget, so their rates add
        diff = stable_dt(v, self.p, self.cfg, self.op)
        return 1.0 / (1.0 / diff + 1.0 / (self.cfg.cfl_safety * self.drift_cfl))

    def _euler(self, v: np.ndarray, dt: float, out: np.ndarray) -> float:
        w = self.ws.w
        kernels.guarded_power(v.reshape(-1), self.p.mf, w.reshape(-1))
        au = self.op.apply(w)
        self.rhs_drift(v, self._div)
        au -= self._div
        return kernels.euler_update(v.reshape(-1), np.ascontiguousarray(au).reshape(-1), w.reshape(-1),
                                    dt, 0.0, out.reshape(-1))

    def advance(self, v: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
        v = np.ascontiguousarray(v, dtype=float)
        c = self._euler(v, dt, self.ws.stage)
        c += self._euler(self.ws.stage, dt, self.ws.out)
        new = np.empty_like(v)
        kernels.heun_combine(v.reshape(-1), self.ws.out.reshape(-1), new.reshape(-1))
        return new, 0.5 * c


def renormalized_step(v: Field, cfg: SchemeConfig, p: Params, dt: float | None = None) -> Field:
    """One Heun step of v_tau = -(-Delta)^s v^m + beta div(y v); `time` holds tau."""
    flow = RenormalizedFlow(v.grid, p, cfg)
    bound = flow.dt_bound(v.values)
    if dt is None:
        dt = bound
    elif dt > bound * (1 + 1e-12):
        raise StabilityViolation(f"dt={dt:.4g} exceeds the stable bound {bound:.4g}")
    new, _ = flow.advance(v.values, dt)
    return Field(v.grid, new, v.time + dt)


def _profile_from_field(v: Field, p: Params, route: str, meta: dict) -> Profile:
    radius, mean, _ = radial_average(v)
    meta = dict(meta, domain="periodic", trusted_radius=0.5 * v.grid.L)
    return Profile(radius, mean, p.M, p, route, meta=meta)


def solve_renormalized(p: Params, grid: Grid, cfg: SchemeConfig | None = None, *, tol: float = 1e-8,
                       tau_max: float = 200.0, v0: Field | None = None, check_every: int = 50) -> tuple[Field, dict]:
    """March the renormalised flow until sup|dv/dtau| / sup v < tol."""
    require_fundamental(p)
    unit = p.with_mass(1.0)
    cfg = cfg or SchemeConfig(t_end=1.0)
    flow = RenormalizedFlow(grid, unit, cfg)
    if v0 is None:
        v0 = mollified_dirac(grid, 1.0, eps=max(4 * grid.dx, 0.5))
    v = np.array(v0.values)
    tau, steps, clipped = 0.0, 0, 0.0
    rate = math.inf
    prev, prev_tau = v.copy(), 0.0
    core = np.ones(grid.shape, dtype=bool)
    for c in grid.coords():
        core &= np.abs(c) <= 0.8 * grid.L
    while tau < tau_max:
        dt = flow.dt_bound(v)
        v, c = flow.advance(v, dt)
        clipped += c * grid.cell_volume
        tau += dt
        steps += 1
        if steps % check_every == 0:
            # the taper zone relaxes on its own slow clock and is never used downstream
            rate = float(np.max(np.abs(v - prev)[core])) / ((tau - prev_tau) * float(v.max()))
            prev, prev_tau = v.copy(), tau
            if rate < tol:
                break
    info = {"tau": tau, "steps": steps, "rate": rate, "clipped_mass": clipped, "mass": grid.integrate(v)}
    if rate >= tol:
        raise NoConvergence(f"renormalised flow still changing at relative rate {rate:.3g} after tau={tau:.3g}")
    return Field(grid, v, tau), info


def solve_profile(p: Params, grid: Grid | LineGrid, route: str = "renormalized", cfg: SchemeConfig | None = None,
                  **kw) -> Profile:
    """Unit-mass profile by the chosen route, then scaled to mass p.M.

    route="rescaled" runs the physical equation from a mollified point mass up
    to cfg.t_end (default 1) and rescales; route="renormalized" marches the
    rescaled equation to a steady state. A LineGrid selects the whole-line
    discretization (N=1, s=1/2), which has no periodic images.
    """
    require_fundamental(p)
    unit = p.with_mass(1.0)
    if isinstance(grid, LineGrid):
        F1 = _line_profile(unit, grid, route, cfg, **kw)
    elif route == "renormalized":
        v, info = solve_renormalized(unit, grid, cfg, **kw)
        F1 = _profile_from_field(v, unit, "renormalized", info)
    elif route == "rescaled":
        cfg = cfg or SchemeConfig(t_end=1.0, box_tol=1.0)
        last = None
        u0 = mollified_dirac(grid, 1.0, eps=kw.get("eps"))
        for last in iterate(u0, cfg, unit):
            pass
        F1 = extract_profile(last, unit)
    else:
        raise ConfigError(f"route must be 'rescaled' or 'renormalized', got {route!r}")
    if p.M == 1.0:
        return F1
    from .params import profile_mass_scaling

    return profile_mass_scaling(F1, p.M, unit)


def _line_profile(unit: Params, grid: LineGrid, route: str, cfg: SchemeConfig | None, **kw) -> Profile:
    meta = {"domain": "line", "n": grid.n, "L": grid.L, "trusted_radius": line_trusted_radius(grid)}
    if route == "renormalized":
        v, info = solve_line_renormalized(unit, grid, cfg, **kw)
        r, F = steady_profile_samples(v)
    elif route == "rescaled":
        r, F, info = solve_line_profile(unit, grid, cfg, eps=kw.get("eps"))
    else:
        raise ConfigError(f"route must be 'rescaled' or 'renormalized', got {route!r}")
    meta.update(info)
    return Profile(r, F, 1.0, unit, route, meta=meta)


def profile_residual(F: Profile, p: Params, grid: Grid | None = None, alpha_scale: float = 1.0) -> float:
    """sup over the trusted interior of |(-Delta)^s F^m - alpha F - beta y.grad F| / (alpha F(0)).

    F is sampled on a 1-D periodic grid (default: spacing of the profile samples,
    half-width twice the last sample) and the operator is applied spectrally.
    """
    e = exponents(p)
    alpha = e.alpha * alpha_scale
    if isinstance(grid, LineGrid) or (grid is None and F.meta.get("domain") == "line"):
        return _line_residual(F, p, grid or LineGrid(F.meta["n"], F.meta["L"]), alpha, e.beta)
    if grid is None:
        dr = float(F.r[1] - F.r[0])
        L = 2.0 * float(F.r[-1])
        n = 1 << int(math.ceil(math.log2(2 * L / dr)))
        grid = Grid(1, max(n, 16), L)
    if grid.dim != 1:
        raise GridMismatch("profile_residual works on one-dimensional grids")
    y = grid.axis
    vals = F(y)
    op = SpectralOperator(grid, p.sf, "exact")
    lhs = op.apply(vals ** p.mf)
    # y.grad F from the radial derivative of the smooth interpolant
    dF = np.gradient(vals, grid.dx)
    res = lhs - alpha * vals - e.beta * y * dF
    F0 = float(F(np.array([0.0]))[0])
    trusted = (np.abs(y) <= 0.5 * grid.L) & (vals >= 1e-6 * F0) & (np.abs(y) <= F.r[-1])
    return float(np.max(np.abs(res[trusted])) / (alpha * F0))


def _line_residual(F: Profile, p: Params, grid: LineGrid, alpha: float, beta: float) -> float:
    """Residual on the mapped line; y dF/dy = sin(theta) dF/dtheta by spectral differentiation."""
    vals = F(grid.x)
    op = LineOperator(grid, "exact")
    lhs = op.apply(vals ** p.mf)
    k = np.fft.rfftfreq(grid.n, d=1.0 / grid.n)
    dtheta = np.fft.irfft(1j * k * np.fft.rfft(vals), n=grid.n)
    res = lhs - alpha * vals - beta * np.sin(grid.theta) * dtheta
    F0 = float(F(np.array([0.0]))[0])
    trusted = (vals >= 1e-6 * F0) & (np.abs(grid.x) <= line_trusted_radius(grid))
    return float(np.max(np.abs(res[trusted])) / (alpha * F0))


# -- explicit solutions ----------------------------------------------------------


def vss_field(x, t: float, p: Params):
    """C t^{1/(1-m)} |x|^{-2s/(1-m)}, the separated-variables singular solution."""
    C = vss_constant(p).C
    m, s = p.mf, p.sf
    r = np.abs(np.asarray(x, dtype=float)) if p.N == 1 or np.ndim(x) == 0 else np.linalg.norm(x, axis=-1)
    if t < 0:
        raise ConfigError("vss_field needs t >= 0")
    return C * t ** (1 / (1 - m)) * r ** (-2 * s / (1 - m))


def eternal_profile_s1(a: float, b: float, x, t: float, N: int):
    """(a |x|^2 + b e^{2Nat})^{-N/2}, defined for every real t."""
    if a <= 0 or b < 0:
        raise ConfigError("eternal family needs a > 0 and b >= 0")
    x = np.asarray(x, dtype=float)
    points = x.ndim >= 1 and x.shape[-1] == N and (N > 1 or x.ndim >= 2)
    r2 = np.sum(x * x, axis=-1) if points else x * x
    base = a * r2 + b * math.exp(2 * N * a * t)
    with np.errstate(divide="ignore"):
        out = np.where(base > 0, base, 0.0) ** (-N / 2)
    return float(out) if out.ndim == 0 else out


def _eternal_profile_c(y, a: float, b: float, N: int):
    return (b + a * y * y) ** (-N / 2)


def eternal_flux_residual(a: float, b: float, N: int, y: np.ndarray, h: float = 1e-30) -> np.ndarray:
    """Relative residual of grad(F^m / m) + c y F = 0 for F(y) = (b + a y^2)^{-N/2}, m = (N-2)/N, c = N a.

    This first-order relation is the zero-flux form of the classical renormalised
    steady state. Derivatives are taken by complex-step differentiation of the
    explicit formula, exact to rounding. For N = 2 the potential F^m / m is
    replaced by its m -> 0 limit log F.
    """
    if N < 2:
        raise ConfigError("the classical critical exponent (N-2)/N is positive only for N >= 3 (N = 2 via log)")
    y = np.asarray(y, dtype=float)
    m = (N - 2) / N
    z = y + 1j * h
    Fz = _eternal_profile_c(z, a, b, N)
    pot = np.log(Fz) if N == 2 else Fz**m / m
    grad = np.imag(pot) / h
    F = _eternal_profile_c(y, a, b, N)
    drift = N * a * y * F
    return np.abs(grad + drift) / np.maximum(np.abs(drift), 1e-300)
