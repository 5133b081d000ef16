"""Explicit time integration of u_t + (-Delta)^s(u^m) + eps u^m = 0 on a periodic box.

Each step is Heun's method written as the average of u and two forward-Euler
stages. With the lattice symbol and the step bound below, every Euler stage is
a monotone map, so positivity, ordering and L1 contraction carry over to the
full scheme.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from . import kernels
from .errors import BlowUp, BoxTooSmall, ConfigError, RegimeError, StabilityViolation
from .fraclap import FILTERS, SYMBOLS, SpectralOperator
from .grid import Field, Grid
from .params import Params, RegimeTag, classify
from .specfun import bump_profile

CHECKPOINT_RATIO = 2.0**0.25
FAST_RATE_CAP = 1e6


@dataclass(frozen=True)
class SchemeConfig:
    """Time-stepping controls.

    box_tol is the largest fraction of the mass allowed in |x| > L/2 before a
    run is declared to have outgrown the box.
    """

    t_end: float
    dt_init: float | None = None
    cfl_safety: float = 0.5
    eps_absorption: float = 0.0
    mass_tol: float = 1e-6
    ringing_tol: float = 1e-8
    symbol: str = "lattice"
    filter: str = "none"
    box_tol: float = 0.05
    floor_rel: float = 1e-12
    checkpoint_t0: float | None = None
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.eps_absorption < 0:
            raise ConfigError("eps_absorption must be nonnegative")
        if self.dt_init is not None and not self.dt_init > 0:
            raise ConfigError("dt_init must be positive")
        if self.symbol not in SYMBOLS:
            raise ConfigError(f"symbol must be one of {SYMBOLS}")
        if self.filter not in FILTERS:
            raise ConfigError(f"filter must be one of {FILTERS}")
        if self.checkpoint_t0 is not None and not self.checkpoint_t0 > 0:
            raise ConfigError("checkpoint_t0 must be positive")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class RunManifest:
    """Record of one simulation. Rows hold (t, mass, supnorm, energy, min) at each checkpoint."""

    params: dict
    scheme: dict
    grid: dict
    rows: list[dict] = field(default_factory=list)
    checkpoints: list[Field] = field(default_factory=list, repr=False)
    steps: int = 0
    clipped_mass: float = 0.0
    termination: str = "running"

    @property
    def times(self) -> np.ndarray:
        return np.array([r["t"] for r in self.rows])

    def series(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows])

    def to_json(self) -> dict:
        return {
            "params": self.params,
            "scheme": self.scheme,
            "grid": self.grid,
            "steps": self.steps,
            "clipped_mass": self.clipped_mass,
            "termination": self.termination,
            "diagnostics": self.rows,
        }

    def diagnostics_csv(self) -> str:
        lines = ["t,mass,supnorm,energy,min"]
        for r in self.rows:
            lines.append(f"{r['t']!r},{r['mass']!r},{r['supnorm']!r},{r['energy']!r},{r['min']!r}")
        return "\n".join(lines) + "\n"


# -- operator cache ----------------------------------------------------------

_OPS: dict = {}


def operator_for(grid: Grid, s: float, cfg: SchemeConfig) -> SpectralOperator:
    key = (grid, float(s), cfg.symbol, cfg.filter)
    op = _OPS.get(key)
    if op is None:
        if len(_OPS) > 32:
            _OPS.clear()
        op = _OPS[key] = SpectralOperator(grid, float(s), cfg.symbol, cfg.filter)
    return op


# -- step size -------------------------------------------------------------


def _rate(values: np.ndarray, p: Params, cfg: SchemeConfig) -> float:
    """Largest slope m u^{m-1} of the nonlinearity over the relevant range of u."""
    m = p.mf
    umax = float(values.max())
    if umax <= 0:
        return 0.0
    if m == 1:
        return 1.0
    if m > 1:
        return m * umax ** (m - 1)
    floor = max(float(values.min()), cfg.floor_rel * umax)
    return min(m * floor ** (m - 1), FAST_RATE_CAP)


def stable_dt(u: Field | np.ndarray, p: Params, cfg: SchemeConfig, op: SpectralOperator) -> float:
    """Largest step for which each Euler stage is monotone (scaled by cfl_safety).

    Monotonicity needs 1 - dt (a_ii + eps) m u^{m-1} >= 0 with a_ii the diagonal
    of the operator matrix; plain stability needs dt <= 2 / (max multiplier rate).
    """
    values = u.values if isinstance(u, Field) else u
    kappa = max(op.diagonal, 0.5 * op.max_multiplier) + cfg.eps_absorption
    rate = _rate(values, p, cfg)
    if rate == 0 or kappa == 0:
        return math.inf
    return cfg.cfl_safety / (kappa * rate)


# -- single step -------------------------------------------------------------


class _Workspace:
    def __init__(self, shape):
        self.w = np.empty(shape)
        self.stage = np.empty(shape)
        self.out = np.empty(shape)


def _euler(u: np.ndarray, dt: float, m: float, eps: float, op: SpectralOperator, ws: _Workspace,
           out: np.ndarray) -> float:
    flat_u = u.reshape(-1)
    w = ws.w.reshape(-1)
    kernels.guarded_power(flat_u, m, w)
    au = op.apply(ws.w).reshape(-1)
    return kernels.euler_update(flat_u, np.ascontiguousarray(au), w, dt, eps, out.reshape(-1))


def _advance(values: np.ndarray, dt: float, p: Params, cfg: SchemeConfig, op: SpectralOperator,
             ws: _Workspace | None = None) -> tuple[np.ndarray, float]:
    ws = ws or _Workspace(values.shape)
    u = np.ascontiguousarray(values, dtype=np.float64)
    m, eps = p.mf, cfg.eps_absorption
    clipped = _euler(u, dt, m, eps, op, ws, ws.stage)
    stage2 = ws.out
    clipped += _euler(ws.stage, dt, m, eps, op, ws, stage2)
    new = np.empty_like(u)
    kernels.heun_combine(u.reshape(-1), stage2.reshape(-1), new.reshape(-1))
    # clipping adds mass to each stage; half of it survives the final average
    return new, 0.5 * clipped


def step(u: Field, cfg: SchemeConfig, p: Params, dt: float | None = None,
         op: SpectralOperator | None = None) -> Field:
    """Advance u by one step of size dt (default: the stable step)."""
    op = op or operator_for(u.grid, p.sf, cfg)
    bound = stable_dt(u, p, cfg, op)
    if dt is None:
        dt = bound if math.isfinite(bound) else (cfg.dt_init or cfg.t_end)
    elif dt > bound * (1 + 1e-12):
        raise StabilityViolation(f"dt={dt:.4g} exceeds the stable bound {bound:.4g}")
    new, _ = _advance(u.values, dt, p, cfg, op)
    _check_growth(u.values, new)
    return Field(u.grid, new, u.time + dt)


def _check_growth(old: np.ndarray, new: np.ndarray) -> None:
    a, b = float(np.max(np.abs(old))), float(np.max(np.abs(new)))
    if b > 1.1 * a and b > 0:
        raise BlowUp(f"sup-norm grew from {a:.4g} to {b:.4g} in one step")


# -- runs --------------------------------------------------------------------


def require_fundamental(p: Params) -> None:
    """Refuse point-mass (fundamental-solution) runs below the critical exponent."""
    if classify(p).tag is RegimeTag.SUBCRITICAL:
        raise RegimeError(
            f"m={p.mf} <= m_c: point masses do not spread for these parameters, so no long-time run is defined"
        )


def _diagnostics(values: np.ndarray, t: float, p: Params, op: SpectralOperator, grid: Grid) -> dict:
    w = np.empty(values.size)
    kernels.guarded_power(np.ascontiguousarray(values).reshape(-1), p.mf, w)
    return {
        "t": float(t),
        "mass": grid.integrate(values),
        "supnorm": float(np.max(np.abs(values))),
        "energy": op.energy(w.reshape(values.shape)),
        "min": float(values.min()),
    }


def outer_mass_fraction(values: np.ndarray, grid: Grid) -> float:
    """Share of the mass in |x| > L/2 (sup-norm distance, i.e. outside the central box)."""
    coords = grid.coords()
    outer = np.zeros(grid.shape, dtype=bool)
    for c in coords:
        outer |= np.abs(c) > 0.5 * grid.L
    total = float(values.sum())
    return float(values[outer].sum()) / total if total > 0 else 0.0


def checkpoint_times(t_start: float, t_end: float, t0: float) -> list[float]:
    """Geometric grid t0 * 2^{k/4} restricted to (t_start, t_end], with t_end appended."""
    out = []
    k = 0
    while True:
        t = t0 * CHECKPOINT_RATIO**k
        if t > t_end * (1 - 1e-12):
            break
        if t > t_start * (1 + 1e-12):
            out.append(t)
        k += 1
    out.append(t_end)
    return out


def iterate(u0: Field, cfg: SchemeConfig, p: Params, manifest: RunManifest | None = None
            ) -> Iterator[Field]:
    """Yield the solution at every checkpoint; the manifest (if given) is updated in place."""
    if np.any(u0.values < 0):
        raise ConfigError("initial data must be nonnegative")
    grid = u0.grid
    op = operator_for(grid, p.sf, cfg)
    diag_op = SpectralOperator(grid, p.sf, "exact")
    t0 = cfg.checkpoint_t0 or (u0.time if u0.time > 0 else cfg.t_end * 2.0**-10)
    stops = checkpoint_times(u0.time, cfg.t_end, t0)
    ws = _Workspace(grid.shape)
    values = np.array(u0.values)
    t = u0.time
    first = True
    if manifest is not None:
        manifest.rows.append(_diagnostics(values, t, p, diag_op, grid))
    for stop in stops:
        while t < stop * (1 - 1e-14):
            dt = stable_dt(values, p, cfg, op)
            if first and cfg.dt_init is not None:
                dt = min(dt, cfg.dt_init)
            first = False
            if not math.isfinite(dt):
                dt = stop - t
            dt = min(dt, stop - t)
            new, clipped = _advance(values, dt, p, cfg, op, ws)
            _check_growth(values, new)
            values = new
            t += dt
            if manifest is not None:
                manifest.steps += 1
                manifest.clipped_mass += clipped * grid.cell_volume
                if manifest.steps > cfg.max_steps:
                    manifest.termination = "max_steps"
                    raise StabilityViolation(f"exceeded max_steps={cfg.max_steps}")
        t = stop
        if outer_mass_fraction(values, grid) > cfg.box_tol:
            if manifest is not None:
                manifest.termination = "box_too_small"
            raise BoxTooSmall(
                f"mass fraction {outer_mass_fraction(values, grid):.3g} beyond L/2 exceeds {cfg.box_tol} at t={t:.4g}"
            )
        field_t = Field(grid, values, t)
        if manifest is not None:
            manifest.rows.append(_diagnostics(values, t, p, diag_op, grid))
            manifest.checkpoints.append(field_t)
        yield field_t
    if manifest is not None:
        manifest.termination = "t_end"


def new_manifest(u0: Field, cfg: SchemeConfig, p: Params) -> RunManifest:
    g = u0.grid
    return RunManifest(p.to_json(), cfg.to_json(), {"dim": g.dim, "n": g.n, "L": g.L})


def run(u0: Field, cfg: SchemeConfig, p: Params) -> tuple[Field, RunManifest]:
    """Integrate to cfg.t_end; checkpoints land on the geometric grid t0 * 2^{k/4}."""
    manifest = new_manifest(u0, cfg, p)
    last = u0
    for last in iterate(u0, cfg, p, manifest):
        pass
    return last, manifest


@dataclass(frozen=True)
class ComparisonReport:
    max_violation: float
    tolerance: float
    passed: bool
    l1_gaps: tuple[float, ...]


def comparison_check(u0: Field, v0: Field, cfg: SchemeConfig, p: Params) -> ComparisonReport:
    """Evolve ordered data u0 <= v0 side by side and measure any loss of ordering."""
    if np.any(u0.values > v0.values):
        from .errors import InputNotOrdered

        raise InputNotOrdered("comparison_check needs u0 <= v0 pointwise")
    pu = p.with_mass(max(u0.mass(), 1e-300))
    pv = p.with_mass(max(v0.mass(), 1e-300))
    worst = 0.0
    gaps = [u0.grid.integrate(v0.values - u0.values)]
    for fu, fv in zip(iterate(u0, cfg, pu), iterate(v0, cfg, pv)):
        scale = max(fv.supnorm(), 1e-300)
        worst = max(worst, float(np.max(fu.values - fv.values)) / scale)
        gaps.append(u0.grid.integrate(np.abs(fv.values - fu.values)))
    tol = cfg.ringing_tol
    return ComparisonReport(max(worst, 0.0), tol, worst <= tol, tuple(gaps))


# -- initial data ------------------------------------------------------------


def mollified_dirac(grid: Grid, M: float = 1.0, eps: float | None = None, center=None) -> Field:
    """M times the unit bump of radius eps (default 4 dx), renormalised to discrete mass M."""
    eps = 4.0 * grid.dx if eps is None else eps
    coords = grid.coords()
    c = np.zeros(grid.dim) if center is None else np.atleast_1d(np.asarray(center, dtype=float))
    r = np.sqrt(sum((x - ci) ** 2 for x, ci in zip(coords, c)))
    vals = bump_profile(grid.dim)(r / eps)
    total = grid.integrate(vals)
    if total <= 0:
        raise ConfigError(f"mollifier radius {eps} does not cover a grid point")
    return Field(grid, vals * (M / total), 0.0)


def box_data(grid: Grid, M: float = 1.0, half_width: float = 1.0, center=None) -> Field:
    coords = grid.coords()
    c = np.zeros(grid.dim) if center is None else np.atleast_1d(np.asarray(center, dtype=float))
    inside = np.ones(grid.shape, dtype=bool)
    for x, ci in zip(coords, c):
        inside &= np.abs(x - ci) <= half_width
    vals = inside.astype(float)
    total = grid.integrate(vals)
    if total <= 0:
        raise ConfigError("box data covers no grid point")
    return Field(grid, vals * (M / total), 0.0)
