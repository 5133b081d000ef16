"""Command-line runner: constants, kernels, runs, profiles, acceptance suites and sweeps.

Configuration is a flat text file of dotted ``key = value`` lines; extra
``key=value`` arguments after the command override it. Exit codes: 0 ok,
1 internal error or failing verdict, 2 invalid configuration or regime.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import checks
from .analysis import expected_tail, fit_tail, report_json
from .errors import ConfigError, DomainError, FpmeError, RegimeError
from .evolve import SchemeConfig, box_data, iterate, mollified_dirac, new_manifest, require_fundamental
from .grid import Field, Grid
from .line import LineGrid
from .params import Params, RegimeTag, classify, exponents
from .selfsim import profile_residual, solve_profile
from .specfun import bessel_G, cauchy_kernel, k_alpha, linear_kernel, riesz_gamma, riesz_kernel, vss_constant
from .svg import profile_plot

log = logging.getLogger("fpme")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
COMMANDS = ("constants", "kernel", "evolve", "profile", "verify", "sweep")


# -- configuration --------------------------------------------------------------


def parse_value(text: str) -> Any:
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        return [parse_value(t) for t in inner.split(",")] if inner else []
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "null"):
        return None
    for conv in (int, Fraction, float):
        try:
            v = conv(text)
        except (ValueError, ZeroDivisionError):
            continue
        if isinstance(v, Fraction) and v.denominator == 1:
            return int(v)
        return v
    return text


def parse_config(text: str) -> dict[str, Any]:
    cfg: dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"config line {number}: empty key")
        cfg[key] = parse_value(value)
    return cfg


def load_config(path: str | None, overrides: Sequence[str]) -> dict[str, Any]:
    cfg = parse_config(Path(path).read_text()) if path else {}
    cfg.update(parse_config("\n".join(overrides)))
    return cfg


def section(cfg: dict, prefix: str) -> dict[str, Any]:
    head = prefix + "."
    return {k[len(head):]: v for k, v in cfg.items() if k.startswith(head)}


def _number(v: Any, key: str) -> Any:
    if isinstance(v, bool) or not isinstance(v, (int, float, Fraction)):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    return v


def params_from(cfg: dict) -> Params:
    sec = section(cfg, "params")
    missing = [k for k in ("N", "s", "m") if k not in sec]
    if missing:
        raise ConfigError(f"missing params.{', params.'.join(missing)}")
    return Params(_number(sec["N"], "params.N"), _number(sec["s"], "params.s"), _number(sec["m"], "params.m"),
                  float(_number(sec.get("M", 1.0), "params.M")))


def grid_from(cfg: dict, default_kind: str = "periodic") -> Grid | LineGrid:
    sec = section(cfg, "grid")
    kind = sec.get("kind", default_kind)
    n = int(_number(sec.get("n", 1024), "grid.n"))
    L = float(_number(sec.get("L", 20.0), "grid.L"))
    if kind == "periodic":
        return Grid(int(_number(sec.get("dim", 1), "grid.dim")), n, L)
    if kind == "line":
        return LineGrid(n, L)
    raise ConfigError(f"grid.kind must be 'periodic' or 'line', got {kind!r}")


SCHEME_KEYS = set(SchemeConfig.__dataclass_fields__)


def scheme_from(cfg: dict, **defaults) -> SchemeConfig:
    sec = section(cfg, "scheme")
    unknown = set(sec) - SCHEME_KEYS
    if unknown:
        raise ConfigError(f"unknown scheme keys {sorted(unknown)}")
    kw = dict(defaults)
    for k, v in sec.items():
        kw[k] = float(v) if isinstance(v, Fraction) else v
    if "t_end" not in kw:
        raise ConfigError("scheme.t_end is required")
    return SchemeConfig(**kw)


def _out_dir(out: str | None) -> Path | None:
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(out: Path | None, name: str, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        (out / name).write_text(text)


def _dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- commands -----------------------------------------------------------------------


def constants_report(p: Params) -> dict:
    reg = classify(p)
    body: dict[str, Any] = {"N": p.N, "s": p.sf, "m": p.mf, "m_c": reg.m_c, "m_1": reg.m_1,
                            "regime": reg.tag.value}
    try:
        body["gamma(2s)"] = riesz_gamma(2 * p.sf, p.N)
    except DomainError:
        body["gamma(2s)"] = None
    if reg.tag is RegimeTag.SUBCRITICAL:
        body.update(alpha=None, beta=None)
        return body
    e = exponents(p)
    body.update(alpha=e.alpha, beta=e.beta)
    if reg.tag is RegimeTag.FAST_SINGULAR:
        v = vss_constant(p)
        body.update(alpha_vss=v.alpha_vss, k_alpha=v.k_alpha, C_VSS=v.C)
    return body


def cmd_constants(cfg: dict, args: argparse.Namespace) -> int:
    p = params_from(cfg)
    body = constants_report(p)
    text = _dumps(body)
    sys.stdout.write(text)
    if args.out:
        _emit(_out_dir(args.out), "constants.json", text)
    if body["regime"] == RegimeTag.SUBCRITICAL.value:
        log.error("m=%g lies at or below m_c=%g: no scaling exponents", p.mf, body["m_c"])
        return EXIT_CONFIG
    return EXIT_OK


def kernel_values(cfg: dict) -> tuple[np.ndarray, np.ndarray]:
    sec = section(cfg, "kernel")
    name = sec.get("name", "cauchy")
    N = int(sec.get("N", 1))
    if name == "fractional":
        grid = grid_from(cfg)
        if not isinstance(grid, Grid):
            raise ConfigError("the fractional heat kernel is computed on a periodic grid")
        field = linear_kernel(grid, float(sec.get("t", 1.0)), float(sec.get("s", 0.5)), grid.dim,
                              float(sec.get("tail_tol", 1e-6)))
        return field.slice_1d()
    x = np.linspace(float(sec.get("x_min", 0.1)), float(sec.get("x_max", 10.0)), int(sec.get("points", 100)))
    if name == "cauchy":
        return x, cauchy_kernel(x, float(sec.get("t", 1.0)), N)
    if name == "riesz":
        # radii as one-component points, so the norm is taken per sample in any N
        return x, np.reshape(riesz_kernel(x[:, None], float(sec.get("s", 0.25)), N), -1)
    if name == "bessel":
        a = float(sec.get("alpha", 1.0))
        return x, np.array([bessel_G(a, float(v), N) for v in x])
    if name == "power":
        a, s = float(sec.get("alpha", 0.5)), float(sec.get("s", 0.5))
        return x, k_alpha(a, s, N) * np.abs(x) ** (-a - 2 * s)
    raise ConfigError(f"kernel.name must be cauchy, fractional, riesz, bessel or power, got {name!r}")


def cmd_kernel(cfg: dict, args: argparse.Namespace) -> int:
    x, v = kernel_values(cfg)
    rows = ["x,value"] + [f"{a!r},{b!r}" for a, b in zip(x.tolist(), np.asarray(v, dtype=float).tolist())]
    _emit(_out_dir(args.out), "kernel.csv", "\n".join(rows) + "\n")
    return EXIT_OK


def initial_data(cfg: dict, grid: Grid, p: Params) -> Field:
    sec = section(cfg, "data")
    kind = sec.get("kind", "dirac")
    M = p.M
    if kind == "dirac":
        require_fundamental(p)
        eps = sec.get("eps")
        return mollified_dirac(grid, M, None if eps is None else float(eps))
    if kind == "box":
        return box_data(grid, M, float(sec.get("half_width", 1.0)))
    if kind == "bumps":
        rng = np.random.default_rng(int(sec.get("seed", 0)))
        count = int(sec.get("count", 3))
        vals = np.zeros(grid.shape)
        for _ in range(count):
            centre = rng.uniform(-0.25 * grid.L, 0.25 * grid.L, size=grid.dim)
            width = rng.uniform(0.5, 2.0)
            vals += rng.uniform(0.2, 1.0) * mollified_dirac(grid, 1.0, width, centre).values
        return Field(grid, vals * (M / grid.integrate(vals)))
    raise ConfigError(f"data.kind must be dirac, box or bumps, got {kind!r}")


def cmd_evolve(cfg: dict, args: argparse.Namespace) -> int:
    p = params_from(cfg)
    grid = grid_from(cfg)
    if not isinstance(grid, Grid):
        raise ConfigError("evolve runs on periodic grids; line grids serve profile solves")
    scheme = scheme_from(cfg)
    u0 = initial_data(cfg, grid, p)
    out = _out_dir(args.out or "fpme-evolve")
    (out / "checkpoints").mkdir(exist_ok=True)
    manifest = new_manifest(u0, scheme, p)
    last = u0
    files = []
    for k, last in enumerate(iterate(u0, scheme, p, manifest)):
        name = f"checkpoints/u_{k:04d}.bin"
        last.save(out / name)
        files.append({"file": name, "t": last.time})
    manifest.checkpoints.clear()
    body = manifest.to_json()
    body["checkpoint_files"] = files
    body["data"] = section(cfg, "data") or {"kind": "dirac"}
    (out / "manifest.json").write_text(_dumps(_plain_cfg(body)))
    (out / "diagnostics.csv").write_text(manifest.diagnostics_csv())
    (out / "final.csv").write_text(last.to_csv())
    log.info("evolved to t=%g in %d steps", last.time, manifest.steps)
    return EXIT_OK


def _plain_cfg(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _plain_cfg(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_plain_cfg(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def profile_summary(F, p: Params, window) -> dict:
    body: dict[str, Any] = {"params": p.to_json(), "route": F.route, "F0": float(F.F[0]),
                            "meta": {k: v for k, v in F.meta.items() if isinstance(v, (int, float, str))}}
    body["residual"] = profile_residual(F, p)
    if window is not None:
        target, borderline = expected_tail(p)
        fit = fit_tail(F, tuple(float(w) for w in window))
        body["tail"] = {"window": list(fit.window), "fitted": fit.slope, "expected": target, "r2": fit.r2,
                        "log_corrected": borderline, "log_margin": fit.log_margin}
    return body


def cmd_profile(cfg: dict, args: argparse.Namespace) -> int:
    p = params_from(cfg)
    require_fundamental(p)
    grid = grid_from(cfg, default_kind="line")
    sec = section(cfg, "profile")
    route = sec.get("route", "renormalized")
    scheme = scheme_from(cfg, t_end=1.0) if section(cfg, "scheme") else None
    F = solve_profile(p, grid, route, scheme)
    out = _out_dir(args.out or "fpme-profile")
    (out / "profile.csv").write_text(F.to_csv())
    window = sec.get("window")
    (out / "profile.json").write_text(_dumps(profile_summary(F, p, window)))
    keep = (F.r > 0) & (F.r <= F.meta.get("trusted_radius", math.inf))
    target = expected_tail(p)[0]
    (out / "profile.svg").write_text(
        profile_plot(f"profile N={p.N} s={p.sf:g} m={p.mf:g}", [("F", F.r[keep], F.F[keep])],
                     [(f"r^-{target:.4g}", target)]))
    return EXIT_OK


def cmd_verify(cfg: dict, args: argparse.Namespace) -> int:
    names = checks.resolve_suites(args.suite or cfg.get("verify.suite", "all"))
    has_params = any(k.startswith("params.") for k in cfg)
    params = params_from(cfg) if has_params else None
    if params is not None:
        checks.check_regime(params, cfg.get("verify.regime"))
    out = _out_dir(args.out or "fpme-verify")
    verdicts = []
    for name in names:
        if name == "tails":
            result = checks.tail_regimes(params)
        elif name == "conservation":
            result = checks.conservation(args.workers)
        else:
            result = checks.SUITES[name]()
        for v in result.verdicts:
            print(v.line(), flush=True)
        verdicts.extend(result.verdicts)
        for fname, text in result.files.items():
            (out / fname).write_text(text)
    (out / "verdicts.json").write_text(report_json(verdicts) + "\n")
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_FAIL


def sweep_members(cfg: dict) -> list[tuple[int, Fraction, Fraction]]:
    sec = section(cfg, "sweep")

    def listed(key: str, default: list) -> list:
        v = sec.get(key, default)
        return v if isinstance(v, list) else [v]

    members = [(int(N), Fraction(s), Fraction(m))
               for N, s, m in itertools.product(listed("N", [1]), listed("s", [Fraction(1, 2)]), listed("m", []))]
    unique = list(dict.fromkeys(members))
    if len(unique) < len(members):
        log.warning("sweep: dropped %d duplicate member(s)", len(members) - len(unique))
    return unique


def run_member(member: tuple[int, Fraction, Fraction], n: int, L: float, window: tuple[float, float],
               tolerance: float, out: str) -> dict:
    """One sweep member; failures are reported in the row instead of raised."""
    N, s, m = member
    row: dict[str, Any] = {"m": float(m), "s": float(s), "N": N, "fitted": None, "expected": None, "pass": False}
    folder = Path(out) / f"N{N}_s{float(s):g}_m{float(m):g}"
    folder.mkdir(parents=True, exist_ok=True)
    try:
        p = Params(N, s, m)
        target = expected_tail(p)[0]
        row["expected"] = target
        if N != 1 or s != Fraction(1, 2):
            raise ConfigError("sweep profiles are solved on the whole line, which supports N=1, s=1/2")
        F, fitted, _ = checks.sweep_member(m, n, L, window)
        row["fitted"] = fitted
        row["pass"] = abs(fitted - target) <= tolerance * target
        (folder / "profile.csv").write_text(F.to_csv())
    except FpmeError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    manifest = {"member": {"N": N, "s": str(s), "m": str(m)}, "grid": {"kind": "line", "n": n, "L": L},
                "window": list(window), "tolerance": tolerance, "result": row}
    (folder / "manifest.json").write_text(_dumps(manifest))
    return row


def cmd_sweep(cfg: dict, args: argparse.Namespace) -> int:
    members = sweep_members(cfg)
    sec = section(cfg, "sweep")
    out = _out_dir(args.out or "fpme-sweep")
    n = int(sec.get("grid.n", checks.SWEEP_GRID[0]))
    L = float(sec.get("grid.L", checks.SWEEP_GRID[1]))
    window = tuple(float(w) for w in sec.get("window", list(checks.SWEEP_WINDOW)))
    tolerance = float(sec.get("tolerance", 0.10))
    job = [(mem, n, L, window, tolerance, str(out)) for mem in members]
    if args.workers > 1 and len(job) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(run_member, *zip(*job)))
    else:
        rows = [run_member(*j) for j in job]
    lines = ["m,s,N,fitted,expected,pass"]
    for r in rows:
        cells = [repr(r["m"]), repr(r["s"]), str(r["N"])]
        cells += ["" if r[k] is None else repr(r[k]) for k in ("fitted", "expected")]
        lines.append(",".join(cells + [str(r["pass"]).lower()]))
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    summary: dict[str, Any] = {"members": rows, "pass": all(r["pass"] for r in rows)}
    fitted_rows = [r for r in rows if r["fitted"] is not None and r["N"] == 1 and r["s"] == 0.5]
    if len(fitted_rows) >= 3:
        m1 = classify(Params(1, Fraction(1, 2), 1)).m_1
        ordered = sorted(fitted_rows, key=lambda r: r["m"])
        summary["regime_curve"] = checks.tracks_regime_curve(
            [r["m"] for r in ordered], [r["fitted"] for r in ordered], [r["expected"] for r in ordered], m1)
    (out / "sweep.json").write_text(_dumps(summary))
    for r in rows:
        print(f"{'PASS' if r['pass'] else 'FAIL'} m={r['m']:g} s={r['s']:g} N={r['N']} "
              f"fitted={r['fitted']} expected={r['expected']}" + (f" ({r['error']})" if "error" in r else ""))
    return EXIT_OK if summary["pass"] else EXIT_FAIL


HANDLERS = {
    "constants": cmd_constants,
    "kernel": cmd_kernel,
    "evolve": cmd_evolve,
    "profile": cmd_profile,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpme", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("overrides", nargs="*", metavar="key=value", help="config entries overriding --config")
    parser.add_argument("--config", help="flat dotted key = value file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--workers", type=int, default=1, help="processes for sweeps and the conservation suite")
    parser.add_argument("--suite", help="comma-separated acceptance suites for verify, or 'all'")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_intermixed_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg = load_config(args.config, args.overrides)
        return HANDLERS[args.command](cfg, args)
    except (ConfigError, RegimeError, ValueError, OSError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - every other failure is an internal error
        log.error("internal error: %s: %s", type(exc).__name__, exc)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
