"""NumPy implementations of the compiled inner loops (same signatures)."""

from __future__ import annotations

import numpy as np


def guarded_power(u: np.ndarray, m: float, out: np.ndarray) -> None:
    pos = np.maximum(u, 0.0)
    if m == 1.0:
        out[:] = pos
    else:
        np.power(pos, m, out=out)


def euler_update(u: np.ndarray, au: np.ndarray, w: np.ndarray, dt: float, eps: float, out: np.ndarray) -> float:
    np.multiply(w, eps, out=out)
    out += au
    out *= -dt
    out += u
    clipped = -float(out[out < 0.0].sum())
    np.maximum(out, 0.0, out=out)
    return clipped


def heun_combine(u: np.ndarray, stage: np.ndarray, out: np.ndarray) -> None:
    np.add(u, stage, out=out)
    out *= 0.5


def shell_sums(values: np.ndarray, radius: np.ndarray, dr: float, nbins: int):
    k = (radius / dr + 0.5).astype(np.int64)
    keep = k < nbins
    k, v = k[keep], values[keep]
    s1 = np.bincount(k, weights=v, minlength=nbins)[:nbins]
    s2 = np.bincount(k, weights=v * v, minlength=nbins)[:nbins]
    cnt = np.bincount(k, minlength=nbins)[:nbins].astype(np.int64)
    return s1, s2, cnt


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b <= 0.0, 0.0, np.where(np.abs(a) < np.abs(b), a, b))


def transport_rhs(v: np.ndarray, face_velocity: np.ndarray, dx: float, out: np.ndarray) -> None:
    vp1 = np.roll(v, -1)
    vm1 = np.roll(v, 1)
    vp2 = np.roll(v, -2)
    from_left = v + 0.5 * _minmod(v - vm1, vp1 - v)
    from_right = vp1 - 0.5 * _minmod(vp1 - v, vp2 - vp1)
    flux = face_velocity * np.where(face_velocity >= 0.0, from_left, from_right)
    np.subtract(np.roll(flux, 1), flux, out=out)
    out /= dx
