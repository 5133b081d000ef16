"""Uniform periodic tensor grids and the sampled fields that live on them."""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, GridMismatch

_HEADER = struct.Struct("<qqdd")


@dataclass(frozen=True)
class Grid:
    """Box [-L, L)^dim sampled with n points per axis."""

    dim: int
    n: int
    L: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"grid dim must be 1 or 2, got {self.dim}")
        if self.n < 16 or self.n & (self.n - 1):
            raise ConfigError(f"grid n must be a power of two >= 16, got {self.n}")
        if not self.L > 0:
            raise ConfigError(f"grid half-width L must be positive, got {self.L}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    @property
    def axis(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.n)

    def coords(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*([self.axis] * self.dim), indexing="ij")

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords()))

    def wavenumbers(self) -> np.ndarray:
        """Angular frequencies of the full FFT along one axis."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values) * self.cell_volume)

    def check(self, values: np.ndarray) -> None:
        if values.shape != self.shape:
            raise GridMismatch(f"array shape {values.shape} does not match grid {self.shape}")


@dataclass(frozen=True)
class Field:
    """Samples of u on a grid at a given time. Values are stored read-only."""

    grid: Grid
    values: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        self.grid.check(vals)
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "time", float(self.time))

    def mass(self) -> float:
        return self.grid.integrate(self.values)

    def supnorm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def minimum(self) -> float:
        return float(np.min(self.values))

    def replace(self, values=None, time=None) -> "Field":
        return Field(
            self.grid,
            self.values if values is None else values,
            self.time if time is None else time,
        )

    # serialization -------------------------------------------------------

    def to_bytes(self) -> bytes:
        g = self.grid
        header = _HEADER.pack(g.dim, g.n, g.L, self.time)
        return header + np.ascontiguousarray(self.values, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Field":
        dim, n, L, time = _HEADER.unpack_from(data)
        grid = Grid(int(dim), int(n), float(L))
        body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
        if body.size != n**dim:
            raise GridMismatch(f"payload has {body.size} samples, header implies {n**dim}")
        return cls(grid, body.reshape(grid.shape), time)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Field":
        return cls.from_bytes(Path(path).read_bytes())

    def slice_1d(self) -> tuple[np.ndarray, np.ndarray]:
        """The field along the first axis (through the box centre in 2-D)."""
        if self.grid.dim == 1:
            return self.grid.axis, np.asarray(self.values)
        return self.grid.axis, np.asarray(self.values[:, self.grid.n // 2])

    def to_csv(self) -> str:
        x, v = self.slice_1d()
        buf = io.StringIO()
        buf.write("x,value\n")
        for xi, vi in zip(x, v):
            buf.write(f"{xi!r},{vi!r}\n")
        return buf.getvalue()


def trig_interp_matrix(grid: Grid, points: np.ndarray) -> np.ndarray:
    """Matrix E such that E @ f evaluates the trigonometric interpolant of f at `points`.

    1-D only; the Nyquist mode enters as a cosine so real data stay real.
    """
    n = grid.n
    d = np.asarray(points, dtype=float)[:, None] - grid.axis[None, :]
    theta = np.pi * d / grid.L
    half = np.sin(0.5 * theta)
    small = np.abs(half) < 1e-12
    safe = np.where(small, 1.0, half)
    dirichlet = np.where(small, (n - 1) * np.cos(0.5 * (n - 1) * theta) / np.cos(0.5 * theta),
                         np.sin(0.5 * (n - 1) * theta) / safe)
    return (dirichlet + np.cos(0.5 * n * theta)) / n
