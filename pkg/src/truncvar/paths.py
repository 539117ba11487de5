"""Sampled paths of Brownian motion with drift and geometric Brownian motion.

Every path is a pure function of ``(seed, path_index)``: the Gaussian stream
for path ``i`` comes from ``SeedSequence(seed, spawn_key=(i,))``, so paths can
be generated in any order, in any batch size, or on different workers and
still come out bit-identical.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class ModelParams:
    """Drift, volatility, truncation level and horizon of one model."""

    mu: float = 0.0
    sigma: float = 1.0
    c: float = 1.0
    horizon_T: float = 1.0

    def __post_init__(self):
        for name in ("mu", "sigma", "c", "horizon_T"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.sigma <= 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.c <= 0:
            raise ParameterError(f"c must be positive, got {self.c}")
        if self.horizon_T <= 0:
            raise ParameterError(f"horizon_T must be positive, got {self.horizon_T}")

    def replace(self, **changes) -> "ModelParams":
        fields = {"mu": self.mu, "sigma": self.sigma, "c": self.c, "horizon_T": self.horizon_T}
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class SimConfig:
    n_steps: int = 1000
    n_paths: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n_steps < 1:
            raise ParameterError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.n_paths < 1:
            raise ParameterError(f"n_paths must be >= 1, got {self.n_paths}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True, eq=False)
class Path:
    """Ordered ``(time, value)`` samples.

    ``times`` is non-decreasing and ``values`` has the same length. An empty
    path is allowed and is what slicing an empty interval produces.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or values.ndim != 1:
            raise ParameterError("times and values must be one-dimensional")
        if times.shape != values.shape:
            raise ParameterError(
                f"times and values differ in length ({times.size} != {values.size})"
            )
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ParameterError("path contains non-finite samples")
        if times.size > 1 and np.any(np.diff(times) < 0):
            raise ParameterError("times must be non-decreasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Path):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.values, other.values
        )

    @classmethod
    def from_values(cls, values, dt: float = 1.0) -> "Path":
        values = np.asarray(values, dtype=float)
        return cls(dt * np.arange(values.size, dtype=float), values)


def path_rng(seed: int, path_index: int) -> np.random.Generator:
    """Generator for one path; independent of how many other paths exist."""
    if path_index < 0:
        raise ParameterError(f"path_index must be non-negative, got {path_index}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(path_index,))))


def time_grid(horizon: float, n_steps: int) -> np.ndarray:
    times = np.linspace(0.0, horizon, n_steps + 1)
    times[-1] = horizon
    return times


def _check_steps(n_steps: int):
    if n_steps < 1:
        raise ParameterError(f"n_steps must be >= 1, got {n_steps}")


def standard_bm(n_steps: int, dt: float, rng: np.random.Generator) -> np.ndarray:
    """Standard Brownian motion sampled at ``0, dt, ..., n_steps*dt``."""
    out = np.empty(n_steps + 1)
    out[0] = 0.0
    np.cumsum(rng.standard_normal(n_steps) * math.sqrt(dt), out=out[1:])
    return out


def generate_bm_path(params: ModelParams, n_steps: int, seed: int, path_index: int) -> Path:
    """Sample ``W_t = B_t + mu*t`` on a uniform grid over ``[0, T]``.

    Increments are drawn from their exact Gaussian law, so the only
    approximation is the finite grid.
    """
    _check_steps(n_steps)
    times = time_grid(params.horizon_T, n_steps)
    dt = params.horizon_T / n_steps
    b = standard_bm(n_steps, dt, path_rng(seed, path_index))
    return Path(times, b + params.mu * times)


def generate_gbm_price_path(params: ModelParams, n_steps: int, seed: int, path_index: int) -> Path:
    """Prices ``exp(mu*t + sigma*B_t)`` from the same stream as :func:`generate_bm_path`."""
    _check_steps(n_steps)
    times = time_grid(params.horizon_T, n_steps)
    dt = params.horizon_T / n_steps
    b = standard_bm(n_steps, dt, path_rng(seed, path_index))
    return Path(times, np.exp(params.mu * times + params.sigma * b))


def simulate_bm_batch(
    mu: float,
    horizon: float,
    n_steps: int,
    seed: int,
    path_indices,
) -> np.ndarray:
    """Rows are drifted BM paths for ``path_indices``; shape ``(len(indices), n_steps+1)``.

    Row ``k`` equals ``generate_bm_path(...).values`` for ``path_indices[k]``.
    """
    _check_steps(n_steps)
    path_indices = list(path_indices)
    dt = horizon / n_steps
    out = np.empty((len(path_indices), n_steps + 1))
    out[:, 0] = 0.0
    for row, idx in enumerate(path_indices):
        out[row, 1:] = path_rng(seed, idx).standard_normal(n_steps)
    out[:, 1:] *= math.sqrt(dt)
    np.cumsum(out[:, 1:], axis=1, out=out[:, 1:])
    out += mu * time_grid(horizon, n_steps)
    return out


def negate_path(p: Path) -> Path:
    return Path(p.times.copy(), -p.values)


def slice_path(p: Path, a: float, b: float) -> Path:
    """Samples with ``a <= t <= b``; an inverted interval gives an empty path."""
    if a > b:
        return Path(np.empty(0), np.empty(0))
    mask = (p.times >= a) & (p.times <= b)
    return Path(p.times[mask], p.values[mask])


def write_path_csv(p: Path, target) -> None:
    """Write ``time,value`` rows with LF line endings to a path or text stream."""
    if isinstance(target, (str, FsPath)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_path_csv(p, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(["time", "value"])
    for t, v in zip(p.times, p.values):
        writer.writerow([repr(float(t)), repr(float(v))])


class CsvFormatError(ParameterError):
    def __init__(self, message: str, row: int):
        super().__init__(f"row {row}: {message}")
        self.row = row


def read_path_csv(source) -> Path:
    """Parse the ``time,value`` format written by :func:`write_path_csv`.

    Row numbers in errors count the header as row 1.
    """
    if isinstance(source, (str, FsPath)):
        with open(source, encoding="utf-8", newline="") as fh:
            return read_path_csv(io.StringIO(fh.read()))
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["time", "value"]:
        raise CsvFormatError("expected header 'time,value'", 1)
    times, values = [], []
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise CsvFormatError(f"expected 2 fields, got {len(row)}", row_no)
        try:
            t, v = float(row[0]), float(row[1])
        except ValueError:
            raise CsvFormatError(f"non-numeric field in {row!r}", row_no) from None
        if not (math.isfinite(t) and math.isfinite(v)):
            raise CsvFormatError("non-finite value", row_no)
        if times and t < times[-1]:
            raise CsvFormatError("times must be non-decreasing", row_no)
        times.append(t)
        values.append(v)
    return Path(np.array(times), np.array(values))
