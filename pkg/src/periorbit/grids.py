"""Uniform periodic time grids and discrete loop-space functions.

All states live on the circle of circumference T, sampled at M uniform
nodes t_j = j*T/M.  Integrals are the periodic rectangle rule, which is
the trapezoid rule on a periodic uniform grid and spectrally accurate
for smooth integrands.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid with `node_count` nodes on a period-`period` circle.

    `dim` is the dimension N of the vector-valued path u(t) in R^N.
    """

    period: float
    node_count: int
    dim: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.period) and self.period > 0):
            raise ValueError(f"period must be positive and finite, got {self.period}")
        if self.node_count <= 0 or self.node_count % 2 != 0:
            raise ValueError(f"node_count must be an even positive integer, got {self.node_count}")
        if self.dim <= 0:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")

    @cached_property
    def nodes(self) -> np.ndarray:
        t = self.period * np.arange(self.node_count) / self.node_count
        t.flags.writeable = False
        return t

    @property
    def weight(self) -> float:
        """Quadrature weight T/M of the periodic rectangle rule."""
        return self.period / self.node_count

    @property
    def size(self) -> int:
        """Total number of scalar unknowns M*N."""
        return self.node_count * self.dim

    def compatible(self, other: "TimeGrid") -> bool:
        return (
            self.node_count == other.node_count
            and self.dim == other.dim
            and abs(self.period - other.period) <= 1e-12 * max(1.0, self.period)
        )


class GridMismatchError(ValueError):
    """Raised when two objects living on different grids are combined."""


def _require_same_grid(a, b):
    if not a.grid.compatible(b.grid):
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A discrete T-periodic path: values[j] = u(t_j) in R^N."""

    values: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape != (self.grid.node_count, self.grid.dim):
            raise ValueError(
                f"values shape {vals.shape} does not match grid "
                f"({self.grid.node_count}, {self.grid.dim})"
            )
        if not np.all(np.isfinite(vals)):
            bad = int(np.argwhere(~np.isfinite(vals))[0, 0])
            raise ValueError(f"non-finite value at node {bad}")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, grid: TimeGrid) -> "GridFunction":
        return cls(np.zeros((grid.node_count, grid.dim)), grid)

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def node_norms(self) -> np.ndarray:
        """Euclidean norm |u(t_j)| per node."""
        return np.linalg.norm(self.values, axis=1)

    def amplitude(self) -> float:
        return float(self.node_norms().max())

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self, other)
        return GridFunction(self.values + other.values, self.grid)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self, other)
        return GridFunction(self.values - other.values, self.grid)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.values * float(scalar), self.grid)

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(-self.values, self.grid)


def lp_norm(u: GridFunction, p: float) -> float:
    """Discrete L^p norm of |u(t)| with the periodic rectangle rule.

    p = inf returns max_j |u(t_j)|.
    """
    if p < 1:
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    r = u.node_norms()
    if np.isinf(p):
        return float(r.max())
    return float((u.grid.weight * np.sum(r**p)) ** (1.0 / p))


def l2_inner(u: GridFunction, v: GridFunction) -> float:
    """Discrete L^2 inner product (u, v)_2 = (T/M) sum_j <u_j, v_j>."""
    _require_same_grid(u, v)
    return float(u.grid.weight * np.vdot(u.values, v.values))


def derivative(u: GridFunction, order: int = 1) -> GridFunction:
    """Spectral derivative d^order/dt^order via the FFT multiplier."""
    grid = u.grid
    k = 2.0 * np.pi * np.fft.rfftfreq(grid.node_count, d=grid.weight)
    mult = (1j * k) ** order
    if order % 2 == 0:
        mult = mult.real.astype(complex)
    spec = np.fft.rfft(u.values, axis=0) * mult[:, None]
    return GridFunction(np.fft.irfft(spec, n=grid.node_count, axis=0), grid)


def resample(u: GridFunction, new_grid: TimeGrid) -> GridFunction:
    """Trigonometric interpolation of u onto a finer grid (exact for
    band-limited u).  Requires the same period and dim and M' >= M."""
    old = u.grid
    if new_grid.dim != old.dim or abs(new_grid.period - old.period) > 1e-12 * old.period:
        raise GridMismatchError("resample requires identical period and dim")
    if new_grid.node_count < old.node_count:
        raise ValueError("resample only refines: new node_count must be >= old")
    if new_grid.node_count == old.node_count:
        return GridFunction(u.values, new_grid)
    m_old, m_new = old.node_count, new_grid.node_count
    spec = np.fft.rfft(u.values, axis=0)
    # The merged +/- Nyquist bin of the short transform becomes a regular
    # interior bin of the long transform; it must be split in half.
    spec[m_old // 2, :] *= 0.5
    padded = np.zeros((m_new // 2 + 1, old.dim), dtype=complex)
    padded[: m_old // 2 + 1, :] = spec
    vals = np.fft.irfft(padded, n=m_new, axis=0) * (m_new / m_old)
    return GridFunction(vals, new_grid)


@dataclass(frozen=True, eq=False)
class MatrixPath:
    """T-periodic symmetric matrix samples U(t_j), shape (M, N, N)."""

    samples: np.ndarray
    grid: TimeGrid

    SYMMETRY_TOL = 1e-12

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        m, n = self.grid.node_count, self.grid.dim
        if s.shape != (m, n, n):
            raise ValueError(f"samples shape {s.shape} does not match grid ({m}, {n}, {n})")
        if not np.all(np.isfinite(s)):
            raise ValueError("non-finite matrix sample")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    def check_symmetric(self):
        """Raise with the offending node index if any sample is asymmetric."""
        asym = np.abs(self.samples - np.swapaxes(self.samples, 1, 2)).max(axis=(1, 2))
        scale = np.maximum(1.0, np.abs(self.samples).max(axis=(1, 2)))
        bad = np.nonzero(asym > self.SYMMETRY_TOL * scale)[0]
        if bad.size:
            raise ValueError(f"matrix sample at node {int(bad[0])} is not symmetric")

    @classmethod
    def zero(cls, grid: TimeGrid) -> "MatrixPath":
        return cls(np.zeros((grid.node_count, grid.dim, grid.dim)), grid)

    @classmethod
    def constant(cls, grid: TimeGrid, value) -> "MatrixPath":
        """Constant path; scalar `value` means value * identity."""
        value = np.asarray(value, dtype=float)
        if value.ndim == 0:
            mat = float(value) * np.eye(grid.dim)
        else:
            mat = value
        return cls(np.broadcast_to(mat, (grid.node_count, grid.dim, grid.dim)).copy(), grid)

    @classmethod
    def diagonal(cls, grid: TimeGrid, diagonals: np.ndarray) -> "MatrixPath":
        """Diagonal path from per-node diagonal entries, shape (M, N)."""
        diags = np.asarray(diagonals, dtype=float)
        if diags.ndim == 1:
            diags = diags[:, None]
        samples = np.zeros((grid.node_count, grid.dim, grid.dim))
        idx = np.arange(grid.dim)
        samples[:, idx, idx] = diags
        return cls(samples, grid)

    def resample(self, new_grid: TimeGrid) -> "MatrixPath":
        """Trigonometric interpolation of each matrix entry onto a finer grid."""
        if new_grid.node_count == self.grid.node_count:
            return MatrixPath(self.samples, new_grid)
        m_new = new_grid.node_count
        n = self.grid.dim
        flat = self.samples.reshape(self.grid.node_count, n * n)
        entry_grid = TimeGrid(self.grid.period, self.grid.node_count, n * n)
        lifted = resample(GridFunction(flat, entry_grid), TimeGrid(self.grid.period, m_new, n * n))
        return MatrixPath(lifted.values.reshape(m_new, n, n), new_grid)
