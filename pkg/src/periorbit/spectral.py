"""Operator assembly, eigendecomposition and the problem-adapted inner product.

The operator is A = -d^2/dt^2 - U(t) acting on T-periodic paths, built as a
Fourier spectral differentiation block plus a block-diagonal potential term.
Its eigenpairs split the loop space into the negative, kernel and positive
subspaces; the adapted inner product weights each eigendirection by |lambda|
(kernel directions by 1), which is the discrete form of
(u, v) = (|A|^(1/2) u, |A|^(1/2) v)_2 + (u^0, v^0)_2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .grids import GridFunction, GridMismatchError, MatrixPath, TimeGrid

PARTS = ("minus", "zero", "plus")


def second_derivative_matrix(grid: TimeGrid) -> np.ndarray:
    """Dense M x M Fourier spectral matrix representing -d^2/dt^2.

    Exact on every trigonometric mode resolved by the grid; symmetric
    circulant because the multiplier k^2 is real and even.
    """
    m = grid.node_count
    k = 2.0 * np.pi * np.fft.fftfreq(m, d=grid.weight)
    mat = np.fft.ifft(np.fft.fft(np.eye(m), axis=0) * (k**2)[:, None], axis=0).real
    return 0.5 * (mat + mat.T)


def assemble_operator(grid: TimeGrid, upath: MatrixPath) -> np.ndarray:
    """Assemble A = -d^2/dt^2 - U(t) as a symmetric (M*N) x (M*N) matrix.

    The unknown ordering is node-major: the flat index of u(t_j)[d] is
    j*N + d.  Rejects asymmetric potential samples, naming the node.
    """
    if not upath.grid.compatible(grid):
        raise GridMismatchError("matrix path lives on a different grid")
    upath.check_symmetric()
    m, n = grid.node_count, grid.dim
    op = np.kron(second_derivative_matrix(grid), np.eye(n))
    for j in range(m):
        op[j * n : (j + 1) * n, j * n : (j + 1) * n] -= upath.samples[j]
    op = 0.5 * (op + op.T)
    return op


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs of the assembled operator, L^2-orthonormalized.

    `basis` has the flattened eigenvector values as columns, scaled so that
    (e_i, e_j)_2 = delta_ij under the discrete product (T/M) sum_j <.,.>.
    `weights` are the adapted-norm weights: |lambda_i| off the kernel and
    1 on eigenvalues within `zero_tol` of zero.
    """

    grid: TimeGrid
    eigenvalues: np.ndarray
    basis: np.ndarray
    zero_tol: float
    n_minus: int
    n_zero: int

    @property
    def n_bar(self) -> int:
        return self.n_minus + self.n_zero

    @property
    def n_plus(self) -> int:
        return self.grid.size - self.n_bar

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.abs(self.eigenvalues).copy()
        w[np.abs(self.eigenvalues) <= self.zero_tol] = 1.0
        w.flags.writeable = False
        return w

    @cached_property
    def classification(self) -> np.ndarray:
        """Per-index class: -1 (negative), 0 (kernel), +1 (positive)."""
        cls = np.zeros(self.grid.size, dtype=int)
        cls[self.eigenvalues < -self.zero_tol] = -1
        cls[self.eigenvalues > self.zero_tol] = 1
        cls.flags.writeable = False
        return cls

    def part_mask(self, part: str) -> np.ndarray:
        if part not in PARTS:
            raise ValueError(f"part must be one of {PARTS}, got {part!r}")
        target = {"minus": -1, "zero": 0, "plus": 1}[part]
        return self.classification == target

    def coefficients(self, u: GridFunction) -> np.ndarray:
        """L^2 eigencoordinates c_i = (u, e_i)_2."""
        self._check(u)
        return self.grid.weight * (self.basis.T @ u.flat())

    def function(self, coeffs: np.ndarray) -> GridFunction:
        flat = self.basis @ np.asarray(coeffs, dtype=float)
        return GridFunction(flat.reshape(self.grid.node_count, self.grid.dim), self.grid)

    def eigenfunction(self, i: int) -> GridFunction:
        return GridFunction(
            self.basis[:, i].reshape(self.grid.node_count, self.grid.dim), self.grid
        )

    def project(self, u: GridFunction, part: str) -> GridFunction:
        """Orthogonal projection of u onto the minus/zero/plus subspace."""
        c = self.coefficients(u)
        mask = self.part_mask(part)
        return self.function(np.where(mask, c, 0.0))

    def e_inner(self, u: GridFunction, v: GridFunction) -> float:
        cu, cv = self.coefficients(u), self.coefficients(v)
        return float(np.sum(self.weights * cu * cv))

    def e_norm(self, u: GridFunction) -> float:
        c = self.coefficients(u)
        return float(np.sqrt(np.sum(self.weights * c * c)))

    def e_norm_coeffs(self, coeffs: np.ndarray, indices=None) -> float:
        w = self.weights if indices is None else self.weights[indices]
        return float(np.sqrt(np.sum(w * np.square(coeffs))))

    def _check(self, u: GridFunction):
        if not u.grid.compatible(self.grid):
            raise GridMismatchError("function lives on a different grid than the decomposition")


def default_zero_tol(eigenvalues: np.ndarray) -> float:
    return 1e-8 * max(1.0, float(np.abs(eigenvalues).max()))


def eigendecompose(
    op: np.ndarray, grid: TimeGrid, zero_tol: float | None = None
) -> SpectralDecomposition:
    """Full symmetric eigendecomposition with L^2-orthonormal eigenvectors."""
    op = np.asarray(op, dtype=float)
    if op.shape != (grid.size, grid.size):
        raise ValueError(f"operator shape {op.shape} does not match grid size {grid.size}")
    asym = np.abs(op - op.T).max()
    if asym > 1e-10 * max(1.0, np.abs(op).max()):
        raise ValueError(f"operator is not symmetric (max asymmetry {asym:.3e})")
    try:
        evals, vecs = np.linalg.eigh(op)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        off = np.abs(op - np.diag(np.diag(op))).max()
        raise RuntimeError(
            f"eigendecomposition did not converge (off-diagonal magnitude {off:.3e})"
        ) from exc
    if zero_tol is None:
        zero_tol = default_zero_tol(evals)
    basis = vecs * np.sqrt(grid.node_count / grid.period)
    n_minus = int(np.sum(evals < -zero_tol))
    n_zero = int(np.sum(np.abs(evals) <= zero_tol))
    evals = evals.copy()
    evals.flags.writeable = False
    basis.flags.writeable = False
    return SpectralDecomposition(
        grid=grid,
        eigenvalues=evals,
        basis=basis,
        zero_tol=float(zero_tol),
        n_minus=n_minus,
        n_zero=n_zero,
    )


def decompose_problem(
    grid: TimeGrid, upath: MatrixPath, zero_tol: float | None = None
) -> SpectralDecomposition:
    """Convenience: assemble the operator for U(t) and diagonalize it."""
    return eigendecompose(assemble_operator(grid, upath), grid, zero_tol)


def h1_norm(u: GridFunction) -> float:
    """Discrete H^1 norm (|du/dt|_2^2 + |u|_2^2)^(1/2), spectral derivative."""
    from .grids import derivative, lp_norm

    du = derivative(u)
    return float(np.sqrt(lp_norm(du, 2) ** 2 + lp_norm(u, 2) ** 2))


def spectrum_rows(dec: SpectralDecomposition):
    """Rows (index, eigenvalue, classification) for CSV export; 1-based index."""
    names = {-1: "minus", 0: "zero", 1: "plus"}
    return [
        (i + 1, float(dec.eigenvalues[i]), names[int(dec.classification[i])])
        for i in range(dec.grid.size)
    ]
