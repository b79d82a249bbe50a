"""The action functional, its perturbed family and adapted-norm gradients.

On the discrete loop space the functional splits as

    Phi_lambda(u) = 1/2 ||u^+||^2 - lambda (1/2 ||u^-||^2 + Psi(u)),
    Psi(u) = (T/M) sum_j W(t_j, u(t_j)),

with the norms taken in the spectrally adapted inner product.  Gradients are
returned as adapted-norm Riesz representatives, so the solver's stopping rule
||grad|| coincides with the dual norm of the derivative.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grids import GridFunction, GridMismatchError, MatrixPath, TimeGrid
from .potentials import Potential
from .spectral import SpectralDecomposition

LAMBDA_RANGE = (1.0, 2.0)


def check_lambda(lam: float):
    """Enforce lambda in (0, 2]; warn when outside the homotopy range [1, 2]."""
    if not (0.0 < lam <= 2.0):
        raise ValueError(f"lambda must lie in (0, 2], got {lam}")
    if lam < LAMBDA_RANGE[0] - 1e-12:
        warnings.warn(f"lambda={lam} lies outside [1, 2]; continuation overshoot", stacklevel=3)


@dataclass(frozen=True, eq=False)
class FunctionalContext:
    """Everything needed to evaluate the functional: grid, potential term
    U(t), its spectral decomposition and the nonlinearity W."""

    grid: TimeGrid
    upath: MatrixPath
    dec: SpectralDecomposition
    potential: Potential

    def __post_init__(self):
        if not self.upath.grid.compatible(self.grid) or not self.dec.grid.compatible(self.grid):
            raise GridMismatchError("context components live on different grids")
        if abs(self.potential.period - self.grid.period) > 1e-12 * self.grid.period:
            raise ValueError("potential period does not match the grid period")

    @cached_property
    def _plus(self) -> np.ndarray:
        return self.dec.part_mask("plus")

    @cached_property
    def _minus(self) -> np.ndarray:
        return self.dec.part_mask("minus")

    def _check(self, u: GridFunction):
        if not u.grid.compatible(self.grid):
            raise GridMismatchError("function lives on a different grid than the context")

    def _w_values(self, u: GridFunction) -> np.ndarray:
        vals = self.potential.w(self.grid.nodes, u.values)
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmax(~np.isfinite(vals)))
            raise ValueError(f"potential value is not finite at node {bad}")
        return vals

    def _grad_values(self, u: GridFunction) -> np.ndarray:
        g = self.potential.grad_w(self.grid.nodes, u.values)
        if not np.all(np.isfinite(g)):
            bad = int(np.argwhere(~np.isfinite(g))[0, 0])
            raise ValueError(f"potential gradient is not finite at node {bad}")
        return g

    # -- scalar functionals ------------------------------------------------

    def psi(self, u: GridFunction) -> float:
        """Psi(u) = integral of W(t, u(t)) by the periodic rectangle rule."""
        self._check(u)
        return float(self.grid.weight * np.sum(self._w_values(u)))

    def a_part(self, u: GridFunction) -> float:
        """A(u) = 1/2 ||u^+||^2."""
        c = self.dec.coefficients(u)
        return 0.5 * float(np.sum(self.dec.weights[self._plus] * c[self._plus] ** 2))

    def b_part(self, u: GridFunction) -> float:
        """B(u) = 1/2 ||u^-||^2 + Psi(u); nonnegative whenever W >= 0."""
        c = self.dec.coefficients(u)
        half_minus = 0.5 * float(np.sum(self.dec.weights[self._minus] * c[self._minus] ** 2))
        return half_minus + self.psi(u)

    def phi_lambda(self, u: GridFunction, lam: float) -> float:
        check_lambda(lam)
        return self.a_part(u) - lam * self.b_part(u)

    def phi(self, u: GridFunction) -> float:
        return self.phi_lambda(u, 1.0)

    # -- derivatives -------------------------------------------------------

    def phi_prime_apply(self, u: GridFunction, v: GridFunction, lam: float = 1.0) -> float:
        """Directional derivative Phi_lambda'(u) v in weak form."""
        check_lambda(lam)
        self._check(u)
        self._check(v)
        cu, cv = self.dec.coefficients(u), self.dec.coefficients(v)
        w = self.dec.weights
        plus = float(np.sum(w[self._plus] * cu[self._plus] * cv[self._plus]))
        minus = float(np.sum(w[self._minus] * cu[self._minus] * cv[self._minus]))
        coupling = float(self.grid.weight * np.vdot(self._grad_values(u), v.values))
        return plus - lam * minus - lam * coupling

    def gradient_coefficients(self, u: GridFunction, lam: float) -> np.ndarray:
        """Eigencoordinates of the adapted-norm Riesz gradient of Phi_lambda."""
        check_lambda(lam)
        self._check(u)
        c = self.dec.coefficients(u)
        g = self._grad_values(u)
        gc = self.grid.weight * (self.dec.basis.T @ g.ravel())
        gamma = np.where(self._plus, c, 0.0) - lam * np.where(self._minus, c, 0.0)
        gamma = gamma - lam * gc / self.dec.weights
        return gamma

    def grad_phi_lambda(self, u: GridFunction, lam: float) -> GridFunction:
        return self.dec.function(self.gradient_coefficients(u, lam))

    def grad_dual_norm(self, u: GridFunction, lam: float) -> float:
        """||Phi_lambda'(u)|| in the dual norm, i.e. the adapted norm of the
        Riesz gradient."""
        gamma = self.gradient_coefficients(u, lam)
        return float(np.sqrt(np.sum(self.dec.weights * gamma * gamma)))

    # -- restricted (Galerkin) evaluation ----------------------------------

    def kappa(self, lam: float, k: int | None = None) -> np.ndarray:
        """Diagonal quadratic part of the weak gradient: w_i on the plus
        block, -lambda w_i on the minus block, 0 on the kernel."""
        upto = self.grid.size if k is None else k
        w = self.dec.weights[:upto]
        return w * (
            self._plus[:upto].astype(float) - lam * self._minus[:upto].astype(float)
        )

    def restricted_values(self, coeffs: np.ndarray, k: int) -> GridFunction:
        flat = self.dec.basis[:, :k] @ np.asarray(coeffs, dtype=float)
        return GridFunction(flat.reshape(self.grid.node_count, self.grid.dim), self.grid)

    def weak_gradient(self, coeffs: np.ndarray, k: int, lam: float) -> np.ndarray:
        """Components Phi_lambda'(u) e_i for i < k, with u = sum coeffs_i e_i."""
        check_lambda(lam)
        u = self.restricted_values(coeffs, k)
        g = self._grad_values(u)
        gc = self.grid.weight * (self.dec.basis[:, :k].T @ g.ravel())
        return self.kappa(lam, k) * coeffs - lam * gc

    def weak_hessian(self, coeffs: np.ndarray, k: int, lam: float) -> np.ndarray:
        """Restricted second derivative matrix d^2 Phi_lambda / d coeffs^2.

        Uses the declared Hessian of W when available; otherwise central
        finite differences of the weak gradient with a step scaled by the
        adapted norm of u.
        """
        check_lambda(lam)
        coeffs = np.asarray(coeffs, dtype=float)
        base = np.diag(self.kappa(lam, k))
        if self.potential.hess_w is not None:
            u = self.restricted_values(coeffs, k)
            h = self.potential.hess_w(self.grid.nodes, u.values)
            ek = self.dec.basis[:, :k].reshape(self.grid.node_count, self.grid.dim, k)
            he = np.einsum("jab,jbl->jal", h, ek)
            quad = self.grid.weight * np.einsum("jai,jal->il", ek, he)
            return base - lam * quad
        norm_u = self.dec.e_norm_coeffs(coeffs, np.arange(k))
        h = 1e-6 * (1.0 + norm_u)
        jac = np.empty((k, k))
        for col in range(k):
            step = np.zeros(k)
            step[col] = h
            jac[:, col] = (
                self.weak_gradient(coeffs + step, k, lam)
                - self.weak_gradient(coeffs - step, k, lam)
            ) / (2.0 * h)
        return 0.5 * (jac + jac.T)

    def phi_lambda_coeffs(self, coeffs: np.ndarray, k: int, lam: float) -> float:
        return self.phi_lambda(self.restricted_values(coeffs, k), lam)

    def restricted_dual_norm(self, coeffs: np.ndarray, k: int, lam: float) -> float:
        """Dual norm of Phi_lambda' restricted to the span of the first k
        eigenfunctions."""
        g = self.weak_gradient(coeffs, k, lam)
        return float(np.sqrt(np.sum(g * g / self.dec.weights[:k])))


def build_context(
    grid: TimeGrid,
    upath: MatrixPath,
    potential: Potential,
    zero_tol: float | None = None,
) -> FunctionalContext:
    from .spectral import decompose_problem

    dec = decompose_problem(grid, upath, zero_tol)
    return FunctionalContext(grid=grid, upath=upath, dec=dec, potential=potential)
