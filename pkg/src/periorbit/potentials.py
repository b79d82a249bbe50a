"""Potential terms W(t, u), their derivatives and declared growth constants.

All callables are vectorized: w(t, u) maps t of shape (S,) and u of shape
(S, N) to values of shape (S,); grad_w returns (S, N) and hess_w (S, N, N).
The hypothesis constants are user declarations that the audit module checks
by sampling; the built-in families fill them in from their exponent algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class HypothesisConstants:
    """Declared constants of the growth hypotheses.

    Sub-quadratic family: mu, r1 (AQ1), c2, r2 (AQ2), d (AQ3), c1 (derived
    upper-growth constant W <= c1 (1 + |u|^mu)).
    Super-quadratic family: a1, nu (SQ1), varrho, b (SQ3), a2 (derived
    constant in W <= a1 (|u| + |u|^nu) + a2).
    """

    mu: Optional[float] = None
    r1: Optional[float] = None
    c2: Optional[float] = None
    r2: Optional[float] = None
    d: Optional[float] = None
    a1: Optional[float] = None
    nu: Optional[float] = None
    varrho: Optional[float] = None
    b: Optional[float] = None
    c1: Optional[float] = None
    a2: Optional[float] = None

    def require(self, *names: str):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ValueError(f"missing declared constants: {', '.join(missing)}")


@dataclass(frozen=True, eq=False)
class Potential:
    """W(t, u) with gradient, optional Hessian and declared constants."""

    name: str
    period: float
    w: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_w: Callable[[np.ndarray, np.ndarray], np.ndarray]
    hess_w: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    even: bool = True
    autonomous: bool = False
    constants: HypothesisConstants = field(default_factory=HypothesisConstants)

    def with_constants(self, **kwargs) -> "Potential":
        return replace(self, constants=replace(self.constants, **kwargs))

    def with_grad_scaled(self, factor: float) -> "Potential":
        """Deliberately inconsistent gradient, for audit tests."""
        grad = self.grad_w
        return replace(self, grad_w=lambda t, u: factor * grad(t, u), name=f"{self.name}*")


def _norms(u: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.atleast_2d(u), axis=-1)


def _power_terms(coefficient: float, exponent: float):
    c, p = float(coefficient), float(exponent)

    def w(t, u):
        return c * _norms(u) ** p

    def grad(t, u):
        u = np.atleast_2d(u)
        r = _norms(u)
        fac = np.zeros_like(r)
        nz = r > 0
        fac[nz] = c * p * r[nz] ** (p - 2.0)
        return fac[:, None] * u

    def hess(t, u):
        u = np.atleast_2d(u)
        r = np.maximum(_norms(u), 1e-12)  # radial Hessian is singular at 0 for p < 2
        n = u.shape[1]
        eye = np.eye(n)
        term1 = (c * p * r ** (p - 2.0))[:, None, None] * eye[None, :, :]
        outer = u[:, :, None] * u[:, None, :]
        term2 = (c * p * (p - 2.0) * r ** (p - 4.0))[:, None, None] * outer
        return term1 + term2

    return w, grad, hess


def _homogeneous_constants(c: float, p: float) -> HypothesisConstants:
    if 1.0 < p < 2.0:
        return HypothesisConstants(mu=p, r1=1.0, c2=c, r2=1.0, d=c, c1=c)
    if p > 2.0:
        # <grad W, u> - 2 W = c (p - 2) |u|^p; declare b with a 20% margin.
        return HypothesisConstants(a1=c * p, nu=p, varrho=p, b=0.8 * c * (p - 2.0), a2=0.0)
    return HypothesisConstants()


def power_potential(coefficient: float, exponent: float, period: float) -> Potential:
    """Homogeneous W = c |u|^p.

    Sub-quadratic for p in (1, 2), super-quadratic for p > 2; the declared
    constants follow from Euler homogeneity (<grad W, u> = p W).
    """
    if exponent <= 1.0:
        raise ValueError(f"exponent must exceed 1, got {exponent}")
    w, grad, hess = _power_terms(coefficient, exponent)
    return Potential(
        name=f"power(c={coefficient:g}, p={exponent:g})",
        period=float(period),
        w=w,
        grad_w=grad,
        hess_w=hess,
        even=True,
        autonomous=True,
        constants=_homogeneous_constants(float(coefficient), float(exponent)),
    )


def quartic_potential(period: float) -> Potential:
    """W = |u|^4 / 4, the super-quadratic reference case."""
    pot = power_potential(0.25, 4.0, period)
    return replace(pot, name="quartic")


def three_halves_potential(period: float) -> Potential:
    """W = |u|^(3/2), the sub-quadratic reference case."""
    pot = power_potential(1.0, 1.5, period)
    return replace(pot, name="three_halves")


def modulated_power_potential(coefficient: float, exponent: float, period: float) -> Potential:
    """Time-modulated W = a(t) c |u|^p with a(t) = 1 + cos(2 pi t / T) / 2."""
    if exponent <= 1.0:
        raise ValueError(f"exponent must exceed 1, got {exponent}")
    c, p, T = float(coefficient), float(exponent), float(period)
    base_w, base_grad, base_hess = _power_terms(c, p)

    def envelope(t):
        return 1.0 + 0.5 * np.cos(2.0 * np.pi * np.asarray(t, dtype=float) / T)

    def w(t, u):
        return envelope(t) * base_w(t, u)

    def grad(t, u):
        return envelope(t)[:, None] * base_grad(t, u)

    def hess(t, u):
        return envelope(t)[:, None, None] * base_hess(t, u)

    # a(t) ranges over [1/2, 3/2]; constants scale by the envelope extremes.
    if 1.0 < p < 2.0:
        constants = HypothesisConstants(mu=p, r1=1.0, c2=1.5 * c, r2=1.0, d=0.5 * c, c1=1.5 * c)
    elif p > 2.0:
        constants = HypothesisConstants(
            a1=1.5 * c * p, nu=p, varrho=p, b=0.4 * c * (p - 2.0), a2=0.0
        )
    else:
        constants = HypothesisConstants()
    return Potential(
        name=f"modulated_power(c={c:g}, p={p:g})",
        period=T,
        w=w,
        grad_w=grad,
        hess_w=hess,
        even=True,
        autonomous=False,
        constants=constants,
    )


def zero_potential(period: float) -> Potential:
    """W identically 0; the purely quadratic problem."""

    def w(t, u):
        return np.zeros(np.atleast_2d(u).shape[0])

    def grad(t, u):
        return np.zeros_like(np.atleast_2d(u))

    def hess(t, u):
        u = np.atleast_2d(u)
        return np.zeros((u.shape[0], u.shape[1], u.shape[1]))

    return Potential(
        name="zero",
        period=float(period),
        w=w,
        grad_w=grad,
        hess_w=hess,
        even=True,
        autonomous=True,
    )


def callable_potential(
    name: str,
    period: float,
    w,
    grad_w=None,
    hess_w=None,
    even: bool = True,
    autonomous: bool = False,
    constants: HypothesisConstants | None = None,
    fd_step: float = 1e-6,
) -> Potential:
    """Wrap user callables; a missing gradient falls back to central
    finite differences of W with step fd_step * (1 + |u|)."""
    if grad_w is None:

        def grad_w(t, u, _w=w):
            u = np.atleast_2d(u)
            t = np.asarray(t, dtype=float)
            h = fd_step * (1.0 + np.linalg.norm(u, axis=1))
            out = np.zeros_like(u)
            for comp in range(u.shape[1]):
                up = u.copy()
                dn = u.copy()
                up[:, comp] += h
                dn[:, comp] -= h
                out[:, comp] = (_w(t, up) - _w(t, dn)) / (2.0 * h)
            return out

    return Potential(
        name=name,
        period=float(period),
        w=w,
        grad_w=grad_w,
        hess_w=hess_w,
        even=even,
        autonomous=autonomous,
        constants=constants or HypothesisConstants(),
    )


BUILTIN_FACTORIES = {
    "quartic": lambda period, coefficient=None, exponent=None: quartic_potential(period),
    "three_halves": lambda period, coefficient=None, exponent=None: three_halves_potential(period),
    "power": lambda period, coefficient=1.0, exponent=2.5: power_potential(
        coefficient, exponent, period
    ),
    "modulated_power": lambda period, coefficient=1.0, exponent=2.5: modulated_power_potential(
        coefficient, exponent, period
    ),
    "zero": lambda period, coefficient=None, exponent=None: zero_potential(period),
}


def builtin_potential(name: str, period: float, coefficient=None, exponent=None) -> Potential:
    if name not in BUILTIN_FACTORIES:
        raise ValueError(f"unknown builtin potential {name!r}; known: {sorted(BUILTIN_FACTORIES)}")
    kwargs = {}
    if coefficient is not None:
        kwargs["coefficient"] = float(coefficient)
    if exponent is not None:
        kwargs["exponent"] = float(exponent)
    return BUILTIN_FACTORIES[name](period, **kwargs)
