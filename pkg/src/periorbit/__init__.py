"""Spectral-Galerkin variational computation of many periodic orbits of
second order Hamiltonian systems u'' + U(t) u + grad W(t, u) = 0."""

from .grids import GridFunction, GridMismatchError, MatrixPath, TimeGrid, lp_norm
from .potentials import (
    HypothesisConstants,
    Potential,
    builtin_potential,
    modulated_power_potential,
    power_potential,
    quartic_potential,
    three_halves_potential,
    zero_potential,
)
from .spectral import (
    SpectralDecomposition,
    assemble_operator,
    decompose_problem,
    eigendecompose,
)
from .functional import FunctionalContext, build_context

__version__ = "0.1.0"

__all__ = [
    "GridFunction",
    "GridMismatchError",
    "MatrixPath",
    "TimeGrid",
    "lp_norm",
    "HypothesisConstants",
    "Potential",
    "builtin_potential",
    "modulated_power_potential",
    "power_potential",
    "quartic_potential",
    "three_halves_potential",
    "zero_potential",
    "SpectralDecomposition",
    "assemble_operator",
    "decompose_problem",
    "eigendecompose",
    "FunctionalContext",
    "build_context",
    "__version__",
]
