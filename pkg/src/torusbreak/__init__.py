"""Torus-destroying perturbations of integrable twist maps.

Numerical constructions of the perturbation families, the smoothing-operator
approximation machinery with certified error bounds, spectral Poisson solves,
symplectic twist-map iteration, and the non-existence criterion for invariant
Lagrangian graphs.
"""

from .grid import (
    AliasingError,
    GridError,
    GridFunction,
    NormReport,
    TrigPoly,
    c0_norm,
    cr_norm,
    from_spectrum,
    holder_norm,
    laplacian,
    load_binary,
    norm_report,
    save_binary,
    save_csv,
    spectral_derivative,
    to_spectrum,
)

__all__ = [
    "AliasingError",
    "GridError",
    "GridFunction",
    "NormReport",
    "TrigPoly",
    "c0_norm",
    "cr_norm",
    "from_spectrum",
    "holder_norm",
    "laplacian",
    "load_binary",
    "norm_report",
    "save_binary",
    "save_csv",
    "spectral_derivative",
    "to_spectrum",
]
