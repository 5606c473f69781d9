"""Numerics for S-periodic boundary problems of first-order linear ODEs.

Cross-verified Hill-type determinants, Krein-type trace formulas and
second-order specializations, with independent oracles for each quantity.
"""

from .boundary import BoundaryData, DdtMode, ddt_spectrum, make_boundary
from .paths import CoeffPath
from .propagator import (Flow, IteratedIntegrals, fundamental_solution,
                         green_kernel, iterated_integrals, monodromy)

__all__ = [
    "BoundaryData",
    "CoeffPath",
    "DdtMode",
    "Flow",
    "IteratedIntegrals",
    "ddt_spectrum",
    "fundamental_solution",
    "green_kernel",
    "iterated_integrals",
    "make_boundary",
    "monodromy",
]

__version__ = "0.1.0"
