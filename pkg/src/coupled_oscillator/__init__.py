"""Numerical laboratory for the harmonic oscillator with position-momentum coupling.

H = p^2/2m + m omega^2 x^2/2 + (mu/2)(xp + px), |mu| < omega. Closed forms,
a truncated Fock-space route, a finite-difference grid route and a
cross-validation harness.
"""
from .analytic import CoherentParams, MomentSet, PhasePoint
from .errors import (
    ConvergenceFailure,
    CouplingTooStrong,
    NonPositive,
    NumericalFailure,
    OscillatorError,
)
from .params import DerivedQuantities, OscillatorParams, derive, validate

__version__ = "0.1.0"

__all__ = [
    "CoherentParams",
    "ConvergenceFailure",
    "CouplingTooStrong",
    "DerivedQuantities",
    "MomentSet",
    "NonPositive",
    "NumericalFailure",
    "OscillatorError",
    "OscillatorParams",
    "PhasePoint",
    "derive",
    "validate",
]
