"""Spectral enclosures and root-system diagnostics for perturbed
harmonic-oscillator-type operators.

The package computes matrix elements of singular perturbations in the
oscillator eigenbasis, certifies spectral enclosure regions, solves the
Galerkin-truncated eigenproblem with an in-house dense complex
eigensolver, and measures the Riesz-basis machinery (projection norms,
similarity criterion, subordination) numerically.
"""

__version__ = "0.1.0"

from . import bounds, forms, hermite, linalg, spectral  # noqa: F401
