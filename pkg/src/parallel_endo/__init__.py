"""Parallel endomorphism fields of pseudo-Riemannian metric germs, in exact arithmetic."""

__version__ = "0.1.0"
