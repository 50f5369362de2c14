"""Numerical toolkit for pullback attractors of asymptotically autonomous systems."""

__version__ = "0.1.0"
