"""Numerical checks of bulk universality for Wigner matrices."""

__version__ = "0.1.0"
