"""Exact finite-depth constructions for fake null, small and E-style ideals."""

__version__ = "0.1.0"
