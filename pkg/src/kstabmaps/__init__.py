"""Exact toric and intersection-theoretic stability computations for maps."""

__version__ = "0.1.0"
