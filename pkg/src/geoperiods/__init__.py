"""Numerical laboratory for geodesic and vertical periods of automorphic
forms on the modular surface."""

__version__ = "0.1.0"
