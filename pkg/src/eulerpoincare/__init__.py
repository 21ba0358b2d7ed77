"""Euler-Poincare mechanics on Lie algebra actions: systems, integrators and checks."""

__version__ = "0.1.0"
