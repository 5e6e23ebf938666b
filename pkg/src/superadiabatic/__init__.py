"""Superadiabatic representations of two-level time-dependent quantum
systems: jet arithmetic, coupling-function models, the coefficient
recursion with optimal truncation, factorial-weighted norms, growth
majorants, coefficient asymptotics, natural-time reparametrization, and a
high-accuracy propagator."""

__version__ = "0.1.0"

from .jets import DOUBLE, EXTENDED, Jet

__all__ = ["DOUBLE", "EXTENDED", "Jet", "__version__"]
