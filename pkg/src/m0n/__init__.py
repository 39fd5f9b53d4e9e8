"""Exact divisor and curve calculus on the moduli space of stable pointed rational curves."""

__version__ = "0.1.0"
