"""Quantum structures: how correlations and open-system dynamics depend on the chosen factorization."""

__version__ = "0.1.0"
