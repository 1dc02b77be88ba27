"""Finite-basis laboratory for the multiconfiguration Dirac-Fock model."""

__version__ = "0.1.0"
