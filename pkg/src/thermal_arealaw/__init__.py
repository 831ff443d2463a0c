"""Finite-window verification of thermal area laws for quantum spin and fermion chains."""

__version__ = "0.1.0"
