"""Finite-stage constructions and checks for signed measure-valued
solutions of the continuity equation with unique characteristics."""

__version__ = "0.1.0"
