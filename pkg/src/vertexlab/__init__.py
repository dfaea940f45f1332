"""Exact formal calculus for lattice vertex operator algebras.

Every coefficient is an exact rational or cyclotomic number, so each identity
the package checks is decided by equality rather than by a tolerance.
"""

__version__ = "0.1.0"
