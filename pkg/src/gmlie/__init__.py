"""Exact verification of Gauss-Manin Lie algebras and their quasi-modular form rings."""

__version__ = "0.1.0"
