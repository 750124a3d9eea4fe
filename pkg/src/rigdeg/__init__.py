"""Degree distributions of inhomogeneous and passive random intersection graphs."""

__version__ = "0.1.0"
