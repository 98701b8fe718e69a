"""Numerical toolkit for phase-comparator constructions of spectral-gap phase diagrams."""

__version__ = "0.1.0"
