"""Numerical toolkit for discrete weighted p-Hardy inequalities on the half-line."""

__version__ = "0.1.0"
