"""Symmetries of a one-dimensional irrotational fluid and its lift to a 2+1 extended space."""

__version__ = "0.1.0"
