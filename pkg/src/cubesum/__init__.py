"""Descent, point search and height certification for x^3 + y^3 = k."""

__version__ = "0.1.0"
