"""Radial Keller-Segel laboratory on the unit disc."""

__version__ = "0.1.0"
