"""Exact continued-fraction and circle-measure tools for shrinking targets of circle rotations."""

__version__ = "0.1.0"
