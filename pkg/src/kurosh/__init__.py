"""Subgroup graphs of free products, intersections, and complexity bounds."""

__version__ = "0.1.0"
