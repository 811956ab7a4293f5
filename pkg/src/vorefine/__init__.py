"""Exact refinability tests for spline spaces built from Voronoi cell indicators."""

__version__ = "0.1.0"
