"""Closed curves in R^3 evolving by curvature, binormal and nonlocal forces,
coupled to a scalar that is diffused and advected along the moving curve."""

__version__ = "0.1.0"
