"""Galerkin approximation of monotone SPDEs driven by Levy noise."""

__version__ = "0.1.0"
