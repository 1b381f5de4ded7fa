"""Pseudo-spectral cubic Dirac simulator and estimate-verification lab."""

__version__ = "0.1.0"
