"""Excursion theory for reflected diffusions: densities, straddle laws, sampling."""

__version__ = "0.1.0"
