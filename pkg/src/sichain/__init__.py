"""Spatially invariant chains of ODEs: characteristic functions, monotonicity
certificates, spectra and decay-rate measurement."""

__version__ = "0.1.0"
