"""Numerical laboratory for Berezin-Toeplitz quantization on Riemann surfaces."""

__version__ = "0.1.0"
