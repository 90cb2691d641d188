"""Numerical laboratory for the superintegrable deformed-oscillator family on E(1,1)."""

__version__ = "0.1.0"
