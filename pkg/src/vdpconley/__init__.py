"""Bifurcations of the extended modified van der Pol oscillator and their Z2 Conley-index certification."""

__version__ = "0.1.0"
