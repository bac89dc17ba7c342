"""Spectral laboratory for mild solutions of incompressible MHD in differential-form language."""

__version__ = "0.1.0"
