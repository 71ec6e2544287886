"""Numerical toolkit for the thin-waveguide singular limit on the line."""
__version__ = "0.1.0"
