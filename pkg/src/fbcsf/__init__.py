"""Numerical construction of the convex ancient free-boundary curve shortening flow in the disc."""

__version__ = "0.1.0"
