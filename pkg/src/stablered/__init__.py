"""Stable reduction of p-cyclic covers Z^p = f(X) in the equidistant case."""

__version__ = "0.1.0"
