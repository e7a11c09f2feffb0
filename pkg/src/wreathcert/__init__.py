"""Wreath-product word problem, marked Cayley balls, and condensation certificates."""

__version__ = "0.1.0"
