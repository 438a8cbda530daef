"""Admissibility, controllability and simulation toolkit for diagonal
Volterra control systems with memory kernels."""

__version__ = "0.1.0"
