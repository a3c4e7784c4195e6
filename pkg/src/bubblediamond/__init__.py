"""Polynomials, Laplacians and orthogonal polynomials on bubble-diamond fractals."""
__version__ = "0.1.0"
