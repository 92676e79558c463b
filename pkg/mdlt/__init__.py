"""
mdlt - Multidimensional Laplace Toolkit
=======================================

Numerical toolkit for the n-dimensional vector-valued Laplace transform:
forward transforms with convergence-region analysis, operational calculus,
Post-Widder and Bromwich inversion, and transform-domain solvers for
fractional, Volterra and second-order problems with matrix coefficients.
"""

__version__ = "1.0.0"
__author__ = "mdlt Team"
