"""
Numerical engines: special functions, quadrature, forward transforms,
operational calculus, inversion and transform-domain solvers.
"""
