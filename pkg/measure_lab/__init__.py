"""Measure Lab

A numerical laboratory for the semilinear Dirichlet problem
-Δu = f(x, u) + μ with bounded-measure data: reduced measures, the
projection onto good measures, and the two limit schemes that reach them.
"""

__version__ = "1.0.0"
__author__ = "Measure Lab Team"
