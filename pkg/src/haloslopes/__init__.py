"""Exact p-adic slope laboratory.

Computes the compact block operator attached to weighted monoid actions on
the binomial-coefficient basis of continuous functions on Z_p, its
characteristic power series over a truncated weight ring Z_p[[T]], and the
slope polygons of that series near the boundary of weight space, with every
valuation bound certified in exact arithmetic.
"""

__all__ = ["__version__"]

__version__ = "0.1.0"
