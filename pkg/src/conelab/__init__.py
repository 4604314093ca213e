"""Integral points on ternary quadratic cones with congruence conditions.

Modules: quadform (forms and duals), arith (number theory), localdens
(p-adic densities, singular series), expsums (complete exponential sums),
archimedean (weights, singular integral), enumerate (exact point counts),
harness (fits and checks), cli (command line).
"""

__version__ = "0.1.0"

from .quadform import PYTHAGOREAN, SQUARE_CONE, TernaryQuadraticForm, new_form  # noqa: E402

__all__ = ["PYTHAGOREAN", "SQUARE_CONE", "TernaryQuadraticForm", "new_form", "__version__"]
