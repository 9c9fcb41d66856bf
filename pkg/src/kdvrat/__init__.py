"""Exact symbolic toolkit for rational solutions of the KdV hierarchy.

Everything is computed over arbitrary-precision rational arithmetic, so each
identity the library claims is checked to equality, never to a tolerance.
"""

from .ring import Poly, Rat, RatFun, rat

__all__ = ["Poly", "Rat", "RatFun", "rat"]
__version__ = "0.1.0"
