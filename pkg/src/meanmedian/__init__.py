"""Exact computations for the mean-median map on rational sets and piecewise-affine bundles."""

from .numeric import Q, Rational, Mobius, AffineMap, nu2, fmt
from .orbit import iterate_until_stable, mmm_step, median, mean

__version__ = "0.1.0"
