"""Polynomially enriched biorthogonal B-spline wavelets (quarklets) on the line."""

from .multiscale import (
    FilterPair,
    QuarkletIndex,
    DyadicCube,
    UnsupportedParametersError,
    cdf_filters,
    eval_quarklet,
    eval_quarklet_scaled,
    support_of,
)
from .splines import Quark, eval_bspline, eval_quark, eval_symmetrized
from .transform import CoefficientSet, PiecewiseFunction, analyze, synthesize

__version__ = "0.1.0"
