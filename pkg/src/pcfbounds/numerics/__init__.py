"""Extended-precision substrate: context, special functions, quadrature, exact polynomials."""

from .context import DEFAULT_CONTEXT, PrecisionContext, resolve
from .quadrature import QuadResult, QuadratureError, quad_interval, quad_semi_infinite
from .rationalpoly import RationalPoly, poly_real_roots, poly_variation, to_fraction
from .special import PoleError, chi, erfc_ref, gamma_fn, hyp2f1_half, loggamma_real

__all__ = [
    "DEFAULT_CONTEXT",
    "PrecisionContext",
    "PoleError",
    "QuadResult",
    "QuadratureError",
    "RationalPoly",
    "chi",
    "erfc_ref",
    "gamma_fn",
    "hyp2f1_half",
    "loggamma_real",
    "poly_real_roots",
    "poly_variation",
    "quad_interval",
    "quad_semi_infinite",
    "resolve",
    "to_fraction",
]
