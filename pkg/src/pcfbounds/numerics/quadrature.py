"""Double-exponential quadrature on (0, inf) with an explicit error estimate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from mpmath import ceil, inf, mp, mpf

from .context import PrecisionContext, resolve


class QuadratureError(ArithmeticError):
    """Raised when the subdivision budget is exhausted before ``quad_tol`` is met.

    ``value`` and ``error`` hold the last attempt, which callers may use to
    size a precision increase.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


@dataclass(frozen=True)
class QuadResult:
    value: object
    error: mpf

    def __iter__(self):
        yield self.value
        yield self.error


def _refine(points: list) -> list:
    """Bisect every finite subinterval; the unbounded tail is left alone."""
    out = [points[0]]
    for lo, hi in zip(points, points[1:]):
        if hi != inf:
            out.append((lo + hi) / 2)
        out.append(hi)
    return out


def quad_semi_infinite(
    integrand: Callable,
    ctx: PrecisionContext | None = None,
    points: Sequence | None = None,
    max_splits: int = 4,
    abs_floor=None,
    endpoint_exponent=0,
) -> QuadResult:
    """Integrate ``integrand`` over (0, inf).

    The tanh-sinh rule maps each finite panel onto the real line; the last
    panel is mapped from [p, inf).  ``points`` are interior breakpoints
    (peaks, widths).  An integrand behaving like ``w**beta`` at the origin,
    with ``beta = endpoint_exponent > -1``, is integrated on the first panel
    in the variable ``u = w**(1/m)`` with ``m(beta + 1) >= 1``: tanh-sinh nodes
    next to 0 carry only absolute accuracy, which a bounded integrand
    tolerates.  When the estimated error exceeds ``quad_tol`` relative to the
    value, every finite panel is bisected, at most ``max_splits`` times.
    """
    ctx = resolve(ctx)
    with ctx.workdps(10):
        beta = mpf(endpoint_exponent)
        if beta <= -1:
            raise ValueError(f"endpoint exponent {endpoint_exponent} is not integrable")
        m = int(ceil(1 / (beta + 1))) if beta < 0 else 1

        def head(u):
            return m * u ** (m - 1) * integrand(u**m)

        pts = sorted(mpf(p) for p in (points or ()) if p > 0)
        if not pts:
            pts = [mpf(1)]
        pts = pts + [inf]
        tol = ctx.quad_tol
        floor = mpf(0) if abs_floor is None else mpf(abs_floor)
        err = None
        for _ in range(max_splits + 1):
            first = [mpf(0), pts[0]] if m == 1 else [mpf(0), pts[0] ** (mpf(1) / m)]
            v0, e0 = mp.quad(head, first, error=True, maxdegree=10)
            v1, e1 = mp.quad(integrand, pts, error=True, maxdegree=10)
            value, err = v0 + v1, e0 + e1
            if err <= tol * abs(value) or err <= floor:
                return QuadResult(+value, mpf(err))
            pts = _refine([mpf(0)] + pts)[1:]
    raise QuadratureError(
        f"quadrature did not reach relative tolerance {mp.nstr(tol, 3)} "
        f"(last error estimate {mp.nstr(err, 3)}) after {max_splits} subdivisions",
        value,
        err,
    )


def quad_interval(integrand: Callable, points: Sequence, ctx: PrecisionContext | None = None) -> QuadResult:
    """Finite-interval companion of :func:`quad_semi_infinite` (same budget rules)."""
    ctx = resolve(ctx)
    with ctx.workdps(10):
        pts = [mpf(p) for p in points]
        err = None
        for _ in range(5):
            value, err = mp.quad(integrand, pts, error=True, maxdegree=10)
            if err <= ctx.quad_tol * abs(value) or value == 0 and err == 0:
                return QuadResult(+value, mpf(err))
            pts = _refine(pts)
    raise QuadratureError(f"finite quadrature did not converge (error estimate {mp.nstr(err, 3)})", value, err)
