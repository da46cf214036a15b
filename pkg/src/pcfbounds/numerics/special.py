"""Gamma, erfc and the one Gauss hypergeometric case the bounds need."""

from __future__ import annotations

from mpmath import exp, inf, isint, log, mp, mpf, pi, sqrt

from .context import PrecisionContext, resolve
from .quadrature import quad_semi_infinite


class PoleError(ValueError):
    """Argument sits on a pole of the Gamma function."""


def _is_pole(x) -> bool:
    if isinstance(x, mp.mpc) or isinstance(x, complex):
        if mp.im(x) != 0:
            return False
        x = mp.re(x)
    return x <= 0 and isint(x)


def gamma_fn(x, ctx: PrecisionContext | None = None):
    """Gamma function for real or complex ``x`` away from the poles."""
    ctx = resolve(ctx)
    with ctx.workdps(5):
        if _is_pole(mp.mpmathify(x)):
            raise PoleError(f"Gamma has a pole at {x}")
        return mp.gamma(x)


def loggamma_real(x, ctx: PrecisionContext | None = None):
    """``log|Gamma(x)|`` and the sign of Gamma(x) for real non-pole ``x``."""
    ctx = resolve(ctx)
    with ctx.workdps(5):
        x = mpf(x)
        if _is_pole(x):
            raise PoleError(f"Gamma has a pole at {x}")
        if x > 0:
            return mp.loggamma(x), 1
        # reflection keeps the log real
        s = mp.sinpi(x)
        val = log(pi) - log(abs(s)) - mp.loggamma(1 - x)
        sign = 1 if s > 0 else -1
        return val, sign


def chi(n, ctx: PrecisionContext | None = None):
    """``sqrt(pi) Gamma(n/2 + 1) / Gamma(n/2 + 1/2)``, the R2 variation ceiling."""
    ctx = resolve(ctx)
    with ctx.workdps(5):
        h = mpf(n) / 2
        return sqrt(pi) * exp(mp.loggamma(h + 1) - mp.loggamma(h + mpf(1) / 2))


# erfc: power series of erf (with guard digits against cancellation) for
# moderate x, Lentz continued fraction beyond.
_CF_SWITCH = 8


def _erf_series(x):
    x2 = x * x
    term = x
    total = x
    k = 0
    tiny = mpf(2) ** (-mp.prec - 10)
    while True:
        k += 1
        term *= -x2 / k
        add = term / (2 * k + 1)
        total += add
        if abs(add) <= tiny * abs(total):
            break
    return 2 * total / sqrt(pi)


def _erfc_cf(x):
    # erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tiny = mpf(2) ** (-mp.prec - 10)
    small = mpf(10) ** (-2 * mp.dps)
    f = x
    C = x
    D = mpf(0)
    k = 0
    while True:
        k += 1
        an = mpf(k) / 2
        D = x + an * D
        if D == 0:
            D = small
        C = x + an / C
        if C == 0:
            C = small
        D = 1 / D
        delta = C * D
        f *= delta
        if abs(delta - 1) <= tiny:
            break
        if k > 100000:
            raise ArithmeticError("erfc continued fraction failed to converge")
    return exp(-x * x) / (sqrt(pi) * f)


def erfc_ref(x, ctx: PrecisionContext | None = None):
    """Complementary error function of a real argument at working precision."""
    ctx = resolve(ctx)
    with ctx.workdps(5):
        x = mpf(x)
        if x < 0:
            return 2 - erfc_ref(-x, ctx)
        if x == 0:
            return mpf(1)
        if x <= _CF_SWITCH:
            # 1 - erf(x) cancels about x^2/ln(10) digits
            guard = int(x * x / 2.302585) + 10
            with mp.workdps(mp.dps + guard):
                return +(1 - _erf_series(x))
        return _erfc_cf(x)


def hyp2f1_half(n: int, x, ctx: PrecisionContext | None = None):
    """``2F1(n/2, 1/2; n/2 + 1; x)`` for ``0 <= x <= 1``.

    Power series up to ``x = 3/4``; above that the integral
    ``n * int_0^inf du / (u^2 + 2 sqrt(1-x) u + 1)^((n+1)/2)``.
    At ``x = 1`` this is ``chi(n)``.
    """
    ctx = resolve(ctx)
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    with ctx.workdps(5):
        x = mpf(x)
        if x < 0 or x > 1:
            raise ValueError(f"hyp2f1_half needs 0 <= x <= 1, got {x}")
        if x == 0:
            return mpf(1)
        h = mpf(n) / 2
        if x <= mpf(3) / 4:
            term = mpf(1)
            total = mpf(1)
            k = 0
            tiny = mpf(2) ** (-mp.prec - 5)
            while True:
                term *= (h + k) * (mpf(1) / 2 + k) / ((h + 1 + k) * (k + 1)) * x
                total += term
                k += 1
                if abs(term) <= tiny * total:
                    return total
        c = sqrt(1 - x)
        expo = -(mpf(n) + 1) / 2
        integral = quad_semi_infinite(lambda u: (u * u + 2 * c * u + 1) ** expo, ctx, points=[1]).value
        return n * integral
