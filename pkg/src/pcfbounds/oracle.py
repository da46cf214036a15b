"""Extended-precision reference values of U(a,z), V(a,z) and their derivatives.

For ``a > -1/2``

    U(a, z) = exp(-z^2/4) / Gamma(a + 1/2) * int_0^inf w^(a-1/2) exp(-w^2/2 - z w) dw

is integrated directly (any complex ``z``).  Smaller ``a`` is reached by the
downward recurrence ``U(a-1, z) = z U(a, z) + (a + 1/2) U(a+1, z)``.  V comes
from ``pi V(a,z) = Gamma(1/2+a) [sin(pi a) U(a,z) + U(a,-z)]``.

Every public value is a :class:`~pcfbounds.scaled.Scaled`, since
``exp(+-z^2/4)`` leaves any fixed exponent range long before z = 1000.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from mpmath import ceil, cos, exp, floor, inf, log, log10, mp, mpc, mpf, pi, sin, sqrt

from .numerics.context import PrecisionContext, resolve
from .numerics.quadrature import QuadratureError, quad_semi_infinite
from .numerics.special import PoleError
from .scaled import Scaled, relative_residual, scaled_sum

GUARD = 10


class OracleError(ArithmeticError):
    """A reference value could not be certified to working precision."""


def _inner(ctx: PrecisionContext, extra: int = GUARD) -> PrecisionContext:
    return PrecisionContext(ctx.digits + extra)


def _is_complex(z) -> bool:
    return isinstance(z, (mpc, complex)) and mp.im(z) != 0


def _as_number(z):
    z = mp.mpmathify(z)
    if isinstance(z, mpc) and z.imag == 0:
        return z.real
    return z


def _peak(c, x):
    """Location and width of the maximum of ``c log w - w^2/2 - x w`` on w > 0."""
    disc = x * x + 4 * c
    cands = []
    if disc >= 0:
        r = sqrt(disc)
        cands = [w for w in ((-x + r) / 2, (-x - r) / 2) if w > 0]
    if cands:
        g = lambda w: c * log(w) - w * w / 2 - x * w
        wpk = max(cands, key=g)
        return wpk, 1 / sqrt(abs(c) / wpk**2 + 1), g(wpk)
    wpk = 1 / (1 + abs(x))
    return wpk, wpk, c * log(wpk) - wpk * wpk / 2 - x * wpk


def _breakpoints(wpk, width, z):
    pts = {wpk + k * width for k in (-4, -2, -1, 0, 1, 2, 4, 8, 16)}
    pts |= {wpk / 4, wpk / 2}
    y = abs(mp.im(z))
    if y > 0:
        # one breakpoint per oscillation over the bulk of the Gaussian
        step = max(2 * pi / y, width / 2)
        hi = wpk + 12 * width
        k = 1
        while k * step < hi and k < 64:
            pts.add(k * step)
            k += 1
    return sorted(p for p in pts if p > 0)


def _moment(c, z, ctx: PrecisionContext) -> Scaled:
    """``int_0^inf w^c exp(-w^2/2 - z w) dw`` as a Scaled number, ``c > -1``."""
    x = mp.re(z)
    wpk, width, gref = _peak(c, x)
    pts = _breakpoints(wpk, width, z)

    def f(w):
        return exp(c * log(w) - w * w / 2 - z * w - gref)

    if not _is_complex(z):
        res = quad_semi_infinite(f, ctx, points=pts, endpoint_exponent=c)
        return Scaled(res.value, gref)

    # oscillatory: size the working precision from the cancellation ratio
    with mp.workdps(20):
        absint = mp.quad(lambda w: exp(c * log(w) - w * w / 2 - x * w - gref), [0] + pts + [inf])
    extra = 0
    for _ in range(4):
        sub = PrecisionContext(ctx.digits + extra)
        try:
            res = quad_semi_infinite(f, sub, points=pts, endpoint_exponent=c)
            return Scaled(res.value, gref)
        except QuadratureError as exc:
            v = abs(exc.value) if exc.value is not None else 0
            loss = int(ceil(log10(absint / v))) if v > 0 else sub.digits
            extra += max(loss, 10) + 5
    raise OracleError(f"oscillatory moment integral failed at z={z}, c={c}")


def _prefactor(a, z) -> Scaled:
    """exp(-z^2/4) / Gamma(a + 1/2) as a Scaled number (a > -1/2)."""
    e = -z * z / 4
    return Scaled(exp(1j * mp.im(e)) if _is_complex(z) else mpf(1), mp.re(e) - mp.loggamma(a + mpf(1) / 2))


def u_quadrature(a, z, ctx: PrecisionContext | None = None) -> Scaled:
    """U(a, z) for a > -1/2 and any complex z, by direct quadrature."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        return _u_quadrature(mpf(a), _as_number(z), ctx)


@lru_cache(maxsize=512)
def _u_quadrature(a, z, ctx):
    with ctx.workdps(GUARD):
        a = mpf(a)
        if a <= -mpf(1) / 2:
            raise ValueError(f"u_quadrature needs a > -1/2, got a={a}")
        z = _as_number(z)
        inner = _inner(ctx)
        val = _prefactor(a, z) * _moment(a - mpf(1) / 2, z, inner)
        return val.normalized()


def uprime_quadrature(a, z, ctx: PrecisionContext | None = None) -> Scaled:
    """dU/dz for a > -1/2 by differentiating under the integral sign."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        return _uprime_quadrature(mpf(a), _as_number(z), ctx)


@lru_cache(maxsize=512)
def _uprime_quadrature(a, z, ctx):
    with ctx.workdps(GUARD):
        a = mpf(a)
        if a <= -mpf(1) / 2:
            raise ValueError(f"uprime_quadrature needs a > -1/2, got a={a}")
        z = _as_number(z)
        inner = _inner(ctx)
        pre = _prefactor(a, z)
        u = pre * _moment(a - mpf(1) / 2, z, inner)
        j = pre * _moment(a + mpf(1) / 2, z, inner)
        return scaled_sum([u * (-z / 2), -j]).normalized()


def _seed_offset(a) -> int:
    """Number of downward steps from a seed a0 = a + m in (1/2, 3/2]."""
    return int(floor(mpf(1) / 2 - a)) + 1


def _recur_down(a, z, dps_extra: int, seeds):
    """Run the recurrence from (U(a0), U(a0+1)) down to (U(a), U(a+1))."""
    m = _seed_offset(a)
    a0 = a + m
    s0, s1 = seeds
    with mp.workdps(mp.dps + dps_extra):
        ref = s0.logscale
        hi = s1.mantissa * exp(s1.logscale - ref)
        lo = s0.mantissa
        ac = a0
        for _ in range(m):
            hi, lo = lo, z * lo + (ac + mpf(1) / 2) * hi
            ac -= 1
        return Scaled(lo, ref).normalized(), Scaled(hi, ref).normalized()


@lru_cache(maxsize=64)
def _seed_pair(a0, z, digits):
    ctx = PrecisionContext(digits)
    return u_quadrature(a0, z, ctx), u_quadrature(a0 + 1, z, ctx)


def _u_pair_negative(a, z, ctx: PrecisionContext):
    """(U(a,z), U(a+1,z)) for a <= -1/2 with a precision-doubling self-check."""
    check_recurrence(ctx)
    m = _seed_offset(a)
    a0 = a + m
    guard = GUARD
    for _ in range(4):
        seeds = _seed_pair(a0, z, ctx.digits + guard + 20)
        with mp.workdps(ctx.digits + guard + 20):
            u_hi, v_hi = _recur_down(a, z, 0, seeds)
        with mp.workdps(ctx.digits + guard):
            u_lo, _ = _recur_down(a, z, 0, seeds)
        with mp.workdps(ctx.digits + guard + 20):
            diff = abs(u_hi.mantissa - u_lo.rescaled(u_hi.logscale).mantissa)
        if diff <= mpf(10) ** (-(ctx.digits + 5)):
            return u_hi, v_hi
        lost = int(ceil(log10(diff))) + ctx.digits + guard if diff > 0 else 0
        guard += max(lost, 10) + 10
    raise OracleError(f"downward recurrence did not stabilize for a={a}, z={z}")


def u_negative_a(a, z, ctx: PrecisionContext | None = None) -> Scaled:
    """U(a, z) for a <= 1/2 via the downward recurrence in a.

    Meant for a <= -1/2; values in (-1/2, 1/2] serve as a cross-check
    against direct quadrature.

    ``z`` is normally real; complex values are accepted because the
    recurrence itself does not care, which the connection formulas exploit.
    """
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a = mpf(a)
        if a > mpf(1) / 2:
            raise ValueError(f"u_negative_a needs a <= 1/2, got a={a}")
        return _u_pair_negative(a, _as_number(z), ctx)[0]


def pcf_u(a, z, ctx: PrecisionContext | None = None) -> Scaled:
    """U(a, z) for real a, choosing quadrature or recurrence."""
    ctx = resolve(ctx)
    if mpf(a) > -mpf(1) / 2:
        return u_quadrature(a, z, ctx)
    return u_negative_a(a, z, ctx)


def pcf_uprime(a, z, ctx: PrecisionContext | None = None) -> Scaled:
    """dU(a, z)/dz for real a."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a = mpf(a)
        if a > -mpf(1) / 2:
            return uprime_quadrature(a, z, ctx)
        z = _as_number(z)
        u, u1 = _u_pair_negative(a, z, ctx)
        return scaled_sum([u * (-z / 2), u1 * (-(a + mpf(1) / 2))]).normalized()


def _gamma_half(a):
    """Gamma(a + 1/2), raising on its poles."""
    x = a + mpf(1) / 2
    if x <= 0 and x == int(x):
        raise PoleError(f"Gamma(a + 1/2) has a pole at a={a}")
    return mp.gamma(x)


def v_ref(a, z, ctx: PrecisionContext | None = None) -> Scaled:
    """V(a, z) from the U-connection formula."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a = mpf(a)
        g = _gamma_half(a)
        z = _as_number(z)
        terms = [pcf_u(a, z, ctx) * (sin(pi * a) * g / pi), pcf_u(a, -z, ctx) * (g / pi)]
        return scaled_sum(terms).normalized()


def vprime_ref(a, z, ctx: PrecisionContext | None = None) -> Scaled:
    """dV(a, z)/dz."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a = mpf(a)
        g = _gamma_half(a)
        z = _as_number(z)
        terms = [pcf_uprime(a, z, ctx) * (sin(pi * a) * g / pi), pcf_uprime(a, -z, ctx) * (-g / pi)]
        return scaled_sum(terms).normalized()


@dataclass(frozen=True)
class PCFValues:
    """U, U', V, V' at one point, each with its own logscale."""

    U: Scaled
    Uprime: Scaled
    V: Scaled | None
    Vprime: Scaled | None

    @property
    def logscale(self):
        return self.U.logscale

    def wronskian(self):
        """U V' - U' V, which equals sqrt(2/pi)."""
        return scaled_sum([self.U * self.Vprime, -(self.Uprime * self.V)]).value()


def pcf_values(a, z, ctx: PrecisionContext | None = None, with_v: bool = True) -> PCFValues:
    ctx = resolve(ctx)
    U = pcf_u(a, z, ctx)
    Up = pcf_uprime(a, z, ctx)
    V = Vp = None
    if with_v:
        V = v_ref(a, z, ctx)
        Vp = vprime_ref(a, z, ctx)
    return PCFValues(U, Up, V, Vp)


def whittaker_ref(k, z, ctx: PrecisionContext | None = None, m=mpf(1) / 4) -> Scaled:
    """W_{k,1/4}(z) = 2^(a/2) w^(1/2) U(a, w) with a = -2k, w = sqrt(2z)."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        if mp.mpmathify(m) != mpf(1) / 4:
            raise ValueError("only m = 1/4 is related to parabolic cylinder functions")
        a = -2 * mpf(k)
        if a <= -mpf(1) / 2:
            raise ValueError(f"whittaker_ref needs a = -2k > -1/2, got a={a}")
        z = _as_number(z)
        if z == 0:
            raise ValueError("z = 0 is excluded")
        w = sqrt(2 * z)
        u = pcf_u(a, w, ctx)
        return (u * (2 ** (a / 2) * sqrt(w))).normalized()


def _rgamma_half(a):
    return mp.rgamma(a + mpf(1) / 2)


def connection_residuals(a, z, ctx: PrecisionContext | None = None) -> dict:
    """Relative residuals of the Wronskian and connection identities.

    Keys ``"I14"`` ... ``"I20"``; each value is ``|sum of terms| / max|term|``
    or ``None`` when a Gamma factor or ``1/cos^2(pi a)`` is infinite.
    """
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a = mpf(a)
        z = _as_number(z)
        half = mpf(1) / 2
        gamma_finite = not (a + half <= 0 and a + half == int(a + half))
        U = pcf_u(a, z, ctx)
        Um = pcf_u(a, -z, ctx)
        Up = pcf_uprime(a, z, ctx)
        Upm = pcf_uprime(a, -z, ctx)
        rg = _rgamma_half(a)
        out = {}
        one = lambda x: Scaled(mp.mpmathify(x), mpf(0))

        if gamma_finite:
            V = v_ref(a, z, ctx)
            Vp = vprime_ref(a, z, ctx)
            out["I14"] = relative_residual([U * Vp, -(Up * V), one(-sqrt(2 / pi))])
        else:
            out["I14"] = None
        # d/dz U(a,-z) = -U'(a,-z)
        out["I15"] = relative_residual([U * (-1) * Upm, -(Up * Um), one(-sqrt(2 * pi) * rg)])

        if gamma_finite and cos(pi * a) != 0 and abs(cos(pi * a)) > mpf(10) ** (-mp.dps // 2):
            Vm = v_ref(a, -z, ctx)
            c = pi * rg / cos(pi * a) ** 2
            out["I16"] = relative_residual([U, Vm * (-c), V * (c * sin(pi * a))])
        else:
            out["I16"] = None

        if gamma_finite:
            g = mp.gamma(a + half)
            out["I17"] = relative_residual([V * pi, U * (-g * sin(pi * a)), Um * (-g)])
        else:
            out["I17"] = None

        iz = 1j * z
        Uiz = pcf_u(-a, iz, ctx)
        Umiz = pcf_u(-a, -iz, ctx)
        ph = pi * (a / 2 - mpf(1) / 4)
        if gamma_finite:
            g = mp.gamma(a + half)
            out["I18"] = relative_residual(
                [Uiz * sqrt(2 * pi), U * (-g * exp(-1j * ph)), Um * (-g * exp(1j * ph))]
            )
        else:
            out["I18"] = None
        q = pi * (a - half) / 2
        out["I19"] = relative_residual(
            [U, Um * (-1j * exp(1j * pi * a)), Uiz * (-sqrt(2 * pi) * rg * exp(1j * q))]
        )
        out["I20"] = relative_residual(
            [U, Um * (1j * exp(-1j * pi * a)), Umiz * (-sqrt(2 * pi) * rg * exp(-1j * q))]
        )
        return out


@lru_cache(maxsize=8)
def check_recurrence(ctx: PrecisionContext) -> bool:
    """Startup self-check of the a-recurrence and the derivative relation.

    Both are checked against direct quadrature at a sample point before any
    recurrence-based value is trusted.
    """
    tol = ctx.eps(10)
    with ctx.workdps(GUARD):
        half = mpf(1) / 2
        z = mpf(1)
        u0, u1, u2 = (u_quadrature(half + k, z, ctx) for k in range(3))
        res = relative_residual([u0, u1 * (-z), u2 * (-2)])
        if res > tol:
            raise OracleError(f"recurrence self-check failed (residual {mp.nstr(res, 3)})")
        z = mpf(2)
        a = mpf(1)
        up = uprime_quadrature(a, z, ctx)
        res = relative_residual([up, u_quadrature(a, z, ctx) * (z / 2), u_quadrature(a + 1, z, ctx) * (a + half)])
        if res > tol:
            raise OracleError(f"derivative self-check failed (residual {mp.nstr(res, 3)})")
    return True
