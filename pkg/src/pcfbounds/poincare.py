"""Large-z expansions of U and V for fixed a, with remainder bounds for the
Whittaker form ``W_{k,1/4}(z) = z^k e^{-z/2} sum a_s z^{-s} + eps_n(z)``.

Inside this module ``z`` in the bound routines is the Whittaker variable
(``z = w^2/2`` where ``w`` is the argument of U); the series routines take
the argument of U directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from mpmath import acos, cos, exp, inf, log, mp, mpc, mpf, pi, rf, sin, sqrt

from .numerics.context import PrecisionContext, resolve
from .numerics.quadrature import quad_semi_infinite
from .numerics.special import chi, hyp2f1_half
from .oracle import whittaker_ref
from .reports import BoundReport
from .scaled import Scaled, scaled_sum

HALF = mpf(1) / 2


class PhaseError(ValueError):
    """The argument lies outside the sector where the expansion holds."""


class RegionError(ValueError):
    """No variation bound is available for this point."""


class RegionLabel(enum.Enum):
    R1 = "R1"
    R1EXT = "R1ext"
    R2 = "R2"
    R2EXT = "R2ext"
    R4 = "R4"
    OUTSIDE = "Outside"

    def __str__(self):
        return self.value


# ---------------------------------------------------------------- series


def _series_prefactor(log_pre) -> Scaled:
    return Scaled(exp(1j * mp.im(log_pre)) if mp.im(log_pre) != 0 else mpf(1), mp.re(log_pre))


def u_series_terms(a, z, n):
    """Terms (-1)^s (a+1/2)_{2s} / (s! (2z^2)^s), s < n."""
    a = mpf(a)
    out = []
    t = mp.mpmathify(1)
    x = 2 * z * z
    for s in range(n):
        if s:
            t *= -(a + HALF + 2 * s - 2) * (a + HALF + 2 * s - 1) / (s * x)
        out.append(t)
    return out


def u_series_partial(a, z, n: int, ctx: PrecisionContext | None = None) -> Scaled:
    """``e^{-z^2/4} z^{-a-1/2}`` times the first ``n`` terms of the large-z series of U."""
    ctx = resolve(ctx)
    with ctx.workdps(5):
        z = mp.mpmathify(z)
        if z == 0:
            raise PhaseError("z = 0 is not in the sector")
        if abs(mp.arg(z)) >= 3 * pi / 4:
            raise PhaseError(f"|ph z| must be < 3pi/4, got ph z = {mp.nstr(mp.arg(z), 5)}")
        pre = _series_prefactor(-z * z / 4 - (mpf(a) + HALF) * log(z))
        return (pre * sum(u_series_terms(a, z, n))).normalized()


def v_series_terms(a, z, n):
    """Terms (1/2-a)_{2s} / (s! (2z^2)^s), s < n."""
    a = mpf(a)
    out = []
    t = mp.mpmathify(1)
    x = 2 * z * z
    for s in range(n):
        if s:
            t *= (HALF - a + 2 * s - 2) * (HALF - a + 2 * s - 1) / (s * x)
        out.append(t)
    return out


def v_series_partial(a, z, n: int, ctx: PrecisionContext | None = None) -> Scaled:
    """``sqrt(2/pi) e^{z^2/4} z^{a-1/2}`` times the first ``n`` terms of the series of V."""
    ctx = resolve(ctx)
    with ctx.workdps(5):
        z = mp.mpmathify(z)
        if z == 0 or abs(mp.arg(z)) >= pi / 4:
            raise PhaseError("|ph z| must be < pi/4")
        pre = _series_prefactor(z * z / 4 + (mpf(a) - HALF) * log(z) + log(2 / pi) / 2)
        return (pre * sum(v_series_terms(a, z, n))).normalized()


def u_compound(a, z, n_plus: int, n_minus: int, ctx: PrecisionContext | None = None) -> Scaled:
    """Recessive plus dominant series for U off the principal sector.

    Upper half (pi/4 < ph z <= pi) and lower half (-pi < ph z < -pi/4) use
    connection factors ``+i e^{-a pi i}`` and ``-i e^{a pi i}`` respectively.
    """
    ctx = resolve(ctx)
    with ctx.workdps(5):
        a = mpf(a)
        z = mp.mpmathify(z)
        if z == 0:
            raise PhaseError("z = 0 is not in the sector")
        ph = mp.arg(z)
        if ph > pi / 4:
            sign = 1
        elif ph < -pi / 4:
            sign = -1
        else:
            raise PhaseError("compound expansions need |ph z| > pi/4")
        rec = _series_prefactor(-z * z / 4 - (a + HALF) * log(z)) * sum(u_series_terms(a, z, n_plus))
        factor = sign * 1j * sqrt(2 * pi) * mp.rgamma(a + HALF) * exp(-sign * 1j * pi * a)
        dom = _series_prefactor(z * z / 4 + (a - HALF) * log(z)) * (factor * sum(v_series_terms(a, z, n_minus)))
        return scaled_sum([rec, dom]).normalized()


# ---------------------------------------------------------- Whittaker form


def whittaker_coeff(a, s: int):
    """a_s = (-1)^s (a+1/2)_{2s} / (4^s s!)."""
    a = mpf(a)
    return (-1) ** s * rf(a + HALF, 2 * s) / (4**s * mp.factorial(s))


@dataclass(frozen=True)
class WhittakerSeries:
    a: object
    n: int
    coeffs: tuple

    def partial(self, z):
        """z^k e^{-z/2} sum_{s<n} a_s z^{-s} with k = -a/2."""
        k = -mpf(self.a) / 2
        return z**k * exp(-z / 2) * sum(c / z**s for s, c in enumerate(self.coeffs))


def whittaker_series(a, n: int) -> WhittakerSeries:
    return WhittakerSeries(a, n, tuple(whittaker_coeff(a, s) for s in range(n)))


# ------------------------------------------------------------- regions


def _strict_r2(kappa, x, y) -> bool:
    y = abs(y)
    if x <= 0:
        return y >= kappa
    return y > 0 and x * x + y * y >= kappa * kappa


def classify_region(a, z, strict: bool = False) -> RegionLabel:
    """Region of the Whittaker variable ``z`` used to pick a variation bound.

    Precedence R1 > R4 > R2 > R1ext > R2ext.  With ``strict`` only the
    original three regions are reported.  For real ``a`` the extended R2
    condition is applied on the closed boundary ``|Im z| >= max(0, Im(-a))``,
    which admits the negative real axis.
    """
    a = mp.mpmathify(a)
    z = mp.mpmathify(z)
    if z == 0:
        return RegionLabel.OUTSIDE
    kappa = abs(a)
    x, y = mp.re(z), mp.im(z)
    if x >= kappa:
        return RegionLabel.R1
    if abs(z) >= 2 * kappa and abs(y) <= kappa:
        return RegionLabel.R4
    if _strict_r2(kappa, x, y):
        return RegionLabel.R2
    if strict:
        return RegionLabel.OUTSIDE
    if x > max(0, mp.re(-a)):
        return RegionLabel.R1EXT
    lim = max(0, mp.im(-a))
    if y >= lim or -y >= max(0, -mp.im(-a)):
        return RegionLabel.R2EXT
    return RegionLabel.OUTSIDE


def region_boundaries(kappa, points: int = 64):
    """Polylines of the region boundaries in the upper half z-plane."""
    kappa = mpf(kappa)
    out = {}
    q = mpc(-sqrt(3) * kappa, kappa)
    out["P"] = [mpc(-2 * kappa, 0)]
    out["Q"] = [q]
    out["S"] = [mpc(0, kappa)]
    out["T"] = [mpc(kappa, 0)]
    out["arc_PQ"] = [2 * kappa * mp.expj(pi - (pi / 6) * j / (points - 1)) for j in range(points)]
    out["segment_QS"] = [q + (mpc(0, kappa) - q) * j / (points - 1) for j in range(points)]
    out["arc_ST"] = [kappa * mp.expj(pi / 2 * (1 - mpf(j) / (points - 1))) for j in range(points)]
    out["R1_edge"] = [mpc(kappa, 4 * kappa * j / (points - 1)) for j in range(points)]
    out["R4_edge"] = [mpc(-2 * kappa - 4 * kappa * j / (points - 1), kappa) for j in range(points)]
    return out


# ------------------------------------------------------- bound quantities


@dataclass(frozen=True)
class BoundQuantities:
    kappa: object
    sigma: object
    alpha: object
    beta: object
    delta: object
    v: object
    theta: object
    phi: object


def _v_of_sigma(sigma):
    if 2 * sigma > 1:
        return None
    return 1 / sqrt(HALF + sqrt(1 - 4 * sigma**2) / 2)


def bound_quantities(a, z, region: RegionLabel | None = None) -> BoundQuantities:
    """kappa, sigma, alpha, beta, delta (R4-modified when ``region`` is R4), v, theta, phi."""
    a = mpf(a)
    z = mp.mpmathify(z)
    if region is None:
        region = classify_region(a, z)
    r = abs(z)
    kappa = abs(a)
    sigma = kappa / r
    if sigma >= 1:
        raise RegionError(f"z too small relative to |a| (sigma = {mp.nstr(sigma, 5)} >= 1)")
    v = _v_of_sigma(sigma)
    s, rinv = sigma, 1 / r
    if region == RegionLabel.R4:
        if v is None:
            raise RegionError("R4 needs |z| >= 2|a|")
        s, rinv = v * sigma, v / r
        if s >= 1:
            raise RegionError("v*sigma >= 1")
    alpha = 1 / (1 - s)
    beta = HALF + s / 2 + s / (2 * (1 - s)) * rinv
    delta = abs(a * a / 4 + mpf(3) / 16) + s * (1 + s / 4) / (1 - s) ** 2
    theta = mp.arg(z)
    phi = acos(sigma)
    return BoundQuantities(kappa, sigma, alpha, beta, delta, v, theta, phi)


# ------------------------------------------------------------ variations


def variation_bound(n: int, a, z, region: RegionLabel, ctx: PrecisionContext | None = None):
    """Closed-form majorant of the path variation of t^{-n} for the given region."""
    ctx = resolve(ctx)
    with ctx.workdps(5):
        z = mp.mpmathify(z)
        r = abs(z)
        if region in (RegionLabel.R1, RegionLabel.R1EXT):
            return r ** (-n)
        if region in (RegionLabel.R2, RegionLabel.R2EXT):
            return chi(n, ctx) * r ** (-n)
        if region == RegionLabel.R4:
            sigma = abs(mpf(a)) / r
            v = _v_of_sigma(sigma)
            if v is None:
                raise RegionError("R4 needs |z| >= 2|a|")
            return (chi(n, ctx) + sigma * v * v * n) * v**n * r ** (-n)
        raise RegionError(f"no variation bound for region {region}")


def _angle_gap(a, z):
    z = mp.mpmathify(z)
    r = abs(z)
    sigma = abs(mpf(a)) / r
    if sigma > 1:
        raise RegionError("cos(phi) = |a|/|z| exceeds 1")
    return mp.arg(z) - acos(sigma)


def variation_2f1(n: int, a, z, ctx: PrecisionContext | None = None):
    """|z|^{-n} F(n/2, 1/2; n/2+1; sin^2(theta - phi)) with cos(phi) = |a|/|z|."""
    ctx = resolve(ctx)
    with ctx.workdps(5):
        gap = _angle_gap(a, z)
        x = min(sin(gap) ** 2, mpf(1))
        return abs(mp.mpmathify(z)) ** (-n) * hyp2f1_half(n, x, ctx)


def variation_path(n: int, a, z, ctx: PrecisionContext | None = None):
    """n |z|^{-n} int_0^inf du / (u^2 + 2 cos(theta - phi) u + 1)^{(n+1)/2}.

    The ray variation with the sign of the cosine kept: it agrees with
    :func:`variation_2f1` when the cosine is nonnegative and exceeds it
    otherwise.
    """
    ctx = resolve(ctx)
    with ctx.workdps(5):
        gap = _angle_gap(a, z)
        c = cos(gap)
        if c >= 0:
            return variation_2f1(n, a, z, ctx)
        expo = -(mpf(n) + 1) / 2
        # the integrand peaks at u = -c
        val = quad_semi_infinite(lambda u: (u * u + 2 * c * u + 1) ** expo, ctx, points=[-c, 1]).value
        return n * abs(mp.mpmathify(z)) ** (-n) * val


def _variation(n, a, z, region, mode, ctx):
    if mode == "piecewise":
        return variation_bound(n, a, z, region, ctx)
    if mode != "hyp2f1":
        raise ValueError(f"unknown mode {mode!r}")
    if region in (RegionLabel.R1, RegionLabel.R1EXT):
        return variation_bound(n, a, z, region, ctx)
    if region in (RegionLabel.R2, RegionLabel.R2EXT):
        return variation_path(n, a, z, ctx)
    if region == RegionLabel.R4:
        r = abs(mp.mpmathify(z))
        sigma = abs(mpf(a)) / r
        v = _v_of_sigma(sigma)
        ray = variation_path(n, a, z, ctx) * r**n
        return (ray + sigma * v * v * n) * v**n * r ** (-n)
    raise RegionError(f"no variation bound for region {region}")


def remainder_bound(
    a,
    z,
    n: int,
    mode: str = "piecewise",
    ctx: PrecisionContext | None = None,
    exact: bool = False,
    strict: bool = False,
    exact_value=None,
) -> BoundReport:
    """Bound on |eps_n(z)| for the Whittaker expansion, z the Whittaker variable.

    ``exact=True`` fills the true remainder from the oracle; ``exact_value``
    supplies W_{k,1/4}(z) directly instead.  ``details["derivative_bound"]``
    bounds |eps_n'(z)| (the same expression times beta).
    """
    ctx = resolve(ctx)
    with ctx.workdps(5):
        a = mpf(a)
        z = mp.mpmathify(z)
        region = classify_region(a, z, strict=strict)
        if region == RegionLabel.OUTSIDE:
            raise RegionError(f"z = {z} lies outside every bound region")
        q = bound_quantities(a, z, region)
        k = -a / 2
        vn = _variation(n, a, z, region, mode, ctx)
        v1 = _variation(1, a, z, region, mode, ctx)
        pre = z**k * exp(-z / 2)
        an = whittaker_coeff(a, n)
        bound = 2 * q.alpha * abs(pre * an) * vn * exp(2 * q.alpha * q.delta * v1)
        series = whittaker_series(a, n)
        partial = series.partial(z)
        rep = BoundReport(
            method=f"poincare-{mode}",
            n=n,
            partial_sum=partial,
            bound=bound,
            prefactor_log=mp.re(log(pre)),
            region=str(region),
            details={"derivative_bound": q.beta * bound, "variation_n": vn, "variation_1": v1},
        )
        if exact_value is None and exact:
            exact_value = whittaker_ref(k, z, ctx).value()
        if exact_value is not None:
            rep = rep.with_exact(exact_value - partial)
        return rep


def whittaker_erfc(z):
    """W_{-1/4,1/4}(z) = sqrt(pi) z^{1/4} e^{z/2} erfc(sqrt z), principal branches."""
    z = mp.mpmathify(z)
    return sqrt(pi) * z ** (mpf(1) / 4) * exp(z / 2) * mp.erfc(sqrt(z))


TABLE_THETAS = tuple(range(9))
TABLE_NS = (5, 10, 15)


def table_point(j: int, r=10):
    """z = r e^{i j pi/8}; j = 8 is placed on the upper side of the cut."""
    if j == 8:
        return mpc(-r, 0)
    return r * mp.expj(j * pi / 8)


def _table_cell(args):
    mode, n, j, r, digits = args
    ctx = PrecisionContext(digits)
    with ctx.workdps(5):
        z = table_point(j, r)
        w = whittaker_erfc(z)
        return remainder_bound(HALF, z, n, mode, ctx, exact_value=w).ratio


def table_poincare(mode: str = "piecewise", ctx: PrecisionContext | None = None, r=10, jobs: int = 1):
    """3 x 9 grid of ratios |eps_n| / bound for a = 1/2, n in (5, 10, 15), theta = j pi/8."""
    ctx = resolve(ctx)
    cells = [(mode, n, j, r, ctx.digits) for n in TABLE_NS for j in TABLE_THETAS]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            vals = list(pool.map(_table_cell, cells))
    else:
        vals = [_table_cell(c) for c in cells]
    return [vals[i * 9 : (i + 1) * 9] for i in range(len(TABLE_NS))]
