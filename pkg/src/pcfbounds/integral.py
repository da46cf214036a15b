"""Integration-by-parts expansion of U(a, z) for a >= 0, z > 0 and its remainder bounds.

With ``lambda = a / z**2`` the saddle-point map ``w -> s`` turns the
integral for U into a gamma-type integral of ``f(s)`` with ``f(lambda) = 1``.
Repeated integration by parts produces the functions ``f_k``, which are
computed here from a Cauchy-type integral with the exact rational kernel
``Q_k``.  Two remainder bounds are provided: a weight-function bound and a
bound from the vertical line ``Re sigma = -sigma_0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from mpmath import exp, expj, log, loggamma, mp, mpc, mpf, pi, sqrt

from . import _kernels
from .numerics.context import PrecisionContext, resolve
from .numerics.quadrature import quad_semi_infinite
from .numerics.rationalpoly import RationalPoly, to_fraction
from .oracle import pcf_u
from .reports import BoundReport
from .scaled import Scaled

GUARD = 10


class ContourError(ArithmeticError):
    """The contour leaves the analyticity domain or the rule does not settle."""


class MappingError(ArithmeticError):
    """Newton iteration for the saddle-point map failed."""


def _num(x):
    return x if isinstance(x, (mpf, mpc)) else mp.mpmathify(x)


# ----------------------------------------------------------------- saddle


@dataclass(frozen=True)
class SaddleData:
    lam: mpf
    w0: mpf
    w_minus: mpf
    s_minus: mpf
    A: mpf


def _rtsafe(F, dF, lo, hi, increasing, what="root"):
    """Newton iteration kept inside the bracket [lo, hi]; F monotone there."""
    tol = mpf(2) ** (-mp.prec + 8)
    x = (lo + hi) / 2
    for _ in range(mp.prec + 40):
        fx = F(x)
        if fx == 0:
            return x
        if (fx > 0) == increasing:
            hi = x
        else:
            lo = x
        d = dF(x)
        step = fx / d if d != 0 else None
        nx = x - step if step is not None else None
        if nx is None or not (lo < nx < hi):
            nx = (lo + hi) / 2
        if abs(nx - x) <= tol * max(abs(nx), tol):
            return nx
        x = nx
    raise MappingError(f"{what}: no convergence inside [{mp.nstr(lo, 8)}, {mp.nstr(hi, 8)}]")


@lru_cache(maxsize=512)
def _saddle(lam, prec):
    with mp.workprec(prec):
        if lam == 0:
            return SaddleData(mpf(0), mpf(0), mpf(-1), mpf(-1) / 2, mpf(0))
        w0 = (sqrt(1 + 4 * lam) - 1) / 2
        A = w0 * w0 / 2 + w0 - lam * log(w0) - lam + lam * log(lam)
        wm = -1 - w0
        target = wm * wm / 2 + wm - lam * log(-wm) - A

        def F(s):
            return s - lam * log(-s) - target

        def dF(s):
            return 1 - lam / s

        lo = mpf(-1)
        while F(lo) > 0:
            lo *= 2
        hi = mpf(-1) / 2
        while F(hi) < 0:
            hi /= 2
        sm = _rtsafe(F, dF, lo, hi, True, "s_minus")
        return SaddleData(lam, w0, wm, sm, A)


def saddle(lam, ctx: PrecisionContext | None = None) -> SaddleData:
    """Positive saddle w0, negative saddle w_- = -1 - w0, its image s_- and A."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        lam = mpf(lam)
        if lam < 0:
            raise ValueError("lambda must be >= 0")
        return _saddle(lam, mp.prec)


def _h_w(w, s, sd):
    lam = sd.lam
    return w + w * w / 2 - lam * log(w / s) - s - sd.A


def _w_of_s(s, sd):
    """Real branch of the inverse map for real s > s_-."""
    lam = sd.lam
    if lam == 0:
        return -1 + sqrt(1 + 2 * s)
    if s == lam:
        return sd.w0
    if s == 0:
        return mpf(0)

    def F(w):
        return _h_w(w, s, sd)

    def dF(w):
        return 1 + w - lam / w

    if s > lam:
        hi = sd.w0 + 1 + sqrt(2 * s)
        while F(hi) <= 0:
            hi *= 2
        return _rtsafe(F, dF, sd.w0, hi, True, "w(s)")
    if s > 0:
        lo = sd.w0 / 2
        while F(lo) <= 0:
            lo /= 2
        return _rtsafe(F, dF, lo, sd.w0, False, "w(s)")
    if s <= sd.s_minus:
        raise ValueError("s must exceed s_minus")
    hi = sd.w_minus / 2
    while F(hi) <= 0:
        hi /= 2
    return _rtsafe(F, dF, sd.w_minus, hi, True, "w(s)")


def map_w_of_s(s, lam, ctx: PrecisionContext | None = None):
    """w(s) on the real branch through w(0) = 0 and w(lambda) = w0."""
    ctx = resolve(ctx)
    sd = saddle(lam, ctx)
    with ctx.workdps(GUARD):
        s = mpf(s)
        if s <= sd.s_minus:
            raise ValueError("s must exceed s_minus")
        return +_w_of_s(s, sd)


def map_s_of_w(w, lam, ctx: PrecisionContext | None = None):
    """s(w) for real w > w_-; s and w share their sign."""
    ctx = resolve(ctx)
    sd = saddle(lam, ctx)
    with ctx.workdps(GUARD):
        w = mpf(w)
        lam = sd.lam
        if w <= sd.w_minus:
            raise ValueError("w must exceed w_minus")
        if lam == 0:
            return +(w * w / 2 + w)
        if w == 0:
            return mpf(0)
        if w == sd.w0:
            return +lam
        target = w * w / 2 + w - lam * log(abs(w)) - sd.A

        def F(s):
            return s - lam * log(abs(s)) - target

        def dF(s):
            return 1 - lam / s

        if w > sd.w0:
            hi = 2 * lam + 2 * target + 2
            while F(hi) <= 0:
                hi *= 2
            return +_rtsafe(F, dF, lam, hi, True, "s(w)")
        if w > 0:
            lo = lam / 2
            while F(lo) <= 0:
                lo /= 2
            return +_rtsafe(F, dF, lo, lam, False, "s(w)")
        lo = sd.s_minus
        hi = sd.s_minus / 2
        while F(hi) <= 0:
            hi /= 2
        return +_rtsafe(F, dF, lo, hi, True, "s(w)")


# ----------------------------------------------------------- f on contours


def _f_from_u(sig, u, sd):
    """f at sigma given u = w / sigma."""
    w = sig * u
    if sd.lam == 0:
        return 1 / (sqrt(u) * (w + 1))
    return (1 + 4 * sd.lam) ** (mpf(1) / 4) * sqrt(u) * (sig - sd.lam) / (w * w + w - sd.lam)


def _newton_u(sig, u, sd, what="contour"):
    """Solve sigma u + sigma^2 u^2 / 2 - lambda Log u - sigma - A = 0 from seed u."""
    lam = sd.lam
    if lam == 0:
        return 2 / (sqrt(1 + 2 * sig) + 1)
    tol = mpf(2) ** (-mp.prec + 10)
    loose = sqrt(tol)
    for _ in range(60):
        g = sig * u + sig * sig * u * u / 2 - lam * log(u) - sig - sd.A
        dg = sig + sig * sig * u - lam / u
        du = g / dg
        u -= du
        if abs(du) <= loose * abs(u):
            # quadratic convergence: one more step reaches full precision
            g = sig * u + sig * sig * u * u / 2 - lam * log(u) - sig - sd.A
            return u - g / (sig + sig * sig * u - lam / u)
    raise MappingError(f"{what}: Newton for w(sigma) did not converge at sigma = {mp.nstr(sig, 8)}")


def _real_u(x, sd):
    if x == 0:
        return exp(-sd.A / sd.lam) if sd.lam > 0 else mpf(1)
    return _w_of_s(x, sd) / x


@lru_cache(maxsize=4096)
def _circle(c, r, N, lam, prec):
    """(sigma_j, f(sigma_j)) for j = 0..N/2 on the circle c + r e^{2 pi i j / N}."""
    with mp.workprec(prec):
        sd = _saddle(lam, prec)
        if c - r <= sd.s_minus:
            raise ContourError("contour reaches the branch point s_minus")
        half = N // 2
        if N >= 16 and (c, r, N // 2, lam, prec) in _circle_keys:
            coarse = _circle(c, r, N // 2, lam, prec)
            out = []
            u = None
            for j in range(half + 1):
                if j % 2 == 0:
                    sig, f, u = coarse[j // 2]
                else:
                    sig = c + r * expj(2 * pi * j / N)
                    seed = (coarse[j // 2][2] + coarse[j // 2 + 1][2]) / 2
                    u = _newton_u(sig, seed, sd)
                    f = _f_from_u(sig, u, sd)
                out.append((sig, f, u))
        else:
            u = mpc(_real_u(c + r, sd))
            out = []
            prev = u
            for j in range(half + 1):
                sig = c + r * expj(2 * pi * j / N)
                seed = 2 * u - prev if j > 1 else u
                prev, u = u, _newton_u(sig, seed, sd)
                out.append((sig, _f_from_u(sig, u, sd), u))
        _circle_keys.add((c, r, N, lam, prec))
        return tuple(out)


_circle_keys: set = set()


def _trapezoid(c, r, N, sd, kernel_value):
    """(1 / 2 pi i) contour integral of kernel_value(sigma) f(sigma), plus a magnitude scale."""
    nodes = _circle(c, r, N, sd.lam, mp.prec)
    half = N // 2
    total = mpf(0)
    scale = mpf(0)
    for j, (sig, f, _) in enumerate(nodes):
        t = kernel_value(sig) * f * (sig - c)
        wt = 1 if 0 < j < half else mpf(1) / 2
        total += 2 * wt * t.real
        scale += 2 * wt * abs(t)
    return total / N, scale / N


@lru_cache(maxsize=256)
def _taylor_at_lambda(lam, prec):
    """Taylor coefficients of f about s = lambda (trapezoidal rule on a circle)."""
    with mp.workprec(prec):
        sd = _saddle(lam, prec)
        r = (lam - sd.s_minus) / 4
        N = max(128, 1 << int(mp.prec / 3).bit_length())
        nodes = _circle(lam, r, N, lam, prec)
        half = N // 2
        coeffs = []
        eps = mpf(2) ** (-prec)
        rho = max(1, lam) / 1000
        for k in range(half):
            acc = mpf(0)
            for j, (sig, f, _) in enumerate(nodes):
                wt = 1 if 0 < j < half else mpf(1) / 2
                acc += 2 * wt * (f * (sig - lam) ** (-k)).real
            a_k = acc / N
            coeffs.append(a_k)
            if k > 4 and abs(a_k) * rho**k < eps:
                break
        return tuple(coeffs)


def f(s, lam, ctx: PrecisionContext | None = None):
    """f(s) = (1 + 4 lambda)^(1/4) sqrt(w/s) (s - lambda) / (w^2 + w - lambda); f(lambda) = 1."""
    ctx = resolve(ctx)
    sd = saddle(lam, ctx)
    with ctx.workdps(GUARD):
        s = mpf(s)
        lam = sd.lam
        if s <= sd.s_minus:
            raise ValueError("s must exceed s_minus")
        if s == lam:
            return mpf(1)
        if lam == 0:
            q = sqrt(1 + 2 * s)
            return +sqrt((1 + q) / (2 * (1 + 2 * s)))
        if abs(s - lam) < max(1, lam) / 1000:
            coeffs = _taylor_at_lambda(lam, mp.prec)
            h = s - lam
            return +mp.polyval(list(reversed(coeffs)), h)
        return +_f_from_u(s, _real_u(s, sd), sd)


def _f_complex(sig, seed_u, sd):
    u = _newton_u(sig, seed_u, sd)
    return _f_from_u(sig, u, sd), u


# -------------------------------------------------------------- the kernel


def _padd(a, b, scale=1):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + scale * v
        if out[k] == 0:
            del out[k]
    return out


def _pmul(a, b):
    out = {}
    for (i1, j1, k1), v1 in a.items():
        for (i2, j2, k2), v2 in b.items():
            key = (i1 + i2, j1 + j2, k1 + k2)
            out[key] = out.get(key, 0) + v1 * v2
    return {k: v for k, v in out.items() if v != 0}


def _pdiff_sigma(a):
    return {(i - 1, j, k): v * i for (i, j, k), v in a.items() if i > 0}


def _pdivide_linear(a, var):
    """Exact quotient of ``a`` by (sigma - lambda) (var=1) or (sigma - s) (var=2), or None."""
    # group by sigma power; coefficients are polynomials in the other two variables
    if not a:
        return {}
    deg = max(i for i, _, _ in a)
    by = [dict() for _ in range(deg + 1)]
    for (i, j, k), v in a.items():
        by[i][(j, k)] = v

    def shift(poly):
        return {((j + 1, k) if var == 1 else (j, k + 1)): v for (j, k), v in poly.items()}

    quot = [dict() for _ in range(deg)]
    carry = {}
    for i in range(deg, 0, -1):
        b = dict(by[i])
        for key, v in carry.items():
            b[key] = b.get(key, 0) + v
        b = {k: v for k, v in b.items() if v != 0}
        quot[i - 1] = b
        carry = shift(b)
    rem = dict(by[0])
    for key, v in carry.items():
        rem[key] = rem.get(key, 0) + v
    if any(v != 0 for v in rem.values()):
        return None
    out = {}
    for i, b in enumerate(quot):
        for (j, k), v in b.items():
            out[(i, j, k)] = v
    return out


@dataclass(frozen=True)
class CauchyKernel:
    """Q_n = numer(sigma, lambda, s) / ((sigma - lambda)^qpow (sigma - s)^ppow).

    ``numer`` maps exponent triples (sigma, lambda, s) to exact rationals.
    """

    n: int
    numer: tuple
    qpow: int
    ppow: int

    @property
    def terms(self) -> dict:
        return dict(self.numer)

    def __call__(self, sigma, lam, s):
        num = 0
        for (i, j, k), v in _mp_coeffs(self, mp.prec):
            num += v * sigma**i * lam**j * s**k
        return num / ((sigma - lam) ** self.qpow * (sigma - s) ** self.ppow)

    def bind(self, lam, s):
        """Q_n as a function of sigma alone; monomials in (lambda, s) are folded once."""
        by_power = {}
        for (i, j, k), v in _mp_coeffs(self, mp.prec):
            by_power[i] = by_power.get(i, 0) + v * lam**j * s**k
        coeffs = [by_power.get(i, mpf(0)) for i in range(max(by_power) + 1)][::-1]
        qpow, ppow = self.qpow, self.ppow

        def value(sigma):
            return mp.polyval(coeffs, sigma) / ((sigma - lam) ** qpow * (sigma - s) ** ppow)

        return value

    def numerator_in_sigma(self, lam, s) -> RationalPoly:
        """Numerator as an exact polynomial in sigma for rational lambda and s."""
        lam, s = to_fraction(lam), to_fraction(s)
        deg = max(i for (i, _, _), _ in self.numer)
        coeffs = [Fraction(0)] * (deg + 1)
        for (i, j, k), v in self.numer:
            coeffs[i] += v * lam**j * s**k
        return RationalPoly(coeffs)

    def arrays(self):
        """Monomial exponents and float coefficients for the float64 kernels."""
        exps = np.array([key for key, _ in self.numer], dtype=np.int64).reshape(-1, 3)
        coefs = np.array([float(v) for _, v in self.numer], dtype=np.float64)
        return exps, coefs


@lru_cache(maxsize=None)
def _mp_coeffs(kernel: CauchyKernel, prec: int):
    with mp.workprec(prec):
        return tuple((key, mpf(v.numerator) / v.denominator) for key, v in kernel.numer)


@lru_cache(maxsize=None)
def cauchy_kernel(n: int) -> CauchyKernel:
    """Q_0 = 1/(sigma - s); Q_n = -[Q_{n-1} + 2 sigma dQ_{n-1}/dsigma] / (2 (sigma - lambda))."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return CauchyKernel(0, (((0, 0, 0), Fraction(1)),), 0, 1)
    prev = cauchy_kernel(n - 1)
    N = prev.terms
    a, b = prev.qpow, prev.ppow
    q = {(1, 0, 0): Fraction(1), (0, 1, 0): Fraction(-1)}
    p = {(1, 0, 0): Fraction(1), (0, 0, 1): Fraction(-1)}
    sig = {(1, 0, 0): Fraction(1)}
    qp = _pmul(q, p)
    inner = _padd(_pmul(_pmul(_pdiff_sigma(N), qp), sig), _pmul(_pmul(N, p), sig), -a)
    inner = _padd(inner, _pmul(_pmul(N, q), sig), -b)
    num = _padd(_pmul(N, qp), inner, 2)
    num = {k: -v / 2 for k, v in num.items()}
    qpow, ppow = a + 2, b + 1
    for var in (1, 2):
        while True:
            quot = _pdivide_linear(num, var)
            if quot is None:
                break
            num = quot
            if var == 1:
                qpow -= 1
            else:
                ppow -= 1
    return CauchyKernel(n, tuple(sorted(num.items())), qpow, ppow)


# ---------------------------------------------------------------- f_n(s)


@dataclass(frozen=True)
class CauchyConfig:
    """``sigma0``: abscissa of the bounding line; ``nodes``: starting trapezoidal resolution."""

    sigma0: object = None
    nodes: int = 64
    max_nodes: int = 8192


def _contours(s, sd):
    c1, r1, c2, r2 = _kernels.circles(s, sd.lam, sd.s_minus)
    out = [(c1, r1)]
    if r2 > 0:
        out.append((c2, r2))
    return out


def _fn_value(s, sd, n, cfg, tol):
    kv = cauchy_kernel(n).bind(sd.lam, s)

    total = mpf(0)
    for c, r in _contours(s, sd):
        N = cfg.nodes
        prev, _ = _trapezoid(c, r, N, sd, kv)
        while True:
            N *= 2
            if N > cfg.max_nodes:
                raise ContourError(f"f_{n}({mp.nstr(s, 8)}) did not settle with {cfg.max_nodes} nodes")
            cur, scale = _trapezoid(c, r, N, sd, kv)
            if abs(cur - prev) <= tol * max(abs(cur), scale):
                break
            prev = cur
        total += cur
    return total


def f_n(s, lam, n: int, cfg: CauchyConfig | None = None, ctx: PrecisionContext | None = None):
    """f_n(s) from the Cauchy-type integral of Q_n(sigma, lambda, s) f(sigma)."""
    ctx = resolve(ctx)
    cfg = cfg or CauchyConfig()
    sd = saddle(lam, ctx)
    with ctx.workdps(GUARD):
        s = mpf(s)
        if s < 0:
            raise ValueError("s must be >= 0")
        if n == 0:
            return f(s, lam, ctx)
        return +_fn_value(s, sd, n, cfg, ctx.eps(5))


@lru_cache(maxsize=1024)
def _coeff(lam, n, digits):
    ctx = PrecisionContext(digits=digits)
    return f_n(lam, lam, n, ctx=ctx)


def coeff(k: int, lam, ctx: PrecisionContext | None = None):
    """f_k(lambda), the k-th coefficient of the expansion."""
    ctx = resolve(ctx)
    if k == 0:
        return mpf(1)
    with ctx.workdps(GUARD):
        return _coeff(mpf(lam), k, ctx.digits)


def tau_tilde(lam):
    return (1 / sqrt(4 * mpf(lam) + 1) - 1) / 2


def f1_closed(lam, ctx: PrecisionContext | None = None):
    """Closed form of f_1(lambda) in the variable tau~."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        t = tau_tilde(lam)
        return +(-(2 * t + 1) ** 2 / (24 * (t + 1)) * (20 * t * t + 30 * t + 9))


def coeff_bridge(k: int, lam, ctx: PrecisionContext | None = None):
    """|phi_k(tau~) - (-1)^k (2 lambda)^k f_k(lambda)|."""
    from .uniform import gen_coeffs

    ctx = resolve(ctx)
    table = gen_coeffs(max(8, k))
    if k > table.N:
        raise ValueError("k exceeds the coefficient table")
    with ctx.workdps(GUARD):
        lam = mpf(lam)
        phi = table.phi[k](tau_tilde(lam))
        return +abs(phi - (-1) ** k * (2 * lam) ** k * coeff(k, lam, ctx))


# ------------------------------------------------------------- expansion


def _check_az(a, z):
    a, z = mpf(a), mpf(z)
    if a < 0:
        raise ValueError("the expansion needs a >= 0")
    if z <= 0:
        raise ValueError("the expansion needs z > 0")
    return a, z


def prefactor_log(a, z, ctx: PrecisionContext | None = None):
    """log of exp(-z^2/4 - A z^2) z^(-a-1/2) (1 + 4 lambda)^(-1/4)."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a, z = _check_az(a, z)
        lam = a / z**2
        sd = saddle(lam, ctx)
        return +(-z * z / 4 - sd.A * z * z - (a + mpf(1) / 2) * log(z) - log(1 + 4 * lam) / 4)


def partial_sum_ibp(a, z, n: int, ctx: PrecisionContext | None = None):
    """sum_{k<n} f_k(lambda) / z^(2k)."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a, z = _check_az(a, z)
        lam = a / z**2
        return +sum((coeff(k, lam, ctx) / z ** (2 * k) for k in range(n)), mpf(0))


def expansion_ibp(a, z, n: int, ctx: PrecisionContext | None = None) -> Scaled:
    """Truncated expansion of U(a, z) carried as partial sum times exp(log prefactor)."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        return Scaled(partial_sum_ibp(a, z, n, ctx), prefactor_log(a, z, ctx))


def _log_gamma_density(a, z):
    return (2 * a + 1) * log(z) - loggamma(a + mpf(1) / 2)


def remainder_exact_ibp(a, z, n: int, cfg: CauchyConfig | None = None, ctx: PrecisionContext | None = None,
                        method: str = "laguerre"):
    """R_n(a, z), the remainder scaled so that U = pre [partial sum + R_n / z^(2n)].

    ``method="laguerre"`` (default) integrates f_n against the gamma density
    with a generalized Gauss-Laguerre rule, ``method="tanh-sinh"`` with the
    semi-infinite tanh-sinh rule; ``method="oracle"`` uses the reference
    value of U instead.
    """
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a, z = _check_az(a, z)
        lam = a / z**2
        if method == "oracle":
            u = pcf_u(a, z, ctx)
            full = u.mantissa * exp(u.logscale - prefactor_log(a, z, ctx))
            return +(z ** (2 * n) * (full - partial_sum_ibp(a, z, n, ctx)))
        if method not in ("laguerre", "tanh-sinh"):
            raise ValueError(f"unknown method {method!r}")
        cfg = cfg or CauchyConfig()
        sd = saddle(lam, ctx)
        half = mpf(1) / 2
        tol = ctx.eps(5)

        def fn_at(s):
            if n == 0:
                return f(s, lam, ctx)
            return _fn_value(s, sd, n, cfg, tol)

        if method == "laguerre":
            return +_laguerre_remainder(a, z, fn_at, ctx)
        lg = _log_gamma_density(a, z)

        def integrand(s):
            if s == 0:
                return mpf(0) if a > half else exp(lg) * fn_at(s)
            return exp(lg + (a - half) * log(s) - z * z * s) * fn_at(s)

        peak = max((a - half) / z**2, mpf(0))
        width = sqrt(a + half) / z**2
        pts = [p for p in (peak - 4 * width, peak, peak + 4 * width, peak + 12 * width) if p > 0]
        res = quad_semi_infinite(integrand, ctx, points=pts, endpoint_exponent=min(a - half, 0))
        return +res.value


def _laguerre_remainder(a, z, fn_at, ctx, start=16, max_nodes=256):
    """Generalized Gauss-Laguerre rule in x = z^2 s with exponent a - 1/2, doubling nodes."""
    alpha = a - mpf(1) / 2
    norm = loggamma(a + mpf(1) / 2)
    prev = None
    m = start
    while m <= max_nodes:
        X, W = mp.gauss_quadrature(m, "glaguerre", alpha)
        val = sum((w * exp(-norm) * fn_at(x / z**2) for x, w in zip(X, W)), mpf(0))
        if prev is not None and abs(val - prev) <= ctx.quad_tol * max(abs(val), 1):
            return val
        prev = val
        m *= 2
    raise ContourError(f"Gauss-Laguerre rule did not settle with {max_nodes} nodes")


# ---------------------------------------------------------- weight bound


@dataclass(frozen=True)
class WeightConfig:
    """Weight exponent sigma_n and an optional preset M_n."""

    sigma_n: object = 1
    M_n: object = None


@dataclass(frozen=True)
class WeightBound:
    M_n: mpf
    fn_lambda: mpf
    S_n: mpf
    bound: mpf
    s_star: mpf
    sup_ratio: mpf


def log_weight(s, lam, sigma_n):
    """log of w_n(s, lambda) = [(s/lambda)^(-lambda) e^(s - lambda)]^sigma_n."""
    s, lam = mpf(s), mpf(lam)
    if lam == 0:
        return sigma_n * s
    if s == 0:
        return mp.inf if sigma_n > 0 else mpf(0)
    return sigma_n * (s - lam - lam * log(s / lam))


def S_n(a, z, sigma_n=1, ctx: PrecisionContext | None = None):
    """Integral of the gamma density against the weight w_n."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a, z = _check_az(a, z)
        sn = mpf(sigma_n)
        lam = a / z**2
        ls = lam * sn
        half = mpf(1) / 2
        if z * z <= sn:
            raise ValueError("S_n needs z^2 > sigma_n")
        if a + half <= ls:
            raise ValueError("S_n needs a + 1/2 > lambda sigma_n")
        first = ls * log(a) - ls if a > 0 else mpf(0)
        val = first + (ls - a - half) * log(1 - sn / z**2) + loggamma(a + half - ls) - loggamma(a + half)
        return +exp(val)


def _log_weight_np(s, lam, sigma_n):
    s = np.asarray(s, dtype=float)
    if lam == 0:
        return sigma_n * s
    with np.errstate(divide="ignore"):
        return np.where(s > 0, sigma_n * (s - lam - lam * np.log(np.where(s > 0, s, 1.0) / lam)),
                        np.inf if sigma_n > 0 else 0.0)


def _scan_grid(lam, sigma_n):
    hi = max(1.0, lam) * (1e6 if sigma_n == 0 else 1.0) + (60.0 / sigma_n if sigma_n > 0 else 0.0)
    hi += 10.0 * np.sqrt(lam + 1.0)
    lo = 1e-10 * max(1.0, lam)
    grid = np.geomspace(lo, hi, 1000)
    span = 10.0 * np.sqrt(lam + 1.0)
    near = np.linspace(max(lo, lam - span), lam + span, 500)
    return np.unique(np.concatenate([[0.0], grid, near]))


def _golden(fun, lo, hi, iters=60):
    g = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fun(d)
    return (c, fc) if fc > fd else (d, fd)


def sup_weighted(lam, n: int, sigma_n=1, ctx: PrecisionContext | None = None):
    """(sup_{s>=0} |f_n(s)| / w_n(s, lambda), maximizing s).

    A float64 scan locates the maxima, golden-section search over log s
    refines the three largest, and the winner is re-evaluated in extended
    precision.
    """
    ctx = resolve(ctx)
    sd = saddle(lam, ctx)
    kern = cauchy_kernel(n)
    exps, coefs = kern.arrays()
    fl = float(sd.lam)
    sn = float(sigma_n)
    args = (fl, float(sd.s_minus), float(sd.w0), float(sd.A), exps, coefs, kern.qpow, kern.ppow)

    def ratio(svals):
        vals = _kernels.fn_scan(svals, *args)
        return np.abs(vals) * np.exp(-_log_weight_np(svals, fl, sn))

    grid = _scan_grid(fl, sn)
    r = ratio(grid)
    best_s, best_r = float(grid[np.argmax(r)]), float(np.max(r))
    peaks = [i for i in range(1, grid.size - 1) if r[i] >= r[i - 1] and r[i] >= r[i + 1]]
    peaks = sorted(peaks, key=lambda i: -r[i])[:3]
    for i in peaks:
        lo, hi = grid[i - 1], grid[i + 1]
        if lo <= 0:
            lo = grid[i] * 1e-3
        x, val = _golden(lambda t: float(ratio(np.array([np.exp(t)]))[0]), np.log(lo), np.log(hi))
        if val > best_r:
            best_s, best_r = float(np.exp(x)), val
    with ctx.workdps(GUARD):
        s_star = mpf(best_s)
        lw = log_weight(s_star, sd.lam, mpf(sigma_n))
        precise = abs(f_n(s_star, sd.lam, n, ctx=ctx)) * exp(-lw) if lw != mp.inf else mpf(0)
        return max(precise, mpf(best_r)), s_star


def weight_bound(a, z, n: int, cfg: WeightConfig | None = None, ctx: PrecisionContext | None = None) -> WeightBound:
    """[|f_n(lambda)| + M_n(lambda)] S_n(a, z), a bound for |R_n(a, z)|."""
    ctx = resolve(ctx)
    cfg = cfg or WeightConfig()
    with ctx.workdps(GUARD):
        a, z = _check_az(a, z)
        if n < 1:
            raise ValueError("n must be >= 1")
        lam = a / z**2
        sn = mpf(cfg.sigma_n)
        Sn = S_n(a, z, sn, ctx)
        fl = coeff(n, lam, ctx)
        if cfg.M_n is None:
            sup, s_star = sup_weighted(lam, n, sn, ctx)
            M = max(mpf(0), sup - abs(fl))
        else:
            M, s_star, sup = mpf(cfg.M_n), mpf(0), mpf(cfg.M_n) + abs(fl)
        return WeightBound(M, fl, Sn, (abs(fl) + M) * Sn, s_star, sup)


# ------------------------------------------------------------ line bound


def choose_sigma0(lam, ctx: PrecisionContext | None = None):
    """max(0.3, |s_-| / 2), always strictly inside (0, |s_-|)."""
    sd = saddle(lam, ctx)
    with resolve(ctx).workdps(GUARD):
        return max(mpf("0.3"), abs(sd.s_minus) / 2)


def line_sup_f(lam, sigma0, ctx: PrecisionContext | None = None, points: int = 100):
    """(|f(-sigma_0)|, max of |f| over a scan of the line Re sigma = -sigma_0)."""
    ctx = resolve(ctx)
    sd = saddle(lam, ctx)
    with ctx.workdps(GUARD):
        s0 = mpf(sigma0)
        if not 0 < s0 < -sd.s_minus:
            raise ContourError("sigma_0 must lie in (0, |s_minus|)")
        u = mpc(_real_u(-s0, sd))
        at_point = abs(_f_from_u(-s0, u, sd))
        best = at_point
        top = mp.asinh(mpf(10) ** 4)
        prev_tau = mpf(0)
        for k in range(1, points):
            tau = s0 * mp.sinh(top * k / (points - 1))
            # march in small steps so that Newton stays on the principal branch
            steps = int(mp.ceil((tau - prev_tau) / (abs(mpc(-s0, prev_tau)) / 4))) or 1
            for i in range(1, steps + 1):
                sig = mpc(-s0, prev_tau + (tau - prev_tau) * i / steps)
                fv, u = _f_complex(sig, u, sd)
            prev_tau = tau
            best = max(best, abs(fv))
        return at_point, best


def _line_coefficient(n, lam, s0):
    if n == 1:
        return (4 * lam + 3 * pi * s0) / (4 * pi * s0**2)
    if n == 2:
        return (16 * lam**2 + 11 * pi * lam * s0 + 26 * s0**2) / (16 * pi * s0**4)
    if n == 3:
        return (768 * lam**3 + 549 * pi * lam**2 * s0 + 1376 * lam * s0**2 + 243 * pi * s0**3) / (96 * pi * s0**6)
    raise ValueError("line bounds are available for n = 1, 2, 3")


def cauchy_line_bound(a, z, n: int, sigma0=None, ctx: PrecisionContext | None = None):
    """Bound for |R_n(a, z)| from the line Re sigma = -sigma_0, n = 1, 2, 3.

    M(sigma_0, lambda) is |f(-sigma_0)|, replaced by the scan maximum if a
    100-point scan of the line finds a larger value.
    """
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a, z = _check_az(a, z)
        lam = a / z**2
        s0 = choose_sigma0(lam, ctx) if sigma0 is None else mpf(sigma0)
        coef = _line_coefficient(n, lam, s0)
        at_point, scan = line_sup_f(lam, s0, ctx)
        return +(max(at_point, scan) * coef)


# ------------------------------------------------------------- reports


def eval_ibp(a, z, n: int, ctx: PrecisionContext | None = None, exact: bool = False,
             weight: WeightConfig | None = None, sigma0=None) -> BoundReport:
    """Expansion, weight-function bound and line bound on the normalized scale.

    ``bound`` is the weight-function bound; the line bound is in ``details``
    (for n <= 3).  Both are divided by z^(2n) to match the partial sum.
    """
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        a, z = _check_az(a, z)
        lam = a / z**2
        z2n = z ** (2 * n)
        wb = weight_bound(a, z, n, weight, ctx)
        details = {
            "lambda": lam,
            "A": saddle(lam, ctx).A,
            "fn_lambda": wb.fn_lambda,
            "M_n": wb.M_n,
            "S_n": wb.S_n,
            "weight_bound_Rn": wb.bound,
        }
        if n <= 3:
            lb = cauchy_line_bound(a, z, n, sigma0, ctx)
            details["line_bound_Rn"] = lb
            details["line_bound"] = lb / z2n
        rep = BoundReport(
            method="ibp",
            n=n,
            partial_sum=partial_sum_ibp(a, z, n, ctx),
            bound=wb.bound / z2n,
            prefactor_log=prefactor_log(a, z, ctx),
            details=details,
        )
        if exact:
            Rn = remainder_exact_ibp(a, z, n, ctx=ctx, method="oracle")
            rep = rep.with_exact(Rn / z2n)
            rep.details["R_n"] = Rn
            if n <= 3:
                rep.details["line_ratio"] = abs(Rn) / details["line_bound_Rn"]
        return rep


def rho1(lam, z=10, ctx: PrecisionContext | None = None, sigma_1=1):
    """Ratio of |R_1| to the weight-function bound at a = lambda z^2."""
    ctx = resolve(ctx)
    with ctx.workdps(GUARD):
        z = mpf(z)
        a = mpf(lam) * z * z
        wb = weight_bound(a, z, 1, WeightConfig(sigma_1), ctx)
        R1 = remainder_exact_ibp(a, z, 1, ctx=ctx, method="oracle")
        return +(abs(R1) / wb.bound), wb


def fig4_rows(lams, z=10, ctx: PrecisionContext | None = None):
    """Rows (lambda, |f_1|+M_1 scaled by 1+5 lambda, rho_1) for the figure data."""
    ctx = resolve(ctx)
    rows = []
    for lam in lams:
        r, wb = rho1(lam, z, ctx)
        lam = mpf(lam)
        rows.append({
            "lambda": lam,
            "f1": wb.fn_lambda,
            "M1": wb.M_n,
            "scaled_bound": (1 + 5 * lam) * (abs(wb.fn_lambda) + wb.M_n),
            "S1": wb.S_n,
            "rho1": r,
        })
    return rows
