"""Uniform large-|a| expansions of U and V in elementary functions.

With ``mu = sqrt(2|a|)`` and ``z = mu t sqrt(2)`` the slowly varying factors
are expanded in the exact-rational polynomials ``phi_s`` and ``psi_s``.
Three branches are covered: a > 0 with z >= 0 (``pos_z``), a > 0 with the
argument -z (``neg_z``) and a < 0 with t > 1 (``neg_a``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath import acosh, asinh, exp, log, mp, mpf, pi, sqrt

from .numerics.context import PrecisionContext, resolve
from .numerics.rationalpoly import RationalPoly, poly_variation, to_fraction
from .oracle import pcf_u, pcf_uprime, v_ref, vprime_ref
from .reports import BoundReport
from .scaled import Scaled

BRANCHES = ("pos_z", "neg_z", "neg_a")


# ----------------------------------------------------------- coefficients


@dataclass(frozen=True)
class CoeffTable:
    phi: tuple
    psi: tuple

    @property
    def N(self) -> int:
        return len(self.phi) - 1


@lru_cache(maxsize=None)
def gen_coeffs(N: int = 8) -> CoeffTable:
    """phi_0..phi_N and psi_0..psi_N as exact rational polynomials in tau."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    tau = RationalPoly.x()
    w2 = tau * tau * (tau + 1) * (tau + 1)  # tau^2 (tau+1)^2
    weight = RationalPoly([3, 20, 20])  # 20 tau^2 + 20 tau + 3
    phi = [RationalPoly.const(1)]
    for _ in range(N):
        p = phi[-1]
        phi.append(-4 * w2 * p.derivative() - (weight * p).integral() / 4)
    psi = [RationalPoly.const(1)]
    cubic = 2 * tau * (tau + 1) * (2 * tau + 1)
    for s in range(1, N + 1):
        prev = phi[s - 1]
        psi.append(phi[s] + cubic * prev + 8 * w2 * prev.derivative())
    return CoeffTable(tuple(phi), tuple(psi))


# ------------------------------------------------------------------ maps


def map_pos(t):
    """(tau~, xi~) for real t."""
    t = mpf(t)
    r = sqrt(t * t + 1)
    return (t / r - 1) / 2, (t * r + asinh(t)) / 2


def map_neg(t):
    """(tau, xi) for t > 1."""
    t = mpf(t)
    if t <= 1:
        raise ValueError(f"map_neg needs t > 1, got t={t}")
    r = sqrt(t * t - 1)
    return (t / r - 1) / 2, (t * r - acosh(t)) / 2


def log_h(mu, form: int = 2):
    """log h(mu); form 1 in mu, form 2 in a = mu^2/2 (identical values)."""
    mu = mpf(mu)
    if mu <= 0:
        raise ValueError("mu must be positive")
    if form == 1:
        m2 = mu * mu
        return (-m2 / 4 - mpf(1) / 4) * log(2) - m2 / 4 + (m2 / 2 - mpf(1) / 2) * log(mu)
    a = mu * mu / 2
    return -log(2) / 2 - a / 2 + (a / 2 - mpf(1) / 4) * log(a)


def h_mu(mu) -> Scaled:
    return Scaled(mpf(1), log_h(mu))


@dataclass(frozen=True)
class UniformPoint:
    a: object
    mu: object
    t: object
    tau: object
    xi: object
    z: object
    lam: object

    @property
    def branch_sign(self) -> int:
        return 1 if self.a > 0 else -1


def uniform_point(a, t=None, z=None) -> UniformPoint:
    """Point from (a, t) or (a, z) with z = mu t sqrt(2) = 2 t sqrt|a|."""
    a = mpf(a)
    if a == 0:
        raise ValueError("a must be nonzero")
    mu = sqrt(2 * abs(a))
    if (t is None) == (z is None):
        raise ValueError("give exactly one of t and z")
    if t is None:
        t = mpf(z) / (mu * sqrt(2))
    t = mpf(t)
    z = mu * t * sqrt(2)
    tau, xi = map_pos(t) if a > 0 else map_neg(t)
    lam = a / z**2 if z != 0 else mp.inf
    return UniformPoint(a, mu, t, tau, xi, z, lam)


# ------------------------------------------------------------- variations


def _frac(x) -> Fraction:
    return to_fraction(mpf(x))


def variation_phi(s: int, tau, branch: str, ctx: PrecisionContext | None = None, N: int = 8):
    """Variation of phi_s over the branch interval ending at ``tau``."""
    ctx = resolve(ctx)
    if s < 1:
        raise ValueError("s must be >= 1")
    p = gen_coeffs(max(N, s)).phi[s]
    if isinstance(tau, UniformPoint):
        tau = tau.tau
    with ctx.workdps(5):
        if branch == "pos_z":
            return poly_variation(p, (_frac(tau), 0), ctx)
        if branch == "neg_z":
            return poly_variation(p, (-1, _frac(tau)), ctx)
        if branch == "neg_a":
            return abs(p(mpf(tau)))
    raise ValueError(f"unknown branch {branch!r}")


def variation_majorant(s: int, tau):
    """Rational majorants of the pos_z variation of phi_1..phi_3 on [-1/2, 0]."""
    tau = mpf(tau)
    if s == 1:
        return -3 * tau / (4 * (1 + mpf("4.8") * tau**2))
    if s == 2:
        return 105 * tau**2 / (32 * (1 + 18 * tau**2))
    if s == 3:
        return -3465 * tau**3 / (128 * (1 + 52 * tau**2))
    raise ValueError("majorants are available for s = 1, 2, 3 only")


def remainder_bound_uniform(point: UniformPoint, n: int, branch: str, ctx: PrecisionContext | None = None):
    """exp(2 V(phi_1) / mu^2) V(phi_n) / mu^(2n)."""
    ctx = resolve(ctx)
    if n < 1:
        raise ValueError("n must be >= 1")
    with ctx.workdps(5):
        m2 = point.mu**2
        v1 = variation_phi(1, point.tau, branch, ctx)
        vn = variation_phi(n, point.tau, branch, ctx) if n > 1 else v1
        return exp(2 * v1 / m2) * vn / m2**n


# ------------------------------------------------------------ evaluation


def _partial(polys, tau, mu, n, alternating):
    m2 = mu * mu
    total = mpf(0)
    for s in range(n):
        term = polys[s](tau) / m2**s
        total += -term if (alternating and s % 2) else term
    return total


def _extract(value: Scaled, log_pre):
    """value / exp(log_pre) as a plain number (the prefactor is divided out)."""
    return value.mantissa * exp(value.logscale - log_pre)


def _check_point(a, t, positive):
    a = mpf(a)
    if positive and a <= 0:
        raise ValueError("this branch needs a > 0")
    if not positive and a >= 0:
        raise ValueError("this branch needs a < 0")
    if positive and mpf(t) < 0:
        raise ValueError("this branch needs t >= 0")


def eval_pos_z(a, t, n: int, ctx: PrecisionContext | None = None, exact: bool = False) -> BoundReport:
    """F~ for U(a, z), z >= 0; ``details`` carries the G~ series for U'."""
    ctx = resolve(ctx)
    _check_point(a, t, True)
    with ctx.workdps(10):
        pt = uniform_point(a, t=t)
        coeffs = gen_coeffs(max(8, n))
        mu, t, tau, xi = pt.mu, pt.t, pt.tau, pt.xi
        lh = log_h(mu)
        quarter = log(t * t + 1) / 4
        pre_u = -mu * mu * xi - log(2) / 2 - log(mu) - lh - quarter
        pre_up = quarter - mu * mu * xi - log(2) - lh
        S = _partial(coeffs.phi, tau, mu, n, True)
        G = _partial(coeffs.psi, tau, mu, n, True)
        rep = BoundReport(
            method="uniform-pos",
            n=n,
            partial_sum=S,
            bound=remainder_bound_uniform(pt, n, "pos_z", ctx),
            prefactor_log=pre_u,
            details={"G_partial": G, "Uprime_prefactor_log": pre_up, "tau": tau, "xi": xi, "z": pt.z},
        )
        if exact:
            F = _extract(pcf_u(a, pt.z, ctx), pre_u)
            Gx = -_extract(pcf_uprime(a, pt.z, ctx), pre_up)
            rep = rep.with_exact(F - S)
            rep.details["F_exact"] = F
            rep.details["G_exact"] = Gx
        return rep


def eval_neg_z(a, t, n: int, ctx: PrecisionContext | None = None, exact: bool = False) -> BoundReport:
    """P~ for U(a, -z), z >= 0; ``details`` carries the Q~ series for U'(a, -z)."""
    ctx = resolve(ctx)
    _check_point(a, t, True)
    with ctx.workdps(10):
        a = mpf(a)
        pt = uniform_point(a, t=t)
        coeffs = gen_coeffs(max(8, n))
        mu, t, tau, xi = pt.mu, pt.t, pt.tau, pt.xi
        lh = log_h(mu)
        lg = mp.loggamma(a + mpf(1) / 2)
        quarter = log(t * t + 1) / 4
        pre_u = log(2 * pi) / 2 - lg + lh + mu * mu * xi - quarter
        pre_up = log(pi) / 2 + log(mu) + lh - lg + mu * mu * xi + quarter
        S = _partial(coeffs.phi, tau, mu, n, False)
        Q = _partial(coeffs.psi, tau, mu, n, False)
        rep = BoundReport(
            method="uniform-negz",
            n=n,
            partial_sum=S,
            bound=remainder_bound_uniform(pt, n, "neg_z", ctx),
            prefactor_log=pre_u,
            details={"Q_partial": Q, "Uprime_prefactor_log": pre_up, "tau": tau, "xi": xi, "z": -pt.z},
        )
        if exact:
            P = _extract(pcf_u(a, -pt.z, ctx), pre_u)
            Qx = -_extract(pcf_uprime(a, -pt.z, ctx), pre_up)
            rep = rep.with_exact(P - S)
            rep.details["P_exact"] = P
            rep.details["Q_exact"] = Qx
        return rep


def exact_relation_residual(a, t, ctx: PrecisionContext | None = None):
    """|F~ Q~ + G~ P~ - 2| with all four factors taken from the oracle."""
    ctx = resolve(ctx)
    pos = eval_pos_z(a, t, 1, ctx, exact=True)
    neg = eval_neg_z(a, t, 1, ctx, exact=True)
    d1, d2 = pos.details, neg.details
    with ctx.workdps(10):
        return abs(d1["F_exact"] * d2["Q_exact"] + d1["G_exact"] * d2["P_exact"] - 2)


def eval_neg_a(a, t, n: int, ctx: PrecisionContext | None = None, exact: bool = False) -> dict:
    """Reports for U (F), V (P), U' (G) and V' (Q) at a < 0, t > 1.

    Only F carries a certified bound.  The same expression evaluated for P
    is reported as ``details["transplanted_bound"]`` for comparison; it is
    not a bound (P's terms share one sign, so its remainder exceeds the
    first omitted term).  G and Q have no bound.
    """
    ctx = resolve(ctx)
    _check_point(a, t, False)
    with ctx.workdps(10):
        a = mpf(a)
        pt = uniform_point(a, t=t)
        coeffs = gen_coeffs(max(8, n))
        mu, t, tau, xi = pt.mu, pt.t, pt.tau, pt.xi
        lh = log_h(mu)
        quarter = log(t * t - 1) / 4
        m2xi = mu * mu * xi
        pre = {
            "U": lh - m2xi - quarter,
            "V": m2xi - log(mu) - log(pi) / 2 - lh - quarter,
            "Uprime": log(mu) - log(2) / 2 + lh + quarter - m2xi,
            "Vprime": quarter + m2xi - log(2 * pi) / 2 - lh,
        }
        partial = {
            "U": _partial(coeffs.phi, tau, mu, n, False),
            "V": _partial(coeffs.phi, tau, mu, n, True),
            "Uprime": _partial(coeffs.psi, tau, mu, n, False),
            "Vprime": _partial(coeffs.psi, tau, mu, n, True),
        }
        bound = remainder_bound_uniform(pt, n, "neg_a", ctx)
        bounds = {"U": bound, "V": None, "Uprime": None, "Vprime": None}
        names = {"U": "F", "V": "P", "Uprime": "G", "Vprime": "Q"}
        out = {}
        for key in ("U", "V", "Uprime", "Vprime"):
            details = {"series": names[key], "tau": tau, "xi": xi, "z": pt.z}
            if key == "V":
                details["transplanted_bound"] = bound
            out[key] = BoundReport(
                method="uniform-nega",
                n=n,
                partial_sum=partial[key],
                bound=bounds[key],
                prefactor_log=pre[key],
                details=details,
            )
        if exact:
            vals = {
                "U": _extract(pcf_u(a, pt.z, ctx), pre["U"]),
                "V": _extract(v_ref(a, pt.z, ctx), pre["V"]),
                "Uprime": -_extract(pcf_uprime(a, pt.z, ctx), pre["Uprime"]),
                "Vprime": _extract(vprime_ref(a, pt.z, ctx), pre["Vprime"]),
            }
            for key, val in vals.items():
                out[key] = out[key].with_exact(val - out[key].partial_sum)
                out[key].details["exact"] = val
        return out


# ----------------------------------------------------------------- tables

TABLE_A = (1, 5, 10, 50, 100)
T_GRID_POS = ("0", "1", "2.5", "5", "10", "25", "50")
T_GRID_NEG = ("1.5", "2", "3", "5", "10", "20", "50")


def _uniform_cell(args):
    which, a, t, n, digits = args
    ctx = PrecisionContext(digits)
    if which == 3:
        return eval_pos_z(a, mpf(t), n, ctx, exact=True).ratio
    if which == 4:
        return eval_neg_z(a, mpf(t), n, ctx, exact=True).ratio
    return _nega_ratio(a, t, n, ctx)


def _nega_ratio(a, t, n, ctx):
    with ctx.workdps(10):
        pt = uniform_point(a, t=mpf(t))
        pre = log_h(pt.mu) - pt.mu**2 * pt.xi - log(pt.t**2 - 1) / 4
        F = _extract(pcf_u(a, pt.z, ctx), pre)
        S = _partial(gen_coeffs(max(8, n)).phi, pt.tau, pt.mu, n, False)
        return abs(F - S) / remainder_bound_uniform(pt, n, "neg_a", ctx)


def table_grid(which: int):
    if which in (3, 4):
        return [a for a in TABLE_A], list(T_GRID_POS)
    if which == 5:
        return [-a for a in TABLE_A], list(T_GRID_NEG)
    raise ValueError("uniform tables are 3, 4 and 5")


def tables_uniform(which: int, ctx: PrecisionContext | None = None, n: int = 3, jobs: int = 1):
    """5 x 7 grid of |R_n| / bound for table 3 (pos_z), 4 (neg_z) or 5 (neg_a)."""
    ctx = resolve(ctx)
    avals, tvals = table_grid(which)
    cells = [(which, a, t, n, ctx.digits) for a in avals for t in tvals]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            vals = list(pool.map(_uniform_cell, cells))
    else:
        vals = [_uniform_cell(c) for c in cells]
    k = len(tvals)
    return [vals[i * k : (i + 1) * k] for i in range(len(avals))]
