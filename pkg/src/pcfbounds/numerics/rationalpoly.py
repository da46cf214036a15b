"""Exact-rational polynomials, real-root isolation and total variation."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from mpmath import mp, mpf

from .context import PrecisionContext, resolve


def to_fraction(x) -> Fraction:
    """Exact rational value of an int, Fraction, float, string or mpf."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    x = mpf(x)
    if not mp.isfinite(x):
        raise ValueError(f"cannot convert {x} to a fraction")
    sign, man, exp, _ = x._mpf_
    man = -int(man) if sign else int(man)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2 ** (-exp))


class RationalPoly:
    """Polynomial with :class:`fractions.Fraction` coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [to_fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def x(cls) -> "RationalPoly":
        return cls([0, 1])

    @classmethod
    def const(cls, value) -> "RationalPoly":
        return cls([value])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalPoly):
            other = RationalPoly.const(other)
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RationalPoly({[str(c) for c in self.coeffs]})"

    def _coerce(self, other) -> "RationalPoly":
        return other if isinstance(other, RationalPoly) else RationalPoly.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return RationalPoly(self[k] + other[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return RationalPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        d = to_fraction(scalar)
        return RationalPoly(c / d for c in self.coeffs)

    def __pow__(self, k: int):
        out = RationalPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def divmod(self, other: "RationalPoly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(len(rem) - other.degree, 1)
        lead = other.lead()
        while len(rem) > other.degree and any(rem):
            k = len(rem) - 1 - other.degree
            c = rem[-1] / lead
            q[k] = c
            for i, b in enumerate(other.coeffs):
                rem[i + k] -= c * b
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return RationalPoly(q), RationalPoly(rem)

    def derivative(self) -> "RationalPoly":
        return RationalPoly(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def integral(self) -> "RationalPoly":
        """Antiderivative vanishing at 0."""
        return RationalPoly([0] + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def definite_integral(self, lo, hi) -> Fraction:
        P = self.integral()
        return P(to_fraction(hi)) - P(to_fraction(lo))

    def compose(self, other: "RationalPoly") -> "RationalPoly":
        out = RationalPoly()
        for c in reversed(self.coeffs):
            out = out * other + c
        return out

    def __call__(self, x):
        """Horner evaluation; exact for rationals, otherwise in the type of ``x``."""
        if isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + mpf(c.numerator) / c.denominator
        return acc

    def sign_at(self, x: Fraction) -> int:
        v = self(x)
        return (v > 0) - (v < 0)


def _sturm_chain(p: RationalPoly) -> list[RationalPoly]:
    chain = [p, p.derivative()]
    while not chain[-1].is_zero():
        _, r = chain[-2].divmod(chain[-1])
        chain.append(-r)
    chain.pop()
    return chain


def _sign_changes(chain: Sequence[RationalPoly], x: Fraction) -> int:
    signs = [s for s in (q.sign_at(x) for q in chain) if s != 0]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def _squarefree(p: RationalPoly) -> RationalPoly:
    a, b = p, p.derivative()
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    if a.degree <= 0:
        return p
    q, _ = p.divmod(a)
    return q


def _refine(p: RationalPoly, lo: Fraction, hi: Fraction, ctx: PrecisionContext):
    """Bisection-safeguarded Newton on a bracket with one simple root."""
    dp = p.derivative()
    with ctx.workdps(10):
        target = mpf(2) ** (-2 * mp.prec)
        slo = p.sign_at(lo)
        a, b = mpf(lo.numerator) / lo.denominator, mpf(hi.numerator) / hi.denominator
        x = (a + b) / 2
        for _ in range(4 * mp.prec):
            fx = p(x)
            if fx == 0:
                return x
            if (fx > 0) == (slo > 0):
                a = x
            else:
                b = x
            d = dp(x)
            step = fx / d if d != 0 else None
            nx = x - step if step is not None else None
            if nx is None or not (a < nx < b):
                nx = (a + b) / 2
            if abs(nx - x) <= target * max(1, abs(x)) or b - a <= target * max(1, abs(x)):
                return nx
            x = nx
        return x


def poly_real_roots(p: RationalPoly, interval, ctx: PrecisionContext | None = None) -> list:
    """All distinct real roots of ``p`` in the closed ``interval``, ascending."""
    ctx = resolve(ctx)
    if p.is_zero():
        raise ValueError("the zero polynomial has no isolated roots")
    lo, hi = (to_fraction(v) for v in interval)
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    q = _squarefree(p)
    if q.degree < 1:
        return []
    roots: list = []
    exact: list[Fraction] = []
    if q(lo) == 0:
        exact.append(lo)
    if hi != lo and q(hi) == 0:
        exact.append(hi)
    chain = _sturm_chain(q)
    stack = [(lo, hi)]
    brackets = []
    while stack:
        a, b = stack.pop()
        if b <= a:
            continue
        # Sturm counts roots in (a, b]
        n = _sign_changes(chain, a) - _sign_changes(chain, b)
        if q(b) == 0:
            n -= 1
        if n <= 0:
            continue
        if n == 1 and q(a) != 0 and q(a) * q(b) < 0:
            brackets.append((a, b))
            continue
        m = (a + b) / 2
        if q(m) == 0:
            exact.append(m)
        stack.append((a, m))
        stack.append((m, b))
    with ctx.workdps(0):
        for r in exact:
            roots.append(mpf(r.numerator) / r.denominator)
    for a, b in brackets:
        roots.append(_refine(q, a, b, ctx))
    roots.sort()
    return roots


def poly_variation(p: RationalPoly, interval, ctx: PrecisionContext | None = None):
    """Total variation of ``p`` on ``interval``: sum of |p| jumps between critical points."""
    ctx = resolve(ctx)
    lo, hi = (to_fraction(v) for v in interval)
    if lo > hi:
        raise ValueError(f"variation needs lo <= hi, got [{lo}, {hi}]")
    dp = p.derivative()
    with ctx.workdps(10):
        if lo == hi or dp.is_zero():
            return mpf(0)
        a = mpf(lo.numerator) / lo.denominator
        b = mpf(hi.numerator) / hi.denominator
        crit = [r for r in poly_real_roots(dp, (lo, hi), ctx) if a < r < b]
        pts = [a] + crit + [b]
        vals = [p(x) for x in pts]
        total = sum(abs(v1 - v0) for v0, v1 in zip(vals, vals[1:]))
    return +total
