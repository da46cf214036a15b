"""Numbers carried as ``mantissa * exp(logscale)`` so that e^{+-z^2/4} never has to be formed."""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import exp, log, mp, mpf


@dataclass(frozen=True)
class Scaled:
    """True value ``mantissa * exp(logscale)``; ``logscale`` is real."""

    mantissa: object
    logscale: object = mpf(0)

    @classmethod
    def from_value(cls, x) -> "Scaled":
        return cls(mp.mpmathify(x), mpf(0)).normalized()

    def normalized(self) -> "Scaled":
        """Move ``log|mantissa|`` into the logscale (zero stays zero)."""
        m = self.mantissa
        if m == 0:
            return Scaled(m, mpf(0))
        r = abs(m)
        return Scaled(m / r, self.logscale + log(r))

    def value(self):
        return self.mantissa * exp(self.logscale)

    def log_abs(self):
        if self.mantissa == 0:
            return mpf("-inf")
        return log(abs(self.mantissa)) + self.logscale

    def abs(self) -> "Scaled":
        return Scaled(abs(self.mantissa), self.logscale)

    def conjugate(self) -> "Scaled":
        return Scaled(mp.conj(self.mantissa), self.logscale)

    def rescaled(self, logscale) -> "Scaled":
        """Same number expressed against another logscale."""
        return Scaled(self.mantissa * exp(self.logscale - logscale), logscale)

    def __mul__(self, other) -> "Scaled":
        if isinstance(other, Scaled):
            return Scaled(self.mantissa * other.mantissa, self.logscale + other.logscale)
        return Scaled(self.mantissa * other, self.logscale)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Scaled":
        if isinstance(other, Scaled):
            return Scaled(self.mantissa / other.mantissa, self.logscale - other.logscale)
        return Scaled(self.mantissa / other, self.logscale)

    def __neg__(self) -> "Scaled":
        return Scaled(-self.mantissa, self.logscale)

    def __add__(self, other) -> "Scaled":
        if not isinstance(other, Scaled):
            other = Scaled(other, mpf(0))
        return scaled_sum([self, other])

    __radd__ = __add__

    def __sub__(self, other) -> "Scaled":
        return self + (-other)

    def as_dict(self, digits: int = 20) -> dict:
        return {"mantissa": _fmt(self.mantissa, digits), "logscale": _fmt(self.logscale, digits)}


def _fmt(x, digits):
    if isinstance(x, mp.mpc):
        return {"re": mp.nstr(x.real, digits), "im": mp.nstr(x.imag, digits)}
    return mp.nstr(x, digits)


def scaled_sum(terms) -> Scaled:
    """Sum against the largest logscale, so small terms become tiny mantissas."""
    terms = [t for t in terms if t.mantissa != 0]
    if not terms:
        return Scaled(mpf(0), mpf(0))
    ref = max(t.log_abs() for t in terms)
    total = sum(t.mantissa * exp(t.logscale - ref) for t in terms)
    return Scaled(total, ref)


def relative_residual(terms) -> mpf:
    """``|sum(terms)| / max|term|`` for a list of :class:`Scaled` summands."""
    terms = [t for t in terms if t.mantissa != 0]
    if not terms:
        return mpf(0)
    ref = max(t.log_abs() for t in terms)
    total = sum(t.mantissa * exp(t.logscale - ref) for t in terms)
    return abs(total)
